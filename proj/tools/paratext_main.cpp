#include "paratext/cli.hpp"

int main(int argc, char** argv) { return paratext::run_cli(argc, argv); }
