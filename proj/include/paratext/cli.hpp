#pragma once

namespace paratext {

// Full command-line surface (validate/stats/identify/explicate/e2e/score/agree
// plus the fixture synthesizer). Exit codes: 0 success, 1 data violations,
// 2 configuration/IO errors.
int run_cli(int argc, char** argv);

}  // namespace paratext
