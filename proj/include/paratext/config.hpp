#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "paratext/llm.hpp"
#include "paratext/pipeline.hpp"
#include "paratext/prompts.hpp"

namespace paratext {

struct ProviderConfig {
    std::string provider = "mock";  // "mock" or "http"
    std::string base_url;
    std::string model_id = "generator";
    std::string auth_env;
    int timeout_seconds = 60;
};

struct RunConfig {
    std::filesystem::path dataset_root;
    std::filesystem::path output_dir = "out";
    std::filesystem::path cache_dir;

    ProviderConfig generation;
    ProviderConfig judge;
    ProviderConfig embedding;
    ProviderConfig search_source;  // source-language engine
    ProviderConfig search_target;  // target-language engine

    PromptVariant variant = PromptVariant::default_;
    Mode mode = Mode::non_thinking;
    E2EMode e2e_mode = E2EMode::sequential;
    bool retrieval = false;
    bool mock = false;  // swap every provider for deterministic mocks
    int max_concurrency = 4;
    int max_tokens = 2048;
    std::uint64_t seed = 0;

    bool per_story_pool = false;
    bool run_judge = false;
    bool kappa_all_rows = false;  // documented alternative reading; identical under
                                  // the three-way encoding
};

// Load a declarative JSON config file; unknown keys are an error so typos
// fail fast. Missing file -> error.
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::ordered_json config_snapshot(const RunConfig& config);  // secrets excluded

}  // namespace paratext
