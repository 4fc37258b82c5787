#include "paratext/config.hpp"

#include <fstream>
#include <sstream>

namespace paratext {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& detail) {
    throw std::runtime_error("config error: " + detail);
}

ProviderConfig parse_provider(const json& pj, const std::string& where) {
    if (!pj.is_object()) config_error(where + " must be an object");
    ProviderConfig pc;
    for (const auto& [key, value] : pj.items()) {
        if (key == "provider") pc.provider = value.get<std::string>();
        else if (key == "base_url") pc.base_url = value.get<std::string>();
        else if (key == "model_id") pc.model_id = value.get<std::string>();
        else if (key == "auth_env") pc.auth_env = value.get<std::string>();
        else if (key == "timeout_seconds") pc.timeout_seconds = value.get<int>();
        else config_error("unknown key '" + where + "." + key + "'");
    }
    if (pc.provider != "mock" && pc.provider != "http")
        config_error(where + ".provider must be 'mock' or 'http'");
    if (pc.provider == "http" && pc.base_url.empty())
        config_error(where + ".base_url is required for the http provider");
    return pc;
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) config_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) config_error("malformed JSON in " + path.string());
    if (!j.is_object()) config_error(path.string() + " must hold a JSON object");

    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "dataset_root") cfg.dataset_root = value.get<std::string>();
        else if (key == "output_dir") cfg.output_dir = value.get<std::string>();
        else if (key == "cache_dir") cfg.cache_dir = value.get<std::string>();
        else if (key == "generation") cfg.generation = parse_provider(value, "generation");
        else if (key == "judge") cfg.judge = parse_provider(value, "judge");
        else if (key == "embedding") cfg.embedding = parse_provider(value, "embedding");
        else if (key == "search_source") cfg.search_source = parse_provider(value, "search_source");
        else if (key == "search_target") cfg.search_target = parse_provider(value, "search_target");
        else if (key == "variant") {
            auto v = variant_from_string(value.get<std::string>());
            if (!v) config_error("unknown variant '" + value.get<std::string>() + "'");
            cfg.variant = *v;
        } else if (key == "mode") {
            auto m = mode_from_string(value.get<std::string>());
            if (!m) config_error("unknown mode '" + value.get<std::string>() + "'");
            cfg.mode = *m;
        } else if (key == "e2e_mode") {
            auto em = e2e_mode_from_string(value.get<std::string>());
            if (!em) config_error("unknown e2e_mode '" + value.get<std::string>() + "'");
            cfg.e2e_mode = *em;
        } else if (key == "retrieval") cfg.retrieval = value.get<bool>();
        else if (key == "mock") cfg.mock = value.get<bool>();
        else if (key == "max_concurrency") cfg.max_concurrency = value.get<int>();
        else if (key == "max_tokens") cfg.max_tokens = value.get<int>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "per_story_pool") cfg.per_story_pool = value.get<bool>();
        else if (key == "run_judge") cfg.run_judge = value.get<bool>();
        else if (key == "kappa_all_rows") cfg.kappa_all_rows = value.get<bool>();
        else config_error("unknown key '" + key + "' in " + path.string());
    }
    if (cfg.max_concurrency < 1) config_error("max_concurrency must be >= 1");
    if (cfg.max_tokens < 1) config_error("max_tokens must be >= 1");
    return cfg;
}

nlohmann::ordered_json config_snapshot(const RunConfig& config) {
    auto provider = [](const ProviderConfig& pc) {
        // auth_env carries the variable *name*; resolved tokens never land here
        return ordered_json{{"provider", pc.provider},
                            {"base_url", pc.base_url},
                            {"model_id", pc.model_id},
                            {"auth_env", pc.auth_env},
                            {"timeout_seconds", pc.timeout_seconds}};
    };
    ordered_json j;
    j["dataset_root"] = config.dataset_root.generic_string();
    j["output_dir"] = config.output_dir.generic_string();
    j["cache_dir"] = config.cache_dir.generic_string();
    j["generation"] = provider(config.generation);
    j["judge"] = provider(config.judge);
    j["embedding"] = provider(config.embedding);
    j["search_source"] = provider(config.search_source);
    j["search_target"] = provider(config.search_target);
    j["variant"] = to_string(config.variant);
    j["mode"] = to_string(config.mode);
    j["e2e_mode"] = to_string(config.e2e_mode);
    j["retrieval"] = config.retrieval;
    j["mock"] = config.mock;
    j["max_concurrency"] = config.max_concurrency;
    j["max_tokens"] = config.max_tokens;
    j["seed"] = config.seed;
    j["per_story_pool"] = config.per_story_pool;
    j["run_judge"] = config.run_judge;
    j["kappa_all_rows"] = config.kappa_all_rows;
    return j;
}

}  // namespace paratext
