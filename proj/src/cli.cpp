#include "paratext/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "paratext/agreement.hpp"
#include "paratext/config.hpp"
#include "paratext/corpus.hpp"
#include "paratext/fixture.hpp"
#include "paratext/llm.hpp"
#include "paratext/metrics.hpp"
#include "paratext/pipeline.hpp"
#include "paratext/prompts.hpp"
#include "paratext/report.hpp"
#include "paratext/retrieval.hpp"
#include "paratext/text.hpp"

namespace paratext {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitConfig = 2;

struct CliState {
    std::string config_path;
    std::string data_root;
    std::string out_dir;
    std::string cache_dir;
    std::string variant;
    std::string mode;
    std::string e2e_mode;
    std::vector<std::string> stories;
    bool mock = false;
    bool retrieval = false;
    bool run_judge = false;
    bool per_story_pool = false;
    bool kappa_all_rows = false;
    int max_tokens = 0;
    int concurrency = 0;
    std::string pred_path;
    std::string pred_kind = "explicate";
    std::string profile = "released-stats";
};

[[noreturn]] void config_error(const std::string& detail) {
    throw std::runtime_error("config error: " + detail);
}

RunConfig resolve_config(const CliState& state) {
    RunConfig cfg;
    if (!state.config_path.empty()) cfg = load_run_config(state.config_path);
    if (!state.data_root.empty()) cfg.dataset_root = state.data_root;
    if (!state.out_dir.empty()) cfg.output_dir = state.out_dir;
    if (!state.cache_dir.empty()) cfg.cache_dir = state.cache_dir;
    if (state.mock) cfg.mock = true;
    if (state.retrieval) cfg.retrieval = true;
    if (state.run_judge) cfg.run_judge = true;
    if (state.per_story_pool) cfg.per_story_pool = true;
    if (state.kappa_all_rows) cfg.kappa_all_rows = true;
    if (state.max_tokens > 0) cfg.max_tokens = state.max_tokens;
    if (state.concurrency > 0) cfg.max_concurrency = state.concurrency;
    if (!state.variant.empty()) {
        auto v = variant_from_string(state.variant);
        if (!v) config_error("unknown variant '" + state.variant + "'");
        cfg.variant = *v;
    }
    if (!state.mode.empty()) {
        auto m = mode_from_string(state.mode);
        if (!m) config_error("unknown mode '" + state.mode + "'");
        cfg.mode = *m;
    }
    if (!state.e2e_mode.empty()) {
        auto em = e2e_mode_from_string(state.e2e_mode);
        if (!em) config_error("unknown e2e mode '" + state.e2e_mode + "'");
        cfg.e2e_mode = *em;
    }
    return cfg;
}

fs::path require_dataset(const RunConfig& cfg) {
    if (cfg.dataset_root.empty())
        config_error("no dataset root; pass --data or set dataset_root in the config");
    if (!fs::exists(cfg.dataset_root))
        config_error("dataset root does not exist: " + cfg.dataset_root.string());
    return cfg.dataset_root;
}

struct Providers {
    std::unique_ptr<ChatProvider> generation_chat;
    std::unique_ptr<ChatProvider> judge_chat;
    std::unique_ptr<EmbeddingProvider> embedder;
    std::unique_ptr<SearchProvider> search_source;
    std::unique_ptr<SearchProvider> search_target;
    std::unique_ptr<ResponseCache> cache;
    std::unique_ptr<Gateway> generation;
    std::unique_ptr<Gateway> judge;
};

Providers make_providers(const RunConfig& cfg) {
    Providers p;
    auto chat = [&](const ProviderConfig& pc) -> std::unique_ptr<ChatProvider> {
        if (cfg.mock || pc.provider == "mock") return std::make_unique<MockChatProvider>();
        return std::make_unique<HttpChatProvider>(
            HttpProviderConfig{pc.base_url, pc.model_id, pc.auth_env, pc.timeout_seconds});
    };
    p.generation_chat = chat(cfg.generation);
    p.judge_chat = chat(cfg.judge);
    if (cfg.mock || cfg.embedding.provider == "mock") {
        p.embedder = std::make_unique<MockEmbeddingProvider>();
    } else {
        p.embedder = std::make_unique<HttpEmbeddingProvider>(
            HttpProviderConfig{cfg.embedding.base_url, cfg.embedding.model_id,
                               cfg.embedding.auth_env, cfg.embedding.timeout_seconds});
    }
    auto search = [&](const ProviderConfig& pc,
                      SearchEngine engine) -> std::unique_ptr<SearchProvider> {
        if (cfg.mock || pc.provider == "mock") return std::make_unique<MockSearchProvider>(engine);
        config_error("only the mock search provider is available in this build");
    };
    p.search_source = search(cfg.search_source, SearchEngine::source_lang);
    p.search_target = search(cfg.search_target, SearchEngine::target_lang);
    if (!cfg.cache_dir.empty()) p.cache = std::make_unique<ResponseCache>(cfg.cache_dir);
    p.generation = std::make_unique<Gateway>(*p.generation_chat, p.cache.get(), RetryPolicy{},
                                             cfg.max_concurrency);
    p.judge = std::make_unique<Gateway>(*p.judge_chat, p.cache.get(), RetryPolicy{},
                                        cfg.max_concurrency);
    return p;
}

// resolve env-var preconditions before any network call
void check_auth_env(const RunConfig& cfg) {
    if (cfg.mock) return;
    for (const ProviderConfig* pc :
         {&cfg.generation, &cfg.judge, &cfg.embedding, &cfg.search_source, &cfg.search_target}) {
        if (pc->provider == "http" && !pc->auth_env.empty() && !std::getenv(pc->auth_env.c_str()))
            config_error("auth env var not set: " + pc->auth_env);
    }
}

std::vector<std::string> select_stories(const Corpus& corpus,
                                        const std::vector<std::string>& requested,
                                        bool annotated_only) {
    std::vector<std::string> out;
    if (!requested.empty()) {
        for (const std::string& sid : requested)
            if (!corpus.stories.count(sid)) throw std::invalid_argument("unknown story id: " + sid);
        out = requested;
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    if (annotated_only) {
        std::set<std::string> ids;
        for (const AlignedTerm& at : corpus.aligned_terms) ids.insert(at.story_id);
        return {ids.begin(), ids.end()};
    }
    for (const auto& [id, story] : corpus.stories) out.push_back(id);
    return out;
}

std::map<std::string, std::vector<std::string>> gold_by_story(
    const Corpus& corpus, const std::vector<std::string>& stories) {
    std::map<std::string, std::vector<std::string>> gold;
    std::set<std::string> wanted(stories.begin(), stories.end());
    for (const std::string& sid : stories) gold[sid];
    for (const AlignedTerm& at : corpus.aligned_terms)
        if (wanted.count(at.story_id)) gold[at.story_id].push_back(at.term);
    return gold;
}

std::string to_jsonl(const std::vector<ordered_json>& records) {
    std::string out;
    for (const ordered_json& r : records) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

struct RunClock {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    std::string started_at = iso8601_utc_now();
    void finish(RunManifest& manifest) const {
        manifest.started_at = started_at;
        manifest.finished_at = iso8601_utc_now();
        manifest.duration_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - t0)
                                   .count();
    }
};

RunManifest base_manifest(const std::string& command, const RunConfig& cfg) {
    RunManifest manifest;
    manifest.command = command;
    manifest.config_snapshot = config_snapshot(cfg);
    manifest.dataset_digest = cfg.dataset_root.empty() ? "" : dataset_digest(cfg.dataset_root);
    manifest.items = ordered_json::array();
    return manifest;
}

void add_gateway_stats(RunManifest& manifest, const Providers& providers) {
    manifest.cache_hits = providers.generation->stats().cache_hits.load() +
                          providers.judge->stats().cache_hits.load();
    manifest.provider_calls = providers.generation->stats().provider_calls.load() +
                              providers.judge->stats().provider_calls.load();
}

int exit_for_failures(std::size_t failures, std::size_t items) {
    // more than half the work items failing means the run is unusable
    return failures * 2 > items ? kExitData : kExitOk;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg) {
    Corpus corpus = load_corpus(require_dataset(cfg));
    std::vector<Violation> violations = validate(corpus);
    std::size_t fatal = 0;
    for (const Violation& v : violations) {
        if (v.fatal) ++fatal;
        std::cout << (v.fatal ? "FATAL " : "WARN  ") << v.code << " at " << v.location << ": "
                  << v.detail << "\n";
    }
    for (const Violation& w : corpus.load_warnings)
        std::cout << "LOAD  " << w.code << " at " << w.location << ": " << w.detail << "\n";
    std::cout << violations.size() << " violation(s), " << fatal << " fatal; "
              << corpus.load_warnings.size() << " load warning(s)\n";

    ordered_json j;
    j["violations"] = ordered_json::array();
    for (const Violation& v : violations)
        j["violations"].push_back({{"code", v.code},
                                   {"location", v.location},
                                   {"detail", v.detail},
                                   {"fatal", v.fatal}});
    j["load_warnings"] = ordered_json::array();
    for (const Violation& w : corpus.load_warnings)
        j["load_warnings"].push_back(
            {{"code", w.code}, {"location", w.location}, {"detail", w.detail}});
    j["fatal_count"] = fatal;
    write_file(cfg.output_dir / "validate.json", j.dump(2) + "\n");
    return fatal ? kExitData : kExitOk;
}

int cmd_stats(const RunConfig& cfg) {
    Corpus corpus = load_corpus(require_dataset(cfg));
    CorpusStats stats = corpus_stats(corpus);
    std::cout << stats_to_markdown(stats);
    write_file(cfg.output_dir / "stats.json", stats_to_json(stats).dump(2) + "\n");
    write_file(cfg.output_dir / "stats.md", stats_to_markdown(stats));
    return kExitOk;
}

int cmd_synth(const CliState& state) {
    if (state.out_dir.empty()) config_error("synth requires --out");
    fixture::Profile profile;
    if (state.profile == "released-stats") profile = fixture::Profile::released_stats;
    else if (state.profile == "small") profile = fixture::Profile::small;
    else if (state.profile == "tiny") profile = fixture::Profile::tiny;
    else config_error("unknown profile '" + state.profile + "'");
    fixture::write_fixture(state.out_dir, profile);
    std::cout << "wrote " << state.profile << " fixture to " << state.out_dir << "\n"
              << "dataset digest: " << dataset_digest(state.out_dir) << "\n";
    return kExitOk;
}

ordered_json provenance_json(const RunConfig& cfg) {
    return {{"variant", to_string(cfg.variant)},
            {"mode", to_string(cfg.mode)},
            {"model_id", cfg.generation.model_id}};
}

int cmd_identify(const RunConfig& cfg, const CliState& state) {
    Corpus corpus = load_corpus(require_dataset(cfg));
    check_auth_env(cfg);
    Providers providers = make_providers(cfg);
    PipelineConfig pcfg{cfg.generation.model_id, cfg.max_tokens};
    std::vector<std::string> stories = select_stories(corpus, state.stories, true);

    RunClock clock;
    RunManifest manifest = base_manifest("identify", cfg);
    std::vector<ordered_json> records;
    std::map<std::string, std::vector<std::string>> predictions;
    std::size_t failures = 0;
    for (const std::string& sid : stories) {
        ordered_json rec;
        rec["story_id"] = sid;
        bool cached = false, failed = false;
        try {
            IdentificationResult r =
                identify_terms(corpus.stories.at(sid), cfg.variant, cfg.mode,
                               *providers.generation, pcfg);
            rec["terms"] = r.terms;
            const ordered_json prov = provenance_json(cfg);
            for (const auto& [k, v] : prov.items()) rec[k] = v;
            rec["cached"] = cached = r.cached;
            predictions[sid] = r.terms;
        } catch (const GatewayError& e) {
            failed = true;
            ++failures;
            rec["failed"] = true;
            rec["error"] = e.what();
        }
        records.push_back(std::move(rec));
        manifest.items.push_back(
            {{"story_id", sid}, {"cached", cached}, {"failed", failed}});
    }

    IdentificationScore score = score_identification(predictions, gold_by_story(corpus, stories));
    write_file(cfg.output_dir / "identify.jsonl", to_jsonl(records));
    write_file(cfg.output_dir / "identify_score.json",
               identification_score_to_json(score).dump(2) + "\n");
    manifest.item_count = records.size();
    manifest.failure_count = failures;
    add_gateway_stats(manifest, providers);
    clock.finish(manifest);
    write_file(cfg.output_dir / "identify_manifest.json",
               manifest_to_json(manifest).dump(2) + "\n");
    std::cout << "identification over " << stories.size() << " stories: P="
              << score.precision * 100.0 << " R=" << score.recall * 100.0
              << " F1=" << score.f1 * 100.0 << " (tp=" << score.tp << " fp=" << score.fp
              << " fn=" << score.fn << ")\n";
    return exit_for_failures(failures, records.size());
}

ScoreOptions score_options(const RunConfig& cfg) {
    ScoreOptions options;
    options.per_story_pool = cfg.per_story_pool;
    options.run_judge = cfg.run_judge;
    options.judge_config.model_id = cfg.judge.model_id;
    return options;
}

ordered_json explicitation_record(const Explicitation& e, const std::string& story_id) {
    ordered_json rec;
    rec["story_id"] = story_id;
    rec["term"] = e.term;
    rec["translated_term"] = e.translated_term;
    rec["description"] = e.description;
    rec["parse_failed"] = e.parse_failed;
    rec["retrieval_used"] = e.retrieval_used;
    rec["retrieval_failed"] = e.retrieval_failed;
    rec["variant"] = to_string(e.provenance.variant);
    rec["mode"] = to_string(e.provenance.mode);
    rec["model_id"] = e.provenance.model_id;
    rec["cached"] = e.cached;
    return rec;
}

int cmd_explicate(const RunConfig& cfg, const CliState& state) {
    Corpus corpus = load_corpus(require_dataset(cfg));
    check_auth_env(cfg);
    Providers providers = make_providers(cfg);
    PipelineConfig pcfg{cfg.generation.model_id, cfg.max_tokens};
    Retriever retriever(*providers.generation, providers.search_source.get(),
                        providers.search_target.get(), RetrievalConfig{},
                        cfg.generation.model_id);
    Retriever* retriever_ptr = cfg.retrieval ? &retriever : nullptr;

    std::set<std::string> wanted(state.stories.begin(), state.stories.end());
    for (const std::string& sid : wanted)
        if (!corpus.stories.count(sid)) throw std::invalid_argument("unknown story id: " + sid);

    RunClock clock;
    RunManifest manifest = base_manifest("explicate", cfg);
    std::vector<ordered_json> records;
    std::vector<ScoredCandidate> candidates;
    std::size_t failures = 0;
    for (const AlignedTerm* at : pooled_terms(corpus)) {
        if (!wanted.empty() && !wanted.count(at->story_id)) continue;
        bool cached = false, failed = false;
        try {
            Explicitation e =
                explicate_term(at->term, corpus.stories.at(at->story_id), cfg.variant, cfg.mode,
                               *providers.generation, retriever_ptr, pcfg);
            records.push_back(explicitation_record(e, at->story_id));
            candidates.push_back({at->story_id, at->term, e.description});
            cached = e.cached;
        } catch (const GatewayError& e) {
            failed = true;
            ++failures;
            ordered_json rec;
            rec["story_id"] = at->story_id;
            rec["term"] = at->term;
            rec["failed"] = true;
            rec["error"] = e.what();
            records.push_back(std::move(rec));
            candidates.push_back({at->story_id, at->term, std::nullopt});
        }
        manifest.items.push_back({{"story_id", at->story_id},
                                  {"term", at->term},
                                  {"cached", cached},
                                  {"failed", failed}});
    }

    ExplicitationScoreReport report = score_explicitations(
        candidates, corpus, providers.embedder.get(),
        cfg.run_judge ? providers.judge.get() : nullptr, score_options(cfg));
    write_file(cfg.output_dir / "explicate.jsonl", to_jsonl(records));
    write_file(cfg.output_dir / "explicate_score.json",
               explicitation_report_to_json(report).dump(2) + "\n");
    std::string md = explicitation_report_to_markdown(report, "Explicitation of gold terms");
    write_file(cfg.output_dir / "explicate_score.md", md);
    manifest.item_count = records.size();
    manifest.failure_count = failures;
    add_gateway_stats(manifest, providers);
    clock.finish(manifest);
    write_file(cfg.output_dir / "explicate_manifest.json",
               manifest_to_json(manifest).dump(2) + "\n");
    std::cout << md;
    return exit_for_failures(failures, records.size());
}

int cmd_e2e(const RunConfig& cfg, const CliState& state) {
    Corpus corpus = load_corpus(require_dataset(cfg));
    check_auth_env(cfg);
    Providers providers = make_providers(cfg);
    PipelineConfig pcfg{cfg.generation.model_id, cfg.max_tokens};
    Retriever retriever(*providers.generation, providers.search_source.get(),
                        providers.search_target.get(), RetrievalConfig{},
                        cfg.generation.model_id);
    Retriever* retriever_ptr = cfg.retrieval ? &retriever : nullptr;
    std::vector<std::string> stories = select_stories(corpus, state.stories, true);

    RunClock clock;
    RunManifest manifest = base_manifest("e2e", cfg);
    std::vector<ordered_json> records;
    std::map<std::string, std::vector<Explicitation>> items_by_story;
    std::map<std::string, std::vector<std::string>> predictions;
    std::set<std::string> failed_stories;
    std::size_t failures = 0;
    for (const std::string& sid : stories) {
        try {
            std::vector<Explicitation> items =
                run_end_to_end(corpus.stories.at(sid), cfg.variant, cfg.mode, cfg.e2e_mode,
                               *providers.generation, retriever_ptr, pcfg);
            predictions[sid] = {};
            for (const Explicitation& e : items) {
                records.push_back(explicitation_record(e, sid));
                if (!e.term.empty()) predictions[sid].push_back(e.term);
                manifest.items.push_back({{"story_id", sid},
                                          {"term", e.term},
                                          {"cached", e.cached},
                                          {"failed", false}});
            }
            items_by_story[sid] = std::move(items);
        } catch (const GatewayError& e) {
            ++failures;
            failed_stories.insert(sid);
            ordered_json rec;
            rec["story_id"] = sid;
            rec["failed"] = true;
            rec["error"] = e.what();
            records.push_back(std::move(rec));
            manifest.items.push_back(
                {{"story_id", sid}, {"term", ""}, {"cached", false}, {"failed", true}});
        }
    }

    // identification quality of the end-to-end term lists
    IdentificationScore id_score =
        score_identification(predictions, gold_by_story(corpus, stories));

    // every pooled gold term gets either its first matching generation or the
    // absent marker (scored as an empty explicitation)
    std::vector<ScoredCandidate> candidates;
    std::set<std::string> wanted(stories.begin(), stories.end());
    for (const AlignedTerm* at : pooled_terms(corpus)) {
        if (!wanted.count(at->story_id)) continue;
        std::optional<std::string> candidate;
        std::string norm_gold = text::normalize_for_match(at->term);
        auto it = items_by_story.find(at->story_id);
        if (it != items_by_story.end() && !norm_gold.empty()) {
            for (const Explicitation& e : it->second) {
                std::string norm_pred = text::normalize_for_match(e.term);
                if (!norm_pred.empty() && partial_match(norm_pred, norm_gold)) {
                    candidate = e.description;
                    break;
                }
            }
        }
        candidates.push_back({at->story_id, at->term, candidate});
    }
    ExplicitationScoreReport report = score_explicitations(
        candidates, corpus, providers.embedder.get(),
        cfg.run_judge ? providers.judge.get() : nullptr, score_options(cfg));

    write_file(cfg.output_dir / "e2e.jsonl", to_jsonl(records));
    write_file(cfg.output_dir / "e2e_identification.json",
               identification_score_to_json(id_score).dump(2) + "\n");
    write_file(cfg.output_dir / "e2e_score.json",
               explicitation_report_to_json(report).dump(2) + "\n");
    std::string md = explicitation_report_to_markdown(
        report, "End-to-end explicitation (" + to_string(cfg.e2e_mode) + ")");
    write_file(cfg.output_dir / "e2e_score.md", md);
    manifest.item_count = stories.size();
    manifest.failure_count = failures;
    add_gateway_stats(manifest, providers);
    clock.finish(manifest);
    write_file(cfg.output_dir / "e2e_manifest.json", manifest_to_json(manifest).dump(2) + "\n");
    std::cout << "identification: F1=" << id_score.f1 * 100.0 << " (tp=" << id_score.tp
              << " fp=" << id_score.fp << " fn=" << id_score.fn << ")\n"
              << md;
    return exit_for_failures(failures, stories.size());
}

int cmd_score(const RunConfig& cfg, const CliState& state) {
    Corpus corpus = load_corpus(require_dataset(cfg));
    if (state.pred_path.empty()) config_error("score requires --pred <file.jsonl>");
    std::ifstream in(state.pred_path, std::ios::binary);
    if (!in) config_error("cannot open predictions file: " + state.pred_path);
    std::vector<nlohmann::json> lines;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            config_error("malformed JSON on line " + std::to_string(line_no) + " of " +
                         state.pred_path);
        lines.push_back(std::move(j));
    }

    if (state.pred_kind == "identify") {
        std::map<std::string, std::vector<std::string>> predictions;
        for (const nlohmann::json& j : lines) {
            if (!j.contains("story_id")) config_error("prediction record without story_id");
            std::string sid = j["story_id"].get<std::string>();
            if (!corpus.stories.count(sid))
                throw std::invalid_argument("unknown story id in predictions: " + sid);
            std::vector<std::string>& terms = predictions[sid];
            if (j.contains("terms"))
                for (const auto& t : j["terms"]) terms.push_back(t.get<std::string>());
        }
        std::vector<std::string> stories;
        std::set<std::string> ids;
        for (const AlignedTerm& at : corpus.aligned_terms) ids.insert(at.story_id);
        for (const auto& [sid, terms] : predictions) ids.insert(sid);
        stories.assign(ids.begin(), ids.end());
        IdentificationScore score =
            score_identification(predictions, gold_by_story(corpus, stories));
        write_file(cfg.output_dir / "score.json",
                   identification_score_to_json(score).dump(2) + "\n");
        std::cout << "identification: P=" << score.precision * 100.0
                  << " R=" << score.recall * 100.0 << " F1=" << score.f1 * 100.0 << "\n";
        return kExitOk;
    }
    if (state.pred_kind == "e2e") {
        check_auth_env(cfg);
        Providers providers = make_providers(cfg);
        // rebuild the end-to-end view from the records: which stories the run
        // covered (failure records still mark coverage) and, per story, the
        // generated (term, description) pairs in generation order
        std::map<std::string, std::vector<std::string>> predictions;
        std::map<std::string, std::vector<std::pair<std::string, std::string>>> generated;
        for (const nlohmann::json& j : lines) {
            if (!j.contains("story_id")) config_error("prediction record without story_id");
            std::string sid = j["story_id"].get<std::string>();
            if (!corpus.stories.count(sid))
                throw std::invalid_argument("unknown story id in predictions: " + sid);
            predictions[sid];
            if (j.value("failed", false)) continue;
            if (!j.contains("term") || !j.contains("description"))
                config_error("end-to-end record without term/description");
            std::string term = j["term"].get<std::string>();
            if (!term.empty()) predictions[sid].push_back(term);
            generated[sid].emplace_back(std::move(term),
                                        j["description"].get<std::string>());
        }
        std::vector<std::string> stories;
        for (const auto& [sid, terms] : predictions) stories.push_back(sid);
        IdentificationScore id_score =
            score_identification(predictions, gold_by_story(corpus, stories));
        // empty-string rule: every pooled gold term of a covered story gets its
        // first matching generation or the absent marker
        std::vector<ScoredCandidate> candidates;
        std::set<std::string> wanted(stories.begin(), stories.end());
        for (const AlignedTerm* at : pooled_terms(corpus)) {
            if (!wanted.count(at->story_id)) continue;
            std::optional<std::string> candidate;
            std::string norm_gold = text::normalize_for_match(at->term);
            auto it = generated.find(at->story_id);
            if (it != generated.end() && !norm_gold.empty()) {
                for (const auto& [term, description] : it->second) {
                    std::string norm_pred = text::normalize_for_match(term);
                    if (!norm_pred.empty() && partial_match(norm_pred, norm_gold)) {
                        candidate = description;
                        break;
                    }
                }
            }
            candidates.push_back({at->story_id, at->term, candidate});
        }
        ExplicitationScoreReport report = score_explicitations(
            candidates, corpus, providers.embedder.get(),
            cfg.run_judge ? providers.judge.get() : nullptr, score_options(cfg));
        write_file(cfg.output_dir / "score_identification.json",
                   identification_score_to_json(id_score).dump(2) + "\n");
        write_file(cfg.output_dir / "score.json",
                   explicitation_report_to_json(report).dump(2) + "\n");
        std::string md =
            explicitation_report_to_markdown(report, "Scored end-to-end predictions");
        write_file(cfg.output_dir / "score.md", md);
        std::cout << "identification: F1=" << id_score.f1 * 100.0 << " (tp=" << id_score.tp
                  << " fp=" << id_score.fp << " fn=" << id_score.fn << ")\n"
                  << md;
        return kExitOk;
    }
    if (state.pred_kind != "explicate")
        config_error("unknown --kind '" + state.pred_kind +
                     "' (identify, explicate, or e2e)");

    check_auth_env(cfg);
    Providers providers = make_providers(cfg);
    std::vector<ScoredCandidate> candidates;
    for (const nlohmann::json& j : lines) {
        if (!j.contains("story_id") || !j.contains("term"))
            config_error("prediction record without story_id/term");
        ScoredCandidate c;
        c.story_id = j["story_id"].get<std::string>();
        c.term = j["term"].get<std::string>();
        if (j.value("absent", false)) {
            candidates.push_back(std::move(c));
            continue;
        }
        if (j.contains("description")) c.candidate = j["description"].get<std::string>();
        else if (j.contains("candidate")) c.candidate = j["candidate"].get<std::string>();
        candidates.push_back(std::move(c));
    }
    ExplicitationScoreReport report = score_explicitations(
        candidates, corpus, providers.embedder.get(),
        cfg.run_judge ? providers.judge.get() : nullptr, score_options(cfg));
    write_file(cfg.output_dir / "score.json",
               explicitation_report_to_json(report).dump(2) + "\n");
    std::string md = explicitation_report_to_markdown(report, "Scored predictions");
    write_file(cfg.output_dir / "score.md", md);
    std::cout << md;
    return kExitOk;
}

int cmd_agree(const RunConfig& cfg) {
    Corpus corpus = load_corpus(require_dataset(cfg));
    check_auth_env(cfg);
    Providers providers = make_providers(cfg);
    AgreementReport report = agreement_report(corpus, providers.embedder.get());
    if (cfg.kappa_all_rows) {
        // documented alternative: missing cells read as explicit zeros
        DecisionMatrix matrix = build_decision_matrix(corpus);
        for (auto& row : matrix.rows)
            for (Cell& cell : row)
                if (cell == Cell::missing) cell = Cell::zero;
        report.pairwise_kappa = pairwise_cohen_kappa(matrix);
    }
    write_file(cfg.output_dir / "agreement.json", agreement_to_json(report).dump(2) + "\n");
    std::string md = agreement_to_markdown(report);
    write_file(cfg.output_dir / "agreement.md", md);
    write_file(cfg.output_dir / "kappa_grid.csv", kappa_grid_csv(report));
    std::cout << md;
    return kExitOk;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"pipeline and evaluation harness for paratextual explicitation in literary "
                 "translation"};
    app.require_subcommand(1);
    CliState state;

    auto add_common = [&](CLI::App* sub, bool with_pipeline) {
        sub->add_option("--config", state.config_path, "JSON run-configuration file");
        sub->add_option("--data", state.data_root, "dataset root directory");
        sub->add_option("--out", state.out_dir, "output directory (default: out)");
        sub->add_flag("--mock", state.mock, "use deterministic mock providers");
        if (with_pipeline) {
            sub->add_option("--cache", state.cache_dir, "response cache directory");
            sub->add_option("--variant", state.variant,
                            "prompt variant: default | theoretical | practical");
            sub->add_option("--mode", state.mode, "inference mode: thinking | non-thinking");
            sub->add_option("--max-tokens", state.max_tokens, "generation token budget");
            sub->add_option("--concurrency", state.concurrency, "max in-flight provider calls");
        }
    };

    CLI::App* validate_cmd = app.add_subcommand("validate", "check every dataset invariant");
    add_common(validate_cmd, false);
    CLI::App* stats_cmd = app.add_subcommand("stats", "corpus statistics");
    add_common(stats_cmd, false);

    CLI::App* identify_cmd =
        app.add_subcommand("identify", "run term identification over annotated stories");
    add_common(identify_cmd, true);
    identify_cmd->add_option("--story", state.stories, "restrict to a story id (repeatable)");

    CLI::App* explicate_cmd =
        app.add_subcommand("explicate", "explicate the pooled gold terms");
    add_common(explicate_cmd, true);
    explicate_cmd->add_option("--story", state.stories, "restrict to a story id (repeatable)");
    explicate_cmd->add_flag("--retrieval", state.retrieval, "agentic bilingual retrieval");
    explicate_cmd->add_flag("--judge", state.run_judge, "run the LLM judge");
    explicate_cmd->add_flag("--story-pool", state.per_story_pool,
                            "score against per-story reference pools");

    CLI::App* e2e_cmd = app.add_subcommand("e2e", "identification followed by explicitation");
    add_common(e2e_cmd, true);
    e2e_cmd->add_option("--story", state.stories, "restrict to a story id (repeatable)");
    e2e_cmd->add_option("--e2e-mode", state.e2e_mode, "sequential | single-pass");
    e2e_cmd->add_flag("--retrieval", state.retrieval,
                      "agentic bilingual retrieval (sequential mode only)");
    e2e_cmd->add_flag("--judge", state.run_judge, "run the LLM judge");
    e2e_cmd->add_flag("--story-pool", state.per_story_pool,
                      "score against per-story reference pools");

    CLI::App* score_cmd = app.add_subcommand("score", "score a predictions JSONL offline");
    add_common(score_cmd, true);
    score_cmd->add_option("--pred", state.pred_path, "predictions file (JSONL)")->required();
    score_cmd->add_option("--kind", state.pred_kind, "identify | explicate | e2e");
    score_cmd->add_flag("--judge", state.run_judge, "run the LLM judge");
    score_cmd->add_flag("--story-pool", state.per_story_pool,
                        "score against per-story reference pools");

    CLI::App* agree_cmd = app.add_subcommand("agree", "annotator agreement report");
    add_common(agree_cmd, false);
    agree_cmd->add_flag("--kappa-all-rows", state.kappa_all_rows,
                        "kappa over all rows, missing cells as zeros");

    CLI::App* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset fixture");
    synth_cmd->add_option("--profile", state.profile, "released-stats | small | tiny");
    synth_cmd->add_option("--out", state.out_dir, "target directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(state);
        RunConfig cfg = resolve_config(state);
        if (validate_cmd->parsed()) return cmd_validate(cfg);
        if (stats_cmd->parsed()) return cmd_stats(cfg);
        if (identify_cmd->parsed()) return cmd_identify(cfg, state);
        if (explicate_cmd->parsed()) return cmd_explicate(cfg, state);
        if (e2e_cmd->parsed()) return cmd_e2e(cfg, state);
        if (score_cmd->parsed()) return cmd_score(cfg, state);
        if (agree_cmd->parsed()) return cmd_agree(cfg);
        std::cerr << "error: no command\n";
        return kExitConfig;
    } catch (const LoadError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const InsufficientData& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::out_of_range& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const GatewayError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

}  // namespace paratext
