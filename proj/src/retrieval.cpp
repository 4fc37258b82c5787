#include "paratext/retrieval.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "paratext/pipeline.hpp"
#include "paratext/text.hpp"

namespace paratext {

using nlohmann::ordered_json;

std::string to_string(SearchEngine e) {
    return e == SearchEngine::source_lang ? "source" : "target";
}

namespace {

const char* kSnippetTopics[] = {"a ritual term",      "an official title",   "a festival name",
                                "a geographic name",  "a literary allusion", "a kinship term",
                                "an examination rank", "a folk belief"};
const char* kSnippetSources[] = {"a classical dictionary", "a local gazetteer",
                                 "an annotated anthology", "a temple inscription",
                                 "a dynastic history",     "a popular encyclopedia"};

std::string truncate_codepoints(const std::string& s, std::size_t limit) {
    std::vector<char32_t> cps = text::decode_utf8(s);
    if (cps.size() <= limit) return s;
    cps.resize(limit);
    return text::encode_utf8(cps);
}

}  // namespace

std::vector<SearchResult> MockSearchProvider::search(const std::string& query, int k) {
    std::vector<SearchResult> out;
    for (int rank = 1; rank <= k; ++rank) {
        std::uint64_t h = text::stable_hash("search:" + to_string(engine_) + ":" + query + ":" +
                                            std::to_string(rank));
        SearchResult r;
        r.engine = engine_;
        r.rank = rank;
        r.title = query + " — entry " + std::to_string(rank);
        std::ostringstream snippet;
        snippet << query << " is " << kSnippetTopics[h % 8] << " recorded in "
                << kSnippetSources[(h >> 8) % 6] << "; the gloss given there explains it as "
                << kSnippetTopics[(h >> 16) % 8] << " of some local importance.";
        r.snippet = snippet.str();
        r.url = "https://" + to_string(engine_) + ".search.invalid/" +
                text::sha256_hex(r.title).substr(0, 12);
        out.push_back(std::move(r));
    }
    return out;
}

Retriever::Retriever(Gateway& gateway, SearchProvider* source_engine,
                     SearchProvider* target_engine, RetrievalConfig config, std::string model_id)
    : gateway_(gateway),
      source_engine_(source_engine),
      target_engine_(target_engine),
      config_(config),
      model_id_(std::move(model_id)) {}

std::vector<std::string> Retriever::generate_candidate_translations(const std::string& term,
                                                                    const Story& story) {
    CompletionRequest req;
    req.model_id = model_id_;
    req.mode = Mode::non_thinking;
    req.params = SamplingParams::defaults_for(req.mode);
    req.messages = prompts::candidate_translation_prompt(term, story);
    CompletionResult res = gateway_.complete(req);
    std::vector<std::string> candidates = parse_term_list(res.final_text);
    if (candidates.size() > 5) candidates.resize(5);
    return candidates;
}

std::vector<SearchResult> Retriever::search_bilingual(const std::string& term,
                                                      const std::vector<std::string>& candidates,
                                                      bool* partial_failure) {
    std::vector<SearchResult> results;
    bool any_failed = false;
    bool any_succeeded = false;
    auto run = [&](SearchProvider* engine, const std::string& query) {
        if (!engine) return;
        try {
            std::vector<SearchResult> batch = engine->search(query, config_.results_per_query);
            for (SearchResult& r : batch) {
                r.snippet = truncate_codepoints(r.snippet, config_.snippet_budget);
                results.push_back(std::move(r));
            }
            any_succeeded = true;
        } catch (const std::exception&) {
            any_failed = true;
        }
    };
    run(source_engine_, term);
    for (const std::string& candidate : candidates) run(target_engine_, candidate);
    if (partial_failure) *partial_failure = any_failed;
    if (any_failed && !any_succeeded)
        throw RetrievalError("search_failed", "every search engine call failed for: " + term);
    return results;
}

RetrievalContext Retriever::extract_relevant(const std::string& term, const Story& story,
                                             const std::vector<SearchResult>& results) {
    RetrievalContext ctx;
    ctx.term = term;
    ctx.source_results = results;
    if (results.empty()) return ctx;

    // assemble the snippet list, dropping whole lines past the context budget
    std::vector<std::string> lines;
    std::size_t used = 0;
    for (const SearchResult& r : results) {
        std::string line = "- [" + to_string(r.engine) + "] " + r.title + ": " + r.snippet;
        std::size_t cost = text::decode_utf8(line).size() + 1;
        if (used + cost > config_.context_budget) {
            ctx.truncated_input = true;
            break;
        }
        used += cost;
        lines.push_back(std::move(line));
    }
    if (lines.empty()) {
        ctx.truncated_input = true;
        return ctx;
    }
    std::string joined;
    for (const std::string& line : lines) {
        if (!joined.empty()) joined += '\n';
        joined += line;
    }

    CompletionRequest req;
    req.model_id = model_id_;
    req.mode = Mode::non_thinking;
    req.params = SamplingParams::defaults_for(req.mode);
    req.messages = prompts::agentic_extraction_prompt(term, story, joined);
    CompletionResult res = gateway_.complete(req);

    std::istringstream in(res.final_text);
    std::string line;
    while (std::getline(in, line)) {
        std::string passage = text::trim(line);
        if (passage.rfind("- ", 0) == 0) passage = text::trim(passage.substr(2));
        if (passage.empty() || passage == "No relevant passages found.") continue;
        bool verbatim = false;
        for (const SearchResult& r : results) {
            if (r.snippet.find(passage) != std::string::npos ||
                passage.find(r.snippet) != std::string::npos) {
                verbatim = true;
                break;
            }
        }
        if (!verbatim) ctx.synthesized = true;
        ctx.extracted_passages.push_back(std::move(passage));
    }
    return ctx;
}

RetrievalContext Retriever::retrieve(const std::string& term, const Story& story) {
    std::vector<ordered_json> trace;
    std::vector<std::string> candidates;
    bool partial = false;
    try {
        candidates = generate_candidate_translations(term, story);
        trace.push_back({{"step", "candidates"}, {"count", candidates.size()}});
    } catch (const GatewayError& e) {
        partial = true;  // source-language search can still proceed on the term alone
        trace.push_back({{"step", "candidates"}, {"error", e.what()}});
    }

    bool search_partial = false;
    std::vector<SearchResult> results = search_bilingual(term, candidates, &search_partial);
    partial = partial || search_partial;
    trace.push_back({{"step", "search"},
                     {"queries", 1 + candidates.size()},
                     {"results", results.size()},
                     {"partial_failure", search_partial}});

    RetrievalContext ctx = extract_relevant(term, story, results);
    ctx.candidate_translations = candidates;
    ctx.partial_failure = partial;
    trace.push_back({{"step", "extract"},
                     {"passages", ctx.extracted_passages.size()},
                     {"truncated_input", ctx.truncated_input},
                     {"synthesized", ctx.synthesized}});

    std::string log;
    for (const ordered_json& entry : trace) {
        log += entry.dump();
        log += '\n';
    }
    ctx.trace = log;
    return ctx;
}

std::string context_block(const RetrievalContext& context) {
    if (context.extracted_passages.empty()) return {};
    std::string out = "Background information gathered from bilingual web search:";
    for (const std::string& p : context.extracted_passages) out += "\n- " + p;
    return out;
}

}  // namespace paratext
