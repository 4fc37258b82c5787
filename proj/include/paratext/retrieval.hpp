#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "paratext/corpus.hpp"
#include "paratext/llm.hpp"
#include "paratext/prompts.hpp"

namespace paratext {

class Gateway;

enum class SearchEngine { source_lang, target_lang };
std::string to_string(SearchEngine e);

struct SearchResult {
    SearchEngine engine = SearchEngine::source_lang;
    std::string title;
    std::string snippet;
    std::string url;
    int rank = 1;  // unique per (engine, query)
};

struct RetrievalContext {
    std::string term;
    std::vector<std::string> candidate_translations;
    std::vector<std::string> extracted_passages;
    std::vector<SearchResult> source_results;
    std::string trace;  // JSON-lines agent log: queries, result counts, flags
    bool partial_failure = false;
    bool truncated_input = false;
    bool synthesized = false;  // passages not verbatim from any snippet
};

struct RetrievalError : std::runtime_error {
    std::string code;
    RetrievalError(std::string code_, const std::string& what)
        : std::runtime_error(what), code(std::move(code_)) {}
};

class SearchProvider {
  public:
    virtual ~SearchProvider() = default;
    virtual std::string name() const = 0;
    // Top-k results for a query, rank ascending. Throws on failure.
    virtual std::vector<SearchResult> search(const std::string& query, int k) = 0;
};

// Deterministic mock engine: results derive from a hash of (engine, query).
class MockSearchProvider : public SearchProvider {
  public:
    explicit MockSearchProvider(SearchEngine engine) : engine_(engine) {}
    std::string name() const override { return "mock-" + to_string(engine_); }
    std::vector<SearchResult> search(const std::string& query, int k) override;

  private:
    SearchEngine engine_;
};

struct RetrievalConfig {
    int results_per_query = 5;
    std::size_t snippet_budget = 500;    // characters per snippet
    std::size_t context_budget = 4000;   // characters across extracted passages
};

// Agentic bilingual retrieval: candidate translations -> source+target search
// -> LLM extraction of relevant passages, with a full trace. Gold reference
// paratexts are never an input, so they cannot leak into the context.
class Retriever {
  public:
    Retriever(Gateway& gateway, SearchProvider* source_engine, SearchProvider* target_engine,
              RetrievalConfig config = {}, std::string model_id = "generator");

    std::vector<std::string> generate_candidate_translations(const std::string& term,
                                                             const Story& story);
    std::vector<SearchResult> search_bilingual(const std::string& term,
                                               const std::vector<std::string>& candidates,
                                               bool* partial_failure = nullptr);
    RetrievalContext extract_relevant(const std::string& term, const Story& story,
                                      const std::vector<SearchResult>& results);
    RetrievalContext retrieve(const std::string& term, const Story& story);

    const RetrievalConfig& config() const { return config_; }

  private:
    Gateway& gateway_;
    SearchProvider* source_engine_;
    SearchProvider* target_engine_;
    RetrievalConfig config_;
    std::string model_id_;
};

// Render a context block for inclusion as a prompt turn.
std::string context_block(const RetrievalContext& context);

}  // namespace paratext
