#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paratext/corpus.hpp"
#include "paratext/llm.hpp"
#include "paratext/prompts.hpp"
#include "paratext/retrieval.hpp"

namespace paratext {

struct Provenance {
    PromptVariant variant = PromptVariant::default_;
    Mode mode = Mode::non_thinking;
    std::string model_id;
};

struct IdentificationResult {
    std::string story_id;
    std::vector<std::string> terms;  // deduplicated, order of first occurrence
    Provenance provenance;
    std::string raw_response;
    std::optional<std::string> reasoning_trace;
    bool cached = false;
};

// Split on ASCII/fullwidth/ideographic commas, list bullets, and newlines;
// trim whitespace, surrounding quotes, and enumeration prefixes; drop empties;
// dedup keeping first occurrence. Idempotent on its own joined output.
std::vector<std::string> parse_term_list(std::string_view raw);

struct Explicitation {
    std::string term;
    std::string translated_term;
    std::string description;
    bool retrieval_used = false;
    bool retrieval_failed = false;  // degraded to no-context generation
    bool parse_failed = false;
    std::string raw_response;
    std::optional<std::string> reasoning_trace;
    Provenance provenance;
    bool cached = false;
};

// Split at the first colon (ASCII or fullwidth) outside an enclosing quote
// pair; strip markdown emphasis; keep the raw text on failure.
Explicitation parse_explicitation(std::string_view raw);

enum class E2EMode { sequential, single_pass };
std::string to_string(E2EMode m);
std::optional<E2EMode> e2e_mode_from_string(const std::string& s);

struct PipelineConfig {
    std::string model_id = "generator";
    std::optional<int> max_tokens;  // overrides the sampling default when set
};

IdentificationResult identify_terms(const Story& story, PromptVariant variant, Mode mode,
                                    Gateway& gateway, const PipelineConfig& config = {});

Explicitation explicate_term(const std::string& term, const Story& story, PromptVariant variant,
                             Mode mode, Gateway& gateway, Retriever* retriever = nullptr,
                             const PipelineConfig& config = {});

// Sequential: identify then explicate each term. Single pass: one generation
// parsed as "term — translated_term: description" blocks. Per-term parse
// failures are recorded, never fatal. Retrieval is per-term and therefore only
// participates in sequential mode.
std::vector<Explicitation> run_end_to_end(const Story& story, PromptVariant variant, Mode mode,
                                          E2EMode e2e_mode, Gateway& gateway,
                                          Retriever* retriever = nullptr,
                                          const PipelineConfig& config = {});

}  // namespace paratext
