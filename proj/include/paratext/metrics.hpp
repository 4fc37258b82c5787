#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paratext/corpus.hpp"
#include "paratext/llm.hpp"

namespace paratext {

// Partial substring matching: true iff one string contains the other as a
// contiguous codepoint substring. Inputs are expected normalized
// (see text::normalize_for_match); empty strings never match.
bool partial_match(std::string_view prediction, std::string_view gold);

struct IdentificationScore {
    long tp = 0;
    long fp = 0;
    long fn = 0;
    double precision = 0.0;  // in [0,1]
    double recall = 0.0;
    double f1 = 0.0;

    static IdentificationScore from_counts(long tp, long fp, long fn);
};

// Story-keyed scoring with within-story partial matching. TP counts gold terms
// matched by >=1 prediction; FP counts per-story-deduplicated predictions that
// match no gold term. A prediction story missing from gold is an error.
IdentificationScore score_identification(
    const std::map<std::string, std::vector<std::string>>& predictions,
    const std::map<std::string, std::vector<std::string>>& gold);

struct BleuConfig {
    int max_order = 4;
    double epsilon = 1e-3;  // additive smoothing applied only to zero-count orders
};

// Sentence BLEU x100: clipped n-gram counts against the union of references,
// brevity penalty against the closest-length reference (ties break shorter),
// orders longer than the candidate are skipped.
double bleu(const std::string& candidate, const std::vector<std::string>& references,
            const BleuConfig& config = {});

// LCS F-measure (beta = 1) per reference, max over references.
double rouge_l(const std::string& candidate, const std::vector<std::string>& references);

struct SemanticScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// BERTScore-style greedy token-cosine matching against each reference, best
// reference by F1; no baseline rescaling. Raw cosines may be negative; the
// reporting layer clamps to [0,1].
SemanticScore semantic_score(const std::string& candidate,
                             const std::vector<std::string>& references,
                             EmbeddingProvider& embedder);

struct JudgeVerdict {
    int score = 0;  // in [0,100]
    std::string raw;
    int parse_retries = 0;
    bool parse_failed = false;
};

class Gateway;

struct JudgeConfig {
    std::string model_id = "judge";
    Mode mode = Mode::non_thinking;
};

// Rubric prompt (accuracy and clarity, 0-100); first integer in the reply is
// the score; one retry on parse failure, then 0 with the failure flag.
JudgeVerdict judge(const std::string& term, const std::string& candidate,
                   const std::vector<std::string>& references, Gateway& gateway,
                   const JudgeConfig& config = {});

// A candidate explicitation for one pooled term; absent means the pipeline
// never produced one (end-to-end empty-string rule, all metrics 0).
struct ScoredCandidate {
    std::string story_id;
    std::string term;
    std::optional<std::string> candidate;
};

struct TextScoreRow {
    std::string story_id;
    std::string term;
    Subsystem subsystem = Subsystem::supplementary;
    bool absent = false;
    double bleu = 0.0;
    double rouge_l = 0.0;
    double semantic = 0.0;            // clamped to [0,1]
    std::optional<int> judge;         // absent when judging disabled
    bool semantic_skipped = false;
    bool judge_parse_failed = false;
};

struct TextScoreAggregate {
    double bleu = 0.0;
    double rouge_l = 0.0;
    double semantic = 0.0;
    std::optional<double> judge;
    std::size_t item_count = 0;
    std::size_t absent_count = 0;
};

struct ExplicitationScoreReport {
    std::vector<TextScoreRow> rows;
    TextScoreAggregate aggregate;
    std::map<Subsystem, TextScoreAggregate> by_subsystem;
    bool per_story_pool = false;
};

struct ScoreOptions {
    bool per_story_pool = false;   // pool references per story instead of per term
    bool run_judge = false;
    JudgeConfig judge_config;
};

// Score candidates against each term's reference pool (all translator paratext
// bodies); aggregate = arithmetic mean over items. Unknown terms are an error.
ExplicitationScoreReport score_explicitations(const std::vector<ScoredCandidate>& records,
                                              const Corpus& corpus,
                                              EmbeddingProvider* embedder = nullptr,
                                              Gateway* judge_gateway = nullptr,
                                              const ScoreOptions& options = {});

}  // namespace paratext
