#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paratext/corpus.hpp"
#include "paratext/llm.hpp"
#include "paratext/metrics.hpp"

namespace paratext {

enum class Cell : int { missing = -1, zero = 0, one = 1 };

// Terms x evaluated-translators grid over {missing, 0, 1}: missing iff the
// translator did not translate the term's story, 1 iff they annotated the term.
struct DecisionMatrix {
    std::vector<std::string> term_keys;  // "story_id/term"
    std::vector<TranslatorId> columns;
    std::vector<std::vector<Cell>> rows;
};

DecisionMatrix build_decision_matrix(const Corpus& corpus);

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Nominal Krippendorff's alpha via the coincidence-matrix formulation; rows
// with fewer than two non-missing cells are dropped; no usable rows throws.
double krippendorff_alpha(const DecisionMatrix& matrix);

// Pairwise Cohen's kappa over rows where both columns are non-missing (the
// overlapping-stories restriction). Pairs with no overlap are absent.
std::map<std::pair<TranslatorId, TranslatorId>, double> pairwise_cohen_kappa(
    const DecisionMatrix& matrix);

// One translator's annotations as predictions against the pooled terms of the
// other three, restricted to stories the translator covered; partial matching
// through the same code path as score_identification.
IdentificationScore translator_f1(const Corpus& corpus, TranslatorId translator);

struct ConsensusBucket {
    std::size_t term_count = 0;
    std::optional<std::size_t> identified_count;  // when predictions supplied
};

// Terms bucketed by the number of annotating translators (1..4); with
// predictions, adds how many bucket terms at least one prediction matched.
std::map<int, ConsensusBucket> consensus_distribution(
    const Corpus& corpus,
    const std::optional<std::map<std::string, std::vector<std::string>>>& predictions = {});

struct PairwiseSimilarity {
    double bidirectional_bleu = 0.0;
    double semantic_f1 = 0.0;
    std::size_t ordered_pair_count = 0;
    std::vector<std::string> term_keys;  // the multi-annotated terms that participate
};

// Over terms with co-references from >=2 translators, score every ordered pair
// of co-reference bodies (candidate vs reference) and average.
PairwiseSimilarity pairwise_translator_similarity(const Corpus& corpus,
                                                  EmbeddingProvider* embedder = nullptr);

struct AgreementReport {
    double krippendorff_alpha = 0.0;
    std::map<std::pair<TranslatorId, TranslatorId>, double> pairwise_kappa;
    std::map<TranslatorId, double> translator_f1;  // percent
    std::map<int, ConsensusBucket> consensus;
    PairwiseSimilarity similarity;
};

AgreementReport agreement_report(const Corpus& corpus, EmbeddingProvider* embedder = nullptr);

}  // namespace paratext
