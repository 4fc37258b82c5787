#include "paratext/agreement.hpp"

#include <algorithm>
#include <cmath>

#include "paratext/text.hpp"

namespace paratext {

DecisionMatrix build_decision_matrix(const Corpus& corpus) {
    DecisionMatrix matrix;
    matrix.columns.assign(kEvaluatedTranslators.begin(), kEvaluatedTranslators.end());
    for (const AlignedTerm& at : corpus.aligned_terms) {
        matrix.term_keys.push_back(at.story_id + "/" + at.term);
        std::vector<Cell> row;
        row.reserve(matrix.columns.size());
        for (TranslatorId tr : matrix.columns) {
            auto eit = corpus.editions.find(tr);
            bool translated = eit != corpus.editions.end() &&
                              eit->second.story_ids.count(at.story_id) > 0;
            if (!translated) {
                row.push_back(Cell::missing);
            } else if (at.references.count(tr)) {
                row.push_back(Cell::one);
            } else {
                row.push_back(Cell::zero);
            }
        }
        matrix.rows.push_back(std::move(row));
    }
    return matrix;
}

double krippendorff_alpha(const DecisionMatrix& matrix) {
    // nominal data, coincidence-matrix formulation over categories {0,1}
    double o_mismatch = 0.0;  // sum over c != k of o_ck
    double n0 = 0.0, n1 = 0.0;
    std::size_t usable = 0;
    for (const auto& row : matrix.rows) {
        long ones = 0, zeros = 0;
        for (Cell c : row) {
            if (c == Cell::one) ++ones;
            if (c == Cell::zero) ++zeros;
        }
        long m = ones + zeros;
        if (m < 2) continue;  // rows with fewer than two non-missing cells are dropped
        ++usable;
        n1 += static_cast<double>(ones);
        n0 += static_cast<double>(zeros);
        // ordered mismatching pairs within the unit, weighted by 1/(m-1)
        o_mismatch += 2.0 * static_cast<double>(ones) * static_cast<double>(zeros) /
                      static_cast<double>(m - 1);
    }
    if (usable == 0) throw InsufficientData("insufficient_data: no row has two coders");
    double n = n0 + n1;
    double expected = 2.0 * n0 * n1 / (n - 1.0);  // sum over c != k of n_c n_k / (n-1)
    if (expected == 0.0) return 1.0;              // every value identical: no possible disagreement
    return 1.0 - o_mismatch / expected;
}

namespace {

double cohen_kappa_2x2(long n11, long n10, long n01, long n00) {
    double n = static_cast<double>(n11 + n10 + n01 + n00);
    double po = (static_cast<double>(n11) + static_cast<double>(n00)) / n;
    double px = (static_cast<double>(n11) + static_cast<double>(n10)) / n;
    double py = (static_cast<double>(n11) + static_cast<double>(n01)) / n;
    double pe = px * py + (1.0 - px) * (1.0 - py);
    if (std::abs(1.0 - pe) < 1e-12) return po >= 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
}

}  // namespace

std::map<std::pair<TranslatorId, TranslatorId>, double> pairwise_cohen_kappa(
    const DecisionMatrix& matrix) {
    std::map<std::pair<TranslatorId, TranslatorId>, double> out;
    for (std::size_t a = 0; a < matrix.columns.size(); ++a) {
        for (std::size_t b = a + 1; b < matrix.columns.size(); ++b) {
            long n11 = 0, n10 = 0, n01 = 0, n00 = 0;
            for (const auto& row : matrix.rows) {
                Cell ca = row[a], cb = row[b];
                if (ca == Cell::missing || cb == Cell::missing) continue;
                bool va = ca == Cell::one, vb = cb == Cell::one;
                if (va && vb) ++n11;
                else if (va) ++n10;
                else if (vb) ++n01;
                else ++n00;
            }
            if (n11 + n10 + n01 + n00 == 0) continue;  // no overlap: pair absent
            out[{matrix.columns[a], matrix.columns[b]}] = cohen_kappa_2x2(n11, n10, n01, n00);
        }
    }
    return out;
}

IdentificationScore translator_f1(const Corpus& corpus, TranslatorId translator) {
    auto eit = corpus.editions.find(translator);
    const std::set<std::string>* covered =
        eit != corpus.editions.end() ? &eit->second.story_ids : nullptr;

    std::map<std::string, std::vector<std::string>> predictions;
    std::map<std::string, std::vector<std::string>> gold;
    for (const AlignedTerm& at : corpus.aligned_terms) {
        if (!covered || !covered->count(at.story_id)) continue;  // restrict to covered stories
        gold[at.story_id];  // ensure every covered annotated story is a gold key
        bool by_translator = at.references.count(translator) > 0;
        bool by_others = false;
        for (const auto& [tr, notes] : at.references)
            if (tr != translator) by_others = true;
        if (by_translator) predictions[at.story_id].push_back(at.term);
        if (by_others) gold[at.story_id].push_back(at.term);
    }
    return score_identification(predictions, gold);
}

std::map<int, ConsensusBucket> consensus_distribution(
    const Corpus& corpus,
    const std::optional<std::map<std::string, std::vector<std::string>>>& predictions) {
    std::map<int, ConsensusBucket> out;
    // normalize predictions once per story
    std::map<std::string, std::vector<std::string>> norm_preds;
    if (predictions) {
        for (const auto& [sid, preds] : *predictions) {
            for (const std::string& p : preds) {
                std::string n = text::normalize_for_match(p);
                if (!n.empty()) norm_preds[sid].push_back(std::move(n));
            }
        }
    }
    for (const AlignedTerm& at : corpus.aligned_terms) {
        int level = static_cast<int>(at.consensus_level());
        ConsensusBucket& bucket = out[level];
        bucket.term_count += 1;
        if (predictions) {
            if (!bucket.identified_count) bucket.identified_count = 0;
            std::string gn = text::normalize_for_match(at.term);
            auto pit = norm_preds.find(at.story_id);
            if (pit != norm_preds.end()) {
                for (const std::string& p : pit->second) {
                    if (partial_match(p, gn)) {
                        *bucket.identified_count += 1;
                        break;
                    }
                }
            }
        }
    }
    return out;
}

PairwiseSimilarity pairwise_translator_similarity(const Corpus& corpus,
                                                  EmbeddingProvider* embedder) {
    PairwiseSimilarity sim;
    double sum_bleu = 0.0, sum_sem = 0.0;
    for (const AlignedTerm& at : corpus.aligned_terms) {
        if (at.consensus_level() < 2) continue;
        sim.term_keys.push_back(at.story_id + "/" + at.term);
        // one co-reference entry per (translator, note)
        std::vector<std::pair<TranslatorId, const Paratext*>> entries;
        for (const auto& [tr, notes] : at.references)
            for (const Paratext& p : notes) entries.emplace_back(tr, &p);
        for (std::size_t i = 0; i < entries.size(); ++i) {
            for (std::size_t j = 0; j < entries.size(); ++j) {
                if (i == j) continue;
                if (entries[i].first == entries[j].first) continue;  // co-references only
                const std::string& cand = entries[i].second->body;
                const std::vector<std::string> refs = {entries[j].second->body};
                sum_bleu += bleu(cand, refs);
                if (embedder) {
                    SemanticScore s = semantic_score(cand, refs, *embedder);
                    sum_sem += std::clamp(s.f1, 0.0, 1.0);
                }
                ++sim.ordered_pair_count;
            }
        }
    }
    if (sim.ordered_pair_count > 0) {
        sum_bleu /= static_cast<double>(sim.ordered_pair_count);
        sum_sem /= static_cast<double>(sim.ordered_pair_count);
        sim.bidirectional_bleu = sum_bleu;
        sim.semantic_f1 = embedder ? sum_sem : 0.0;
    }
    return sim;
}

AgreementReport agreement_report(const Corpus& corpus, EmbeddingProvider* embedder) {
    AgreementReport report;
    DecisionMatrix matrix = build_decision_matrix(corpus);
    report.krippendorff_alpha = krippendorff_alpha(matrix);
    report.pairwise_kappa = pairwise_cohen_kappa(matrix);
    for (TranslatorId tr : kEvaluatedTranslators)
        report.translator_f1[tr] = translator_f1(corpus, tr).f1 * 100.0;
    report.consensus = consensus_distribution(corpus);
    report.similarity = pairwise_translator_similarity(corpus, embedder);
    return report;
}

}  // namespace paratext
