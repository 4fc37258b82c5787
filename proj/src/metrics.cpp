#include "paratext/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include "paratext/prompts.hpp"
#include "paratext/text.hpp"

namespace paratext {

bool partial_match(std::string_view prediction, std::string_view gold) {
    if (prediction.empty() || gold.empty()) return false;
    return text::contains_codepoints(gold, prediction) ||
           text::contains_codepoints(prediction, gold);
}

IdentificationScore IdentificationScore::from_counts(long tp, long fp, long fn) {
    IdentificationScore s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    s.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

IdentificationScore score_identification(
    const std::map<std::string, std::vector<std::string>>& predictions,
    const std::map<std::string, std::vector<std::string>>& gold) {
    for (const auto& [story_id, preds] : predictions) {
        if (!gold.count(story_id))
            throw std::invalid_argument("predictions reference a story absent from the gold set: " +
                                        story_id);
    }
    long tp = 0, fp = 0, fn = 0;
    for (const auto& [story_id, gold_terms] : gold) {
        // normalized, per-story-deduplicated predictions
        std::vector<std::string> preds;
        {
            std::set<std::string> seen;
            auto pit = predictions.find(story_id);
            if (pit != predictions.end()) {
                for (const std::string& p : pit->second) {
                    std::string norm = text::normalize_for_match(p);
                    if (norm.empty()) continue;
                    if (seen.insert(norm).second) preds.push_back(std::move(norm));
                }
            }
        }
        std::vector<bool> pred_hit(preds.size(), false);
        for (const std::string& g : gold_terms) {
            std::string gn = text::normalize_for_match(g);
            bool matched = false;
            for (std::size_t i = 0; i < preds.size(); ++i) {
                if (partial_match(preds[i], gn)) {
                    matched = true;
                    pred_hit[i] = true;
                }
            }
            if (matched)
                ++tp;  // gold-side counting: each gold term at most once
            else
                ++fn;
        }
        for (std::size_t i = 0; i < preds.size(); ++i)
            if (!pred_hit[i]) ++fp;
    }
    return IdentificationScore::from_counts(tp, fp, fn);
}

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

namespace {

std::map<std::vector<std::string>, long> ngram_counts(const std::vector<std::string>& tokens,
                                                      int n) {
    std::map<std::vector<std::string>, long> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::vector<std::string> gram(tokens.begin() + static_cast<long>(i),
                                      tokens.begin() + static_cast<long>(i) + n);
        counts[gram] += 1;
    }
    return counts;
}

}  // namespace

double bleu(const std::string& candidate, const std::vector<std::string>& references,
            const BleuConfig& config) {
    if (references.empty()) throw std::invalid_argument("bleu: references must be non-empty");
    std::vector<std::string> cand = text::tokenize(candidate);
    if (cand.empty()) return 0.0;
    std::vector<std::vector<std::string>> refs;
    refs.reserve(references.size());
    for (const std::string& r : references) refs.push_back(text::tokenize(r));

    double log_sum = 0.0;
    int used_orders = 0;
    for (int n = 1; n <= config.max_order; ++n) {
        long total = static_cast<long>(cand.size()) - n + 1;
        if (total <= 0) continue;  // candidate shorter than this order
        auto cand_counts = ngram_counts(cand, n);
        // clip against the union of references (max count over refs per gram)
        std::map<std::vector<std::string>, long> clip;
        for (const auto& rt : refs) {
            for (const auto& [gram, cnt] : ngram_counts(rt, n)) {
                long& c = clip[gram];
                c = std::max(c, cnt);
            }
        }
        long matched = 0;
        for (const auto& [gram, cnt] : cand_counts) {
            auto it = clip.find(gram);
            if (it != clip.end()) matched += std::min(cnt, it->second);
        }
        double p = matched > 0
                       ? static_cast<double>(matched) / static_cast<double>(total)
                       : config.epsilon / (static_cast<double>(total) + config.epsilon);
        log_sum += std::log(p);
        ++used_orders;
    }
    if (used_orders == 0) return 0.0;

    // brevity penalty vs the closest-length reference, ties to the shorter
    long cand_len = static_cast<long>(cand.size());
    long best_ref_len = -1;
    for (const auto& rt : refs) {
        long rl = static_cast<long>(rt.size());
        if (best_ref_len < 0 || std::llabs(rl - cand_len) < std::llabs(best_ref_len - cand_len) ||
            (std::llabs(rl - cand_len) == std::llabs(best_ref_len - cand_len) &&
             rl < best_ref_len))
            best_ref_len = rl;
    }
    double bp = 1.0;
    if (cand_len < best_ref_len && cand_len > 0)
        bp = std::exp(1.0 - static_cast<double>(best_ref_len) / static_cast<double>(cand_len));
    return 100.0 * bp * std::exp(log_sum / used_orders);
}

// ---------------------------------------------------------------------------
// ROUGE-L
// ---------------------------------------------------------------------------

double rouge_l(const std::string& candidate, const std::vector<std::string>& references) {
    if (references.empty()) throw std::invalid_argument("rouge_l: references must be non-empty");
    std::vector<std::string> cand = text::tokenize(candidate);
    if (cand.empty()) return 0.0;
    double best = 0.0;
    for (const std::string& r : references) {
        std::vector<std::string> ref = text::tokenize(r);
        if (ref.empty()) continue;
        double lcs = static_cast<double>(text::lcs_length(cand, ref));
        if (lcs <= 0.0) continue;
        double p = lcs / static_cast<double>(cand.size());
        double rr = lcs / static_cast<double>(ref.size());
        double f = 2.0 * p * rr / (p + rr);
        best = std::max(best, f);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Semantic (BERTScore-style greedy token matching)
// ---------------------------------------------------------------------------

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

SemanticScore semantic_score(const std::string& candidate,
                             const std::vector<std::string>& references,
                             EmbeddingProvider& embedder) {
    if (references.empty())
        throw std::invalid_argument("semantic_score: references must be non-empty");
    std::vector<std::string> cand_tokens = text::tokenize(candidate);
    if (cand_tokens.empty()) return {};

    // embed each distinct token once
    std::vector<std::string> vocab = cand_tokens;
    std::vector<std::vector<std::string>> ref_tokens;
    for (const std::string& r : references) {
        ref_tokens.push_back(text::tokenize(r));
        vocab.insert(vocab.end(), ref_tokens.back().begin(), ref_tokens.back().end());
    }
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    std::vector<std::vector<double>> vecs = embed(vocab, embedder);
    std::map<std::string, const std::vector<double>*> table;
    for (std::size_t i = 0; i < vocab.size(); ++i) table[vocab[i]] = &vecs[i];

    SemanticScore best;
    bool any = false;
    for (const auto& rt : ref_tokens) {
        if (rt.empty()) continue;
        auto greedy = [&](const std::vector<std::string>& from,
                          const std::vector<std::string>& to) {
            double sum = 0.0;
            for (const std::string& ft : from) {
                double m = -1.0;
                for (const std::string& tt : to) m = std::max(m, cosine(*table[ft], *table[tt]));
                sum += m;
            }
            return sum / static_cast<double>(from.size());
        };
        SemanticScore s;
        s.precision = greedy(cand_tokens, rt);
        s.recall = greedy(rt, cand_tokens);
        s.f1 = (s.precision + s.recall) != 0.0
                   ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                   : 0.0;
        if (!any || s.f1 > best.f1) best = s;
        any = true;
    }
    return best;
}

// ---------------------------------------------------------------------------
// LLM-as-judge
// ---------------------------------------------------------------------------

namespace {

std::optional<int> first_integer(const std::string& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            std::size_t j = i;
            long v = 0;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])) && v < 1000000) {
                v = v * 10 + (s[j] - '0');
                ++j;
            }
            return static_cast<int>(v);
        }
    }
    return std::nullopt;
}

}  // namespace

JudgeVerdict judge(const std::string& term, const std::string& candidate,
                   const std::vector<std::string>& references, Gateway& gateway,
                   const JudgeConfig& config) {
    std::vector<Message> messages = prompts::judge_prompt(term, candidate, references);
    CompletionRequest request;
    request.model_id = config.model_id;
    request.mode = config.mode;
    request.params = SamplingParams::defaults_for(config.mode);
    request.messages = messages;

    JudgeVerdict verdict;
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt == 1) {
            // nudge the retry so the cache does not replay the unparseable reply
            request.messages = messages;
            request.messages.push_back(
                {Role::user, "Answer with a single integer between 0 and 100."});
            verdict.parse_retries = 1;
        }
        CompletionResult result = gateway.complete(request);
        verdict.raw = result.final_text;
        if (auto v = first_integer(result.final_text)) {
            verdict.score = std::clamp(*v, 0, 100);
            return verdict;
        }
    }
    verdict.score = 0;
    verdict.parse_failed = true;
    return verdict;
}

// ---------------------------------------------------------------------------
// Aggregate explicitation scoring
// ---------------------------------------------------------------------------

ExplicitationScoreReport score_explicitations(const std::vector<ScoredCandidate>& records,
                                              const Corpus& corpus, EmbeddingProvider* embedder,
                                              Gateway* judge_gateway,
                                              const ScoreOptions& options) {
    // reference pools
    std::map<std::pair<std::string, std::string>, const AlignedTerm*> by_key;
    std::map<std::string, std::vector<std::string>> story_pool;
    for (const AlignedTerm& at : corpus.aligned_terms) {
        by_key[{at.story_id, at.term}] = &at;
        for (const auto& [tr, notes] : at.references)
            for (const Paratext& p : notes) story_pool[at.story_id].push_back(p.body);
    }

    ExplicitationScoreReport report;
    report.per_story_pool = options.per_story_pool;
    double sum_bleu = 0.0, sum_rouge = 0.0, sum_sem = 0.0, sum_judge = 0.0;
    std::size_t judged = 0;
    std::map<Subsystem, std::vector<const TextScoreRow*>> rows_by_subsystem;

    for (const ScoredCandidate& rec : records) {
        auto it = by_key.find({rec.story_id, rec.term});
        if (it == by_key.end())
            throw std::invalid_argument("unknown term in score_explicitations: " + rec.story_id +
                                        "/" + rec.term);
        const AlignedTerm& at = *it->second;
        std::vector<std::string> refs;
        if (options.per_story_pool) {
            refs = story_pool[at.story_id];
        } else {
            for (const auto& [tr, notes] : at.references)
                for (const Paratext& p : notes) refs.push_back(p.body);
        }

        TextScoreRow row;
        row.story_id = rec.story_id;
        row.term = rec.term;
        row.subsystem = at.subsystem;
        row.absent = !rec.candidate.has_value();
        const std::string candidate = rec.candidate.value_or("");  // empty-string rule
        if (!candidate.empty()) {
            row.bleu = bleu(candidate, refs);
            row.rouge_l = rouge_l(candidate, refs);
            if (embedder) {
                SemanticScore s = semantic_score(candidate, refs, *embedder);
                row.semantic = std::clamp(s.f1, 0.0, 1.0);
            } else {
                row.semantic_skipped = true;
            }
            if (options.run_judge && judge_gateway) {
                JudgeVerdict v =
                    judge(rec.term, candidate, refs, *judge_gateway, options.judge_config);
                row.judge = v.score;
                row.judge_parse_failed = v.parse_failed;
            }
        } else {
            row.semantic_skipped = !embedder;
            if (options.run_judge && judge_gateway) row.judge = 0;
        }
        if (row.absent) ++report.aggregate.absent_count;
        sum_bleu += row.bleu;
        sum_rouge += row.rouge_l;
        sum_sem += row.semantic;
        if (row.judge) {
            sum_judge += *row.judge;
            ++judged;
        }
        report.rows.push_back(std::move(row));
    }

    const std::size_t n = report.rows.size();
    report.aggregate.item_count = n;
    if (n > 0) {
        report.aggregate.bleu = sum_bleu / static_cast<double>(n);
        report.aggregate.rouge_l = sum_rouge / static_cast<double>(n);
        report.aggregate.semantic = sum_sem / static_cast<double>(n);
    }
    if (judged > 0) report.aggregate.judge = sum_judge / static_cast<double>(judged);

    for (const TextScoreRow& row : report.rows) rows_by_subsystem[row.subsystem].push_back(&row);
    for (const auto& [sub, rows] : rows_by_subsystem) {
        TextScoreAggregate agg;
        agg.item_count = rows.size();
        double sb = 0.0, sr = 0.0, ss = 0.0, sj = 0.0;
        std::size_t nj = 0;
        for (const TextScoreRow* r : rows) {
            sb += r->bleu;
            sr += r->rouge_l;
            ss += r->semantic;
            if (r->absent) ++agg.absent_count;
            if (r->judge) {
                sj += *r->judge;
                ++nj;
            }
        }
        agg.bleu = sb / static_cast<double>(rows.size());
        agg.rouge_l = sr / static_cast<double>(rows.size());
        agg.semantic = ss / static_cast<double>(rows.size());
        if (nj > 0) agg.judge = sj / static_cast<double>(nj);
        report.by_subsystem.emplace(sub, agg);
    }
    return report;
}

}  // namespace paratext
