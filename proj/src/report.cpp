#include "paratext/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace paratext {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v, int precision = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::string pair_key(TranslatorId a, TranslatorId b) {
    return to_string(a) + "/" + to_string(b);
}

ordered_json aggregate_to_json(const TextScoreAggregate& agg) {
    ordered_json j;
    j["bleu"] = agg.bleu;
    j["rouge_l"] = agg.rouge_l;
    j["semantic"] = agg.semantic;
    if (agg.judge) j["judge"] = *agg.judge;
    j["items"] = agg.item_count;
    j["absent"] = agg.absent_count;
    return j;
}

}  // namespace

std::string markdown_table(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) widths[c] = header[c].size();
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    auto emit_row = [&](const std::vector<std::string>& row) {
        std::string line = "|";
        for (std::size_t c = 0; c < widths.size(); ++c) {
            std::string cell = c < row.size() ? row[c] : "";
            cell.resize(std::max(cell.size(), widths[c]), ' ');
            line += " " + cell + " |";
        }
        return line + "\n";
    };
    std::string out = emit_row(header);
    std::string rule = "|";
    for (std::size_t c = 0; c < widths.size(); ++c)
        rule += " " + std::string(widths[c], '-') + " |";
    out += rule + "\n";
    for (const auto& row : rows) out += emit_row(row);
    return out;
}

ordered_json stats_to_json(const CorpusStats& stats) {
    ordered_json j;
    j["stories"] = stats.story_count;
    j["annotated_stories"] = stats.annotated_story_count;
    j["pooled_terms"] = stats.pooled_term_count;
    j["references"] = stats.reference_count;
    j["multi_annotated_terms"] = stats.multi_annotated;
    ordered_json consensus;
    for (const auto& [level, count] : stats.consensus)
        consensus[std::to_string(level)] = count;
    j["consensus"] = std::move(consensus);
    ordered_json editions;
    for (const auto& [tr, es] : stats.editions) {
        editions[to_string(tr)] = {{"stories", es.stories},
                                   {"paratexts", es.paratexts},
                                   {"paratext_tokens", es.paratext_tokens},
                                   {"excluded_from_eval", es.excluded_from_eval}};
    }
    j["editions"] = std::move(editions);
    return j;
}

std::string stats_to_markdown(const CorpusStats& stats) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [tr, es] : stats.editions) {
        rows.push_back({to_string(tr), std::to_string(es.stories), std::to_string(es.paratexts),
                        std::to_string(es.paratext_tokens),
                        es.excluded_from_eval ? "yes" : "no"});
    }
    std::string out = "# Corpus statistics\n\n";
    out += markdown_table({"edition", "stories", "paratexts", "tokens", "excluded"}, rows);
    out += "\n";
    out += "- source stories: " + std::to_string(stats.story_count) + "\n";
    out += "- annotated stories: " + std::to_string(stats.annotated_story_count) + "\n";
    out += "- pooled aligned terms: " + std::to_string(stats.pooled_term_count) + "\n";
    out += "- reference paratexts: " + std::to_string(stats.reference_count) + "\n";
    out += "- multi-annotated terms: " + std::to_string(stats.multi_annotated) + "\n";
    std::string consensus = "- consensus distribution:";
    for (const auto& [level, count] : stats.consensus)
        consensus += " " + std::to_string(level) + "->" + std::to_string(count);
    out += consensus + "\n";
    return out;
}

ordered_json agreement_to_json(const AgreementReport& report) {
    ordered_json j;
    j["krippendorff_alpha"] = report.krippendorff_alpha;
    ordered_json kappa;
    for (const auto& [pair, value] : report.pairwise_kappa)
        kappa[pair_key(pair.first, pair.second)] = value;
    j["pairwise_kappa"] = std::move(kappa);
    ordered_json f1;
    for (const auto& [tr, value] : report.translator_f1) f1[to_string(tr)] = value;
    j["translator_f1_percent"] = std::move(f1);
    ordered_json consensus;
    for (const auto& [level, bucket] : report.consensus) {
        ordered_json b;
        b["terms"] = bucket.term_count;
        if (bucket.identified_count) b["identified"] = *bucket.identified_count;
        consensus[std::to_string(level)] = std::move(b);
    }
    j["consensus"] = std::move(consensus);
    j["similarity"] = {{"bidirectional_bleu", report.similarity.bidirectional_bleu},
                       {"semantic_f1", report.similarity.semantic_f1},
                       {"ordered_pairs", report.similarity.ordered_pair_count},
                       {"terms", report.similarity.term_keys.size()}};
    return j;
}

std::string agreement_to_markdown(const AgreementReport& report) {
    std::string out = "# Annotation agreement\n\n";
    out += "- Krippendorff's alpha (nominal): " + fmt(report.krippendorff_alpha, 4) + "\n";
    out += "- multi-annotated terms: " + std::to_string(report.similarity.term_keys.size()) +
           "\n";
    out += "- bidirectional BLEU over co-references: " +
           fmt(report.similarity.bidirectional_bleu, 2) + " (" +
           std::to_string(report.similarity.ordered_pair_count) + " ordered pairs)\n";
    out += "- semantic F1 over co-references: " + fmt(report.similarity.semantic_f1, 3) + "\n\n";

    out += "## Pairwise Cohen's kappa\n\n";
    std::vector<std::vector<std::string>> krows;
    for (const auto& [pair, value] : report.pairwise_kappa)
        krows.push_back({to_string(pair.first), to_string(pair.second), fmt(value, 4)});
    out += markdown_table({"translator A", "translator B", "kappa"}, krows);

    out += "\n## Translator F1 against peer-pooled terms\n\n";
    std::vector<std::vector<std::string>> frows;
    for (const auto& [tr, value] : report.translator_f1)
        frows.push_back({to_string(tr), fmt(value, 2)});
    out += markdown_table({"translator", "F1 (%)"}, frows);

    out += "\n## Consensus distribution\n\n";
    std::vector<std::vector<std::string>> crows;
    for (const auto& [level, bucket] : report.consensus) {
        std::string identified =
            bucket.identified_count ? std::to_string(*bucket.identified_count) : "-";
        crows.push_back({std::to_string(level), std::to_string(bucket.term_count), identified});
    }
    out += markdown_table({"annotators", "terms", "identified"}, crows);
    return out;
}

std::string kappa_grid_csv(const AgreementReport& report) {
    std::string out = "translator";
    for (TranslatorId tr : kEvaluatedTranslators) out += "," + to_string(tr);
    out += "\n";
    auto lookup = [&](TranslatorId a, TranslatorId b) -> std::string {
        if (a == b) return "";
        auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
        auto it = report.pairwise_kappa.find(key);
        return it == report.pairwise_kappa.end() ? "" : fmt(it->second, 4);
    };
    for (TranslatorId row : kEvaluatedTranslators) {
        out += to_string(row);
        for (TranslatorId col : kEvaluatedTranslators) out += "," + lookup(row, col);
        out += "\n";
    }
    return out;
}

ordered_json identification_score_to_json(const IdentificationScore& score) {
    ordered_json j;
    j["tp"] = score.tp;
    j["fp"] = score.fp;
    j["fn"] = score.fn;
    j["precision"] = score.precision;
    j["recall"] = score.recall;
    j["f1"] = score.f1;
    j["precision_percent"] = score.precision * 100.0;
    j["recall_percent"] = score.recall * 100.0;
    j["f1_percent"] = score.f1 * 100.0;
    return j;
}

ordered_json explicitation_report_to_json(const ExplicitationScoreReport& report) {
    ordered_json j;
    j["per_story_pool"] = report.per_story_pool;
    j["aggregate"] = aggregate_to_json(report.aggregate);
    ordered_json by_subsystem;
    for (const auto& [subsystem, agg] : report.by_subsystem)
        by_subsystem[to_string(subsystem)] = aggregate_to_json(agg);
    j["by_subsystem"] = std::move(by_subsystem);
    ordered_json rows = ordered_json::array();
    for (const TextScoreRow& row : report.rows) {
        ordered_json r;
        r["story_id"] = row.story_id;
        r["term"] = row.term;
        r["subsystem"] = to_string(row.subsystem);
        r["absent"] = row.absent;
        r["bleu"] = row.bleu;
        r["rouge_l"] = row.rouge_l;
        r["semantic"] = row.semantic;
        if (row.judge) r["judge"] = *row.judge;
        if (row.semantic_skipped) r["semantic_skipped"] = true;
        if (row.judge_parse_failed) r["judge_parse_failed"] = true;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

std::string explicitation_report_to_markdown(const ExplicitationScoreReport& report,
                                             const std::string& title) {
    std::string out = "# " + title + "\n\n";
    out += "- items: " + std::to_string(report.aggregate.item_count) + " (absent: " +
           std::to_string(report.aggregate.absent_count) + ")\n";
    out += "- reference pool: " + std::string(report.per_story_pool ? "per story" : "per term") +
           "\n\n";
    auto agg_row = [&](const std::string& name, const TextScoreAggregate& agg) {
        std::vector<std::string> row = {name, fmt(agg.bleu, 2), fmt(agg.rouge_l, 3),
                                        fmt(agg.semantic, 3),
                                        agg.judge ? fmt(*agg.judge, 1) : std::string("-"),
                                        std::to_string(agg.item_count)};
        return row;
    };
    std::vector<std::vector<std::string>> rows;
    rows.push_back(agg_row("all", report.aggregate));
    for (const auto& [subsystem, agg] : report.by_subsystem)
        rows.push_back(agg_row(to_string(subsystem), agg));
    out += markdown_table({"slice", "BLEU", "ROUGE-L", "semantic", "judge", "items"}, rows);
    return out;
}

ordered_json manifest_to_json(const RunManifest& manifest) {
    ordered_json j;
    j["command"] = manifest.command;
    j["config"] = manifest.config_snapshot;
    j["dataset_digest"] = manifest.dataset_digest;
    j["items"] = manifest.item_count;
    j["failures"] = manifest.failure_count;
    j["cache_hits"] = manifest.cache_hits;
    j["provider_calls"] = manifest.provider_calls;
    j["started_at"] = manifest.started_at;
    j["finished_at"] = manifest.finished_at;
    j["duration_ms"] = manifest.duration_ms;
    j["item_details"] = manifest.items.is_null() ? ordered_json::array() : manifest.items;
    return j;
}

std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw std::runtime_error("cannot write file: " + path.string());
    }
    fs::rename(tmp, path);
}

}  // namespace paratext
