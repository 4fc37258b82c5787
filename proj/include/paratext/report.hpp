#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "paratext/agreement.hpp"
#include "paratext/corpus.hpp"
#include "paratext/metrics.hpp"

namespace paratext {

// Minimal Markdown table builder: header row + aligned pipes.
std::string markdown_table(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows);

nlohmann::ordered_json stats_to_json(const CorpusStats& stats);
std::string stats_to_markdown(const CorpusStats& stats);

nlohmann::ordered_json agreement_to_json(const AgreementReport& report);
std::string agreement_to_markdown(const AgreementReport& report);
// Pairwise-kappa grid as CSV (rows/cols = translators).
std::string kappa_grid_csv(const AgreementReport& report);

nlohmann::ordered_json identification_score_to_json(const IdentificationScore& score);
nlohmann::ordered_json explicitation_report_to_json(const ExplicitationScoreReport& report);
std::string explicitation_report_to_markdown(const ExplicitationScoreReport& report,
                                             const std::string& title);

struct RunManifest {
    std::string command;
    nlohmann::ordered_json config_snapshot;
    std::string dataset_digest;
    std::size_t item_count = 0;
    std::size_t failure_count = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t provider_calls = 0;
    std::string started_at;   // ISO-8601 UTC; manifests are the only timestamped output
    std::string finished_at;
    double duration_ms = 0.0;
    nlohmann::ordered_json items;  // per-item provenance
};

nlohmann::ordered_json manifest_to_json(const RunManifest& manifest);

std::string iso8601_utc_now();

// Write text to path atomically (temp file + rename), creating directories.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace paratext
