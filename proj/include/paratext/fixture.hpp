#pragma once

#include <filesystem>
#include <string>

namespace paratext::fixture {

enum class Profile {
    // Reproduces every published statistic of the study corpus: per-edition
    // story/paratext counts, 560 pooled terms, consensus {479, 73, 5, 3},
    // 81 multi-annotated terms, alpha/kappa/translator-F1/bidirectional-BLEU
    // within the documented tolerances.
    released_stats,
    // 10 annotated stories, 4 translators; for pipeline determinism runs.
    small,
    // 2 stories / 3 notes; for loader unit tests.
    tiny,
};

std::string to_string(Profile p);

// Write a complete dataset tree (annotations/, source/, translations/) under
// `root`. Fully deterministic: identical bytes for identical arguments.
void write_fixture(const std::filesystem::path& root, Profile profile);

}  // namespace paratext::fixture
