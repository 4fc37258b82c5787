#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace paratext {

enum class TranslatorId { giles1880, lu1982, mair1989, minford2006, sondergard2008 };

inline constexpr std::array<TranslatorId, 4> kEvaluatedTranslators = {
    TranslatorId::lu1982, TranslatorId::mair1989, TranslatorId::minford2006,
    TranslatorId::sondergard2008};

std::string to_string(TranslatorId id);
std::optional<TranslatorId> translator_from_string(const std::string& s);
// Dataset folder name, e.g. "1982_lu_etal".
std::string translator_folder(TranslatorId id);
int translator_year(TranslatorId id);

enum class ParatextKind { footnote, endnote, glossary, appendix };
std::string to_string(ParatextKind k);
std::optional<ParatextKind> kind_from_string(const std::string& s);

enum class Subsystem { literary, historical, cultural, social, supplementary };
std::string to_string(Subsystem s);
std::optional<Subsystem> subsystem_from_string(const std::string& s);
inline constexpr std::array<Subsystem, 5> kAllSubsystems = {
    Subsystem::literary, Subsystem::historical, Subsystem::cultural, Subsystem::social,
    Subsystem::supplementary};

struct Story {
    std::string id;
    std::string title;
    std::string content;
    nlohmann::json metadata;  // unknown/extra fields, preserved verbatim
};

struct Paratext {
    std::string story_id;
    std::string head_term;
    std::string body;
    ParatextKind kind = ParatextKind::footnote;
};

struct Edition {
    TranslatorId translator = TranslatorId::lu1982;
    int year = 0;
    std::set<std::string> story_ids;
    std::vector<Paratext> paratexts;
    bool excluded_from_eval = false;
    nlohmann::json metadata;
};

struct AlignedTerm {
    std::string term;
    std::string story_id;
    Subsystem subsystem = Subsystem::supplementary;
    // A translator may attach more than one note to the same term, so each
    // translator maps to a list; |references| counts individual paratexts.
    std::map<TranslatorId, std::vector<Paratext>> references;

    std::size_t reference_count() const;
    std::size_t consensus_level() const { return references.size(); }
};

struct Violation {
    std::string code;
    std::string location;
    std::string detail;
    bool fatal = false;
};

struct Corpus {
    std::map<std::string, Story> stories;
    std::map<TranslatorId, Edition> editions;
    std::vector<AlignedTerm> aligned_terms;  // sorted by (story id, term codepoints)
    std::vector<Violation> load_warnings;
};

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Load the dataset tree (annotations/annotations.csv, source/classical/main.json,
// translations/<edition>/main.json). Throws LoadError naming the offending path
// or record; recoverable oddities are collected into Corpus::load_warnings.
Corpus load_corpus(const std::filesystem::path& root);

// Deduplicated union of translator-annotated terms, optionally story-filtered,
// in deterministic (story id, term codepoint) order. Unknown story id throws.
std::vector<const AlignedTerm*> pooled_terms(const Corpus& corpus,
                                             const std::optional<std::string>& story_id = {});

struct EditionStats {
    std::size_t stories = 0;
    std::size_t paratexts = 0;
    std::size_t paratext_tokens = 0;
    bool excluded_from_eval = false;
};

struct CorpusStats {
    std::map<TranslatorId, EditionStats> editions;
    std::size_t story_count = 0;
    std::size_t annotated_story_count = 0;
    std::size_t pooled_term_count = 0;
    std::size_t reference_count = 0;
    std::map<int, std::size_t> consensus;  // translators-per-term -> term count
    std::size_t multi_annotated = 0;       // terms with >= 2 annotating translators
};

CorpusStats corpus_stats(const Corpus& corpus);

// Check every documented invariant; violations are data, not errors.
std::vector<Violation> validate(const Corpus& corpus);

// SHA-256 digest over the dataset files (sorted relative path + content).
std::string dataset_digest(const std::filesystem::path& root);

}  // namespace paratext
