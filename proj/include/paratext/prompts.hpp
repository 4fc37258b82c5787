#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paratext/corpus.hpp"
#include "paratext/llm.hpp"

namespace paratext {

enum class PromptVariant { default_, theoretical, practical };
std::string to_string(PromptVariant v);
std::optional<PromptVariant> variant_from_string(const std::string& s);
inline constexpr std::array<PromptVariant, 3> kAllVariants = {
    PromptVariant::default_, PromptVariant::theoretical, PromptVariant::practical};

namespace prompts {

// --- term identification ---
inline constexpr std::string_view kIdentifyDefault =
    "You are a helpful translation assistant. When provided with a story in classical Chinese, "
    "identify key terms that require additional explanation when translated into English. Return "
    "these terms as a comma-separated list.";
inline constexpr std::string_view kIdentifyTheoretical =
    "The terms you identify should be culture-bound terms as defined in translation studies: "
    "expressions deeply rooted in the literary, historical, or social context of the source "
    "culture. Such terms are often unfamiliar to readers from other cultures and may necessitate "
    "explicitation to bridge the gap in understanding.";
inline constexpr std::string_view kIdentifyPractical =
    "Your target audience is composed of native English speakers with limited knowledge of "
    "Chinese culture. The terms you identify for additional explanation should therefore help "
    "them understand the story or its setting in a more meaningful manner.";

// --- term explicitation ---
inline constexpr std::string_view kExplicateDefault =
    "You are a helpful translation assistant. Given a classical Chinese story and term from the "
    "story, provide (1) an English translation of the term and (2) a clear description of the "
    "term's meaning or significance. Format your answer as: {translated_term}: {description}.";
inline constexpr std::string_view kExplicateTheoretical =
    "Select an appropriate translation strategy (e.g., domestication, foreignization) for the "
    "term and let that choice guide your rendering and explanation. Interpret the culture-bound "
    "term with respect to its role within the literary, cultural, historical, or social dynamics "
    "of the source culture and present your description as a peritext in the Genettean sense—"
    "a translator's footnote intended to support the reader's understanding. Do not explain your "
    "reasoning; simply provide the term and description.";
inline constexpr std::string_view kExplicatePractical =
    "Translate the term for a target audience of native English speakers unfamiliar with Chinese "
    "culture. Your description should preserve the term's cultural grounding while remaining "
    "clear and accessible. Keep the description concise but informative, offering just enough "
    "context to aid reader understanding without being overwhelming.";

// --- agentic retrieval ---
inline constexpr std::string_view kAgenticExtract =
    "You are an expert at identifying relevant information. From the provided search results, "
    "extract passages that seem the most relevant to defining the classical Chinese term in the "
    "given context. Focus on dictionary definitions, explanations, and contextual usage "
    "information.";

// Harness-fixed texts (the source work describes these steps without printing
// a verbatim prompt; wording is stable so cached runs replay byte-identically).
inline constexpr std::string_view kSinglePassInstruction =
    "After identifying the terms, provide for each one an English translation and a clear "
    "description of its meaning or significance. Answer with one block per term, formatted "
    "exactly as: {term} — {translated_term}: {description}. Separate blocks with a blank "
    "line and include nothing else in your answer.";
inline constexpr std::string_view kCandidateTranslations =
    "You are a helpful translation assistant. Propose up to five candidate English translations "
    "of the given classical Chinese term as used in the story. Return only the candidate "
    "translations as a comma-separated list.";
inline constexpr std::string_view kJudgeSystem =
    "You are an expert evaluator of literary translation footnotes. Given a classical Chinese "
    "source term, a model-generated explicitation, and the human reference paratext(s), rate the "
    "accuracy and clarity of the generated explicitation on a scale of 0 to 100. Answer with a "
    "single integer.";

std::string_view identify_variant_text(PromptVariant v);    // empty for default
std::string_view explicate_variant_text(PromptVariant v);   // empty for default

std::vector<Message> identification_prompt(const Story& story, PromptVariant variant);
std::vector<Message> explicitation_prompt(const std::string& term, const Story& story,
                                          PromptVariant variant,
                                          const std::optional<std::string>& retrieval_context);
std::vector<Message> single_pass_prompt(const Story& story, PromptVariant variant);
std::vector<Message> candidate_translation_prompt(const std::string& term, const Story& story);
std::vector<Message> agentic_extraction_prompt(const std::string& term, const Story& story,
                                               const std::string& joined_snippets);
std::vector<Message> judge_prompt(const std::string& term, const std::string& candidate,
                                  const std::vector<std::string>& references);

}  // namespace prompts
}  // namespace paratext
