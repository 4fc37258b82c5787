#include "paratext/prompts.hpp"

#include "paratext/text.hpp"

namespace paratext {

std::string to_string(PromptVariant v) {
    switch (v) {
        case PromptVariant::default_: return "default";
        case PromptVariant::theoretical: return "theoretical";
        case PromptVariant::practical: return "practical";
    }
    return "default";
}

std::optional<PromptVariant> variant_from_string(const std::string& s) {
    std::string v = text::lower_ascii(text::trim(s));
    if (v == "default") return PromptVariant::default_;
    if (v == "theoretical") return PromptVariant::theoretical;
    if (v == "practical") return PromptVariant::practical;
    return std::nullopt;
}

namespace prompts {

std::string_view identify_variant_text(PromptVariant v) {
    switch (v) {
        case PromptVariant::default_: return {};
        case PromptVariant::theoretical: return kIdentifyTheoretical;
        case PromptVariant::practical: return kIdentifyPractical;
    }
    return {};
}

std::string_view explicate_variant_text(PromptVariant v) {
    switch (v) {
        case PromptVariant::default_: return {};
        case PromptVariant::theoretical: return kExplicateTheoretical;
        case PromptVariant::practical: return kExplicatePractical;
    }
    return {};
}

namespace {

// the variant text extends the base system instruction
std::string system_text(std::string_view base, std::string_view variant_text) {
    std::string out(base);
    if (!variant_text.empty()) {
        out += "\n\n";
        out += variant_text;
    }
    return out;
}

}  // namespace

std::vector<Message> identification_prompt(const Story& story, PromptVariant variant) {
    return {{Role::system, system_text(kIdentifyDefault, identify_variant_text(variant))},
            {Role::user, story.content}};
}

std::vector<Message> explicitation_prompt(const std::string& term, const Story& story,
                                          PromptVariant variant,
                                          const std::optional<std::string>& retrieval_context) {
    std::string user = "Story:\n" + story.content + "\n\nTerm: " + term;
    if (retrieval_context && !retrieval_context->empty())
        user += "\n\n" + *retrieval_context;
    return {{Role::system, system_text(kExplicateDefault, explicate_variant_text(variant))},
            {Role::user, user}};
}

std::vector<Message> single_pass_prompt(const Story& story, PromptVariant variant) {
    return {{Role::system, system_text(kIdentifyDefault, identify_variant_text(variant))},
            {Role::user, story.content},
            {Role::user, std::string(kSinglePassInstruction)}};
}

std::vector<Message> candidate_translation_prompt(const std::string& term, const Story& story) {
    return {{Role::system, std::string(kCandidateTranslations)},
            {Role::user, "Story:\n" + story.content + "\n\nTerm: " + term}};
}

std::vector<Message> agentic_extraction_prompt(const std::string& term, const Story& story,
                                               const std::string& joined_snippets) {
    return {{Role::system, std::string(kAgenticExtract)},
            {Role::user, "Term: " + term + "\n\nStory:\n" + story.content +
                             "\n\nSearch results:\n" + joined_snippets}};
}

std::vector<Message> judge_prompt(const std::string& term, const std::string& candidate,
                                  const std::vector<std::string>& references) {
    std::string user = "Term: " + term + "\n\nGenerated explicitation: " + candidate +
                       "\n\nReference paratext(s):";
    for (const std::string& ref : references) user += "\n- " + ref;
    return {{Role::system, std::string(kJudgeSystem)}, {Role::user, user}};
}

}  // namespace prompts
}  // namespace paratext
