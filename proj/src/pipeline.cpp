#include "paratext/pipeline.hpp"

#include <algorithm>

#include "paratext/text.hpp"

namespace paratext {

namespace {

bool is_list_separator(char32_t cp) {
    return cp == U',' || cp == 0xFF0C /* ， */ || cp == 0x3001 /* 、 */ || cp == U';' ||
           cp == 0xFF1B /* ； */ || cp == U'\n';
}

std::optional<char32_t> closing_quote(char32_t open) {
    switch (open) {
        case U'"': return U'"';
        case U'\'': return U'\'';
        case 0x201C: return char32_t{0x201D};  // “ ”
        case 0x2018: return char32_t{0x2019};  // ‘ ’
        case 0x300C: return char32_t{0x300D};  // 「 」
        case 0x300E: return char32_t{0x300F};  // 『 』
        default: return std::nullopt;
    }
}

void trim_cp_range(const std::vector<char32_t>& cps, std::size_t& b, std::size_t& e) {
    while (b < e && text::is_space(cps[b])) ++b;
    while (e > b && text::is_space(cps[e - 1])) --e;
}

std::string clean_term(const std::string& piece) {
    std::vector<char32_t> cps = text::decode_utf8(piece);
    std::size_t b = 0, e = cps.size();
    trim_cp_range(cps, b, e);
    // bullet or enumeration prefix
    if (b < e && (cps[b] == U'-' || cps[b] == U'*' || cps[b] == 0x2022) && b + 1 < e &&
        text::is_space(cps[b + 1])) {
        b += 2;
    } else {
        std::size_t d = b;
        while (d < e && cps[d] >= U'0' && cps[d] <= U'9') ++d;
        if (d > b && d < e && (cps[d] == U'.' || cps[d] == U')')) b = d + 1;
    }
    trim_cp_range(cps, b, e);
    // markdown emphasis
    while (b < e && (cps[b] == U'*' || cps[b] == U'_')) ++b;
    while (e > b && (cps[e - 1] == U'*' || cps[e - 1] == U'_')) --e;
    trim_cp_range(cps, b, e);
    // one surrounding quote pair
    if (e - b >= 2) {
        if (auto close = closing_quote(cps[b]); close && cps[e - 1] == *close) {
            ++b;
            --e;
            trim_cp_range(cps, b, e);
        }
    }
    return text::encode_utf8(std::vector<char32_t>(cps.begin() + static_cast<long>(b),
                                                   cps.begin() + static_cast<long>(e)));
}

}  // namespace

std::vector<std::string> parse_term_list(std::string_view raw) {
    std::vector<char32_t> cps = text::decode_utf8(raw);
    std::vector<std::string> out;
    std::vector<char32_t> current;
    auto flush = [&] {
        std::string term = clean_term(text::encode_utf8(current));
        current.clear();
        if (!term.empty() && std::find(out.begin(), out.end(), term) == out.end())
            out.push_back(std::move(term));
    };
    for (char32_t cp : cps) {
        if (is_list_separator(cp))
            flush();
        else
            current.push_back(cp);
    }
    flush();
    return out;
}

Explicitation parse_explicitation(std::string_view raw) {
    Explicitation out;
    out.raw_response = std::string(raw);
    std::string body = text::trim(raw);
    std::vector<char32_t> cps = text::decode_utf8(body);

    auto fail = [&] {
        out.parse_failed = true;
        out.translated_term.clear();
        out.description = body;
        return out;
    };
    if (cps.empty()) return fail();

    // an enclosing quote pair around the translated term shields inner colons
    std::size_t scan_from = 0;
    if (auto close = closing_quote(cps[0])) {
        for (std::size_t i = 1; i < cps.size(); ++i) {
            if (cps[i] == *close) {
                scan_from = i + 1;
                break;
            }
        }
    }
    std::size_t colon = cps.size();
    for (std::size_t i = scan_from; i < cps.size(); ++i) {
        if (cps[i] == U':' || cps[i] == 0xFF1A) {
            colon = i;
            break;
        }
    }
    if (colon == cps.size()) return fail();

    std::string left = text::encode_utf8(
        std::vector<char32_t>(cps.begin(), cps.begin() + static_cast<long>(colon)));
    std::string right = text::encode_utf8(
        std::vector<char32_t>(cps.begin() + static_cast<long>(colon) + 1, cps.end()));
    std::string translated = clean_term(left);
    std::string description = text::trim(right);
    if (translated.empty() || description.empty()) return fail();
    out.translated_term = std::move(translated);
    out.description = std::move(description);
    return out;
}

std::string to_string(E2EMode m) {
    return m == E2EMode::single_pass ? "single-pass" : "sequential";
}

std::optional<E2EMode> e2e_mode_from_string(const std::string& s) {
    std::string v = text::lower_ascii(text::trim(s));
    if (v == "sequential") return E2EMode::sequential;
    if (v == "single-pass" || v == "single_pass" || v == "singlepass") return E2EMode::single_pass;
    return std::nullopt;
}

namespace {

CompletionRequest base_request(const PipelineConfig& config, Mode mode) {
    CompletionRequest req;
    req.model_id = config.model_id;
    req.mode = mode;
    req.params = SamplingParams::defaults_for(mode);
    if (config.max_tokens) req.params.max_tokens = *config.max_tokens;
    return req;
}

// "{term} — {translated_term}: {description}" with tolerant dash handling
Explicitation parse_single_pass_block(const std::string& block) {
    std::vector<char32_t> cps = text::decode_utf8(block);
    std::size_t dash = cps.size();
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (cps[i] == 0x2014 || cps[i] == 0x2013) {  // em or en dash
            dash = i;
            break;
        }
        if (cps[i] == U'-' && i > 0 && i + 1 < cps.size() && text::is_space(cps[i - 1]) &&
            text::is_space(cps[i + 1])) {
            dash = i;
            break;
        }
    }
    if (dash == cps.size()) {
        Explicitation e;
        e.parse_failed = true;
        e.raw_response = block;
        e.description = text::trim(block);
        return e;
    }
    std::string head = text::encode_utf8(
        std::vector<char32_t>(cps.begin(), cps.begin() + static_cast<long>(dash)));
    std::string rest = text::encode_utf8(
        std::vector<char32_t>(cps.begin() + static_cast<long>(dash) + 1, cps.end()));
    Explicitation e = parse_explicitation(text::trim(rest));
    e.term = clean_term(head);
    e.raw_response = block;
    if (e.term.empty()) e.parse_failed = true;
    return e;
}

std::vector<std::string> split_blocks(const std::string& final_text) {
    std::vector<std::string> blocks;
    std::string current;
    std::size_t pos = 0;
    auto flush = [&] {
        std::string t = text::trim(current);
        current.clear();
        if (!t.empty()) blocks.push_back(std::move(t));
    };
    while (pos <= final_text.size()) {
        std::size_t nl = final_text.find('\n', pos);
        std::string line = final_text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        if (text::trim(line).empty())
            flush();
        else {
            if (!current.empty()) current += '\n';
            current += line;
        }
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
    flush();
    return blocks;
}

}  // namespace

IdentificationResult identify_terms(const Story& story, PromptVariant variant, Mode mode,
                                    Gateway& gateway, const PipelineConfig& config) {
    CompletionRequest req = base_request(config, mode);
    req.messages = prompts::identification_prompt(story, variant);
    CompletionResult res = gateway.complete(req);

    IdentificationResult out;
    out.story_id = story.id;
    out.terms = parse_term_list(res.final_text);
    out.provenance = {variant, mode, config.model_id};
    out.raw_response = res.raw;
    out.reasoning_trace = res.reasoning_trace;
    out.cached = res.cached;
    return out;
}

Explicitation explicate_term(const std::string& term, const Story& story, PromptVariant variant,
                             Mode mode, Gateway& gateway, Retriever* retriever,
                             const PipelineConfig& config) {
    std::optional<std::string> context;
    bool retrieval_used = false;
    bool retrieval_failed = false;
    if (retriever) {
        try {
            RetrievalContext rc = retriever->retrieve(term, story);
            std::string block = context_block(rc);
            if (!block.empty()) {
                context = std::move(block);
                retrieval_used = true;
            } else {
                retrieval_failed = true;  // nothing usable came back
            }
        } catch (const RetrievalError&) {
            retrieval_failed = true;
        } catch (const GatewayError&) {
            retrieval_failed = true;
        }
    }

    CompletionRequest req = base_request(config, mode);
    req.messages = prompts::explicitation_prompt(term, story, variant, context);
    CompletionResult res = gateway.complete(req);

    Explicitation e = parse_explicitation(res.final_text);
    e.term = term;
    e.retrieval_used = retrieval_used;
    e.retrieval_failed = retrieval_failed;
    e.raw_response = res.raw;
    e.reasoning_trace = res.reasoning_trace;
    e.provenance = {variant, mode, config.model_id};
    e.cached = res.cached;
    return e;
}

std::vector<Explicitation> run_end_to_end(const Story& story, PromptVariant variant, Mode mode,
                                          E2EMode e2e_mode, Gateway& gateway, Retriever* retriever,
                                          const PipelineConfig& config) {
    std::vector<Explicitation> out;
    if (e2e_mode == E2EMode::sequential) {
        IdentificationResult identified = identify_terms(story, variant, mode, gateway, config);
        for (const std::string& term : identified.terms)
            out.push_back(explicate_term(term, story, variant, mode, gateway, retriever, config));
        return out;
    }

    CompletionRequest req = base_request(config, mode);
    req.messages = prompts::single_pass_prompt(story, variant);
    CompletionResult res = gateway.complete(req);
    for (const std::string& block : split_blocks(res.final_text)) {
        Explicitation e = parse_single_pass_block(block);
        if (!e.term.empty() &&
            std::any_of(out.begin(), out.end(),
                        [&](const Explicitation& prev) { return prev.term == e.term; }))
            continue;  // duplicate term from the model: keep first occurrence
        e.reasoning_trace = res.reasoning_trace;
        e.provenance = {variant, mode, config.model_id};
        e.cached = res.cached;
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace paratext
