#include "paratext/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "paratext/text.hpp"

namespace paratext {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(TranslatorId id) {
    switch (id) {
        case TranslatorId::giles1880: return "giles1880";
        case TranslatorId::lu1982: return "lu1982";
        case TranslatorId::mair1989: return "mair1989";
        case TranslatorId::minford2006: return "minford2006";
        case TranslatorId::sondergard2008: return "sondergard2008";
    }
    return "unknown";
}

std::optional<TranslatorId> translator_from_string(const std::string& s) {
    std::string v = text::lower_ascii(text::trim(s));
    if (v == "giles1880" || v == "1880_giles" || v == "giles") return TranslatorId::giles1880;
    if (v == "lu1982" || v == "1982_lu_etal" || v == "lu") return TranslatorId::lu1982;
    if (v == "mair1989" || v == "1989_mair_and_mair" || v == "mair") return TranslatorId::mair1989;
    if (v == "minford2006" || v == "2006_minford" || v == "minford") return TranslatorId::minford2006;
    if (v == "sondergard2008" || v == "2008_sondergard" || v == "sondergard")
        return TranslatorId::sondergard2008;
    return std::nullopt;
}

std::string translator_folder(TranslatorId id) {
    switch (id) {
        case TranslatorId::giles1880: return "1880_giles";
        case TranslatorId::lu1982: return "1982_lu_etal";
        case TranslatorId::mair1989: return "1989_mair_and_mair";
        case TranslatorId::minford2006: return "2006_minford";
        case TranslatorId::sondergard2008: return "2008_sondergard";
    }
    return "unknown";
}

int translator_year(TranslatorId id) {
    switch (id) {
        case TranslatorId::giles1880: return 1880;
        case TranslatorId::lu1982: return 1982;
        case TranslatorId::mair1989: return 1989;
        case TranslatorId::minford2006: return 2006;
        case TranslatorId::sondergard2008: return 2008;
    }
    return 0;
}

std::string to_string(ParatextKind k) {
    switch (k) {
        case ParatextKind::footnote: return "footnote";
        case ParatextKind::endnote: return "endnote";
        case ParatextKind::glossary: return "glossary";
        case ParatextKind::appendix: return "appendix";
    }
    return "footnote";
}

std::optional<ParatextKind> kind_from_string(const std::string& s) {
    std::string v = text::lower_ascii(text::trim(s));
    if (v == "footnote") return ParatextKind::footnote;
    if (v == "endnote") return ParatextKind::endnote;
    if (v == "glossary") return ParatextKind::glossary;
    if (v == "appendix") return ParatextKind::appendix;
    return std::nullopt;
}

std::string to_string(Subsystem s) {
    switch (s) {
        case Subsystem::literary: return "literary";
        case Subsystem::historical: return "historical";
        case Subsystem::cultural: return "cultural";
        case Subsystem::social: return "social";
        case Subsystem::supplementary: return "supplementary";
    }
    return "supplementary";
}

std::optional<Subsystem> subsystem_from_string(const std::string& s) {
    std::string v = text::lower_ascii(text::trim(s));
    if (v == "literary") return Subsystem::literary;
    if (v == "historical") return Subsystem::historical;
    if (v == "cultural") return Subsystem::cultural;
    if (v == "social") return Subsystem::social;
    if (v == "supplementary") return Subsystem::supplementary;
    return std::nullopt;
}

std::size_t AlignedTerm::reference_count() const {
    std::size_t n = 0;
    for (const auto& [tr, notes] : references) n += notes.size();
    return n;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180: quoted fields, "" escapes, newlines inside quotes)
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& data) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(row);
        row.clear();
        row_started = false;
    };
    while (i < data.size()) {
        char c = data[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
            row_started = true;
        } else if (c == ',') {
            end_field();
            row_started = true;
        } else if (c == '\r') {
            // swallow; '\n' ends the row
        } else if (c == '\n') {
            if (row_started || !field.empty() || !row.empty()) end_row();
        } else {
            field.push_back(c);
            row_started = true;
        }
        ++i;
    }
    if (row_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw LoadError("cannot open file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const fs::path& p) {
    json j = json::parse(read_file(p), nullptr, false);
    if (j.is_discarded()) throw LoadError("malformed JSON: " + p.string());
    return j;
}

// Pull a string field; everything not consumed lands in the metadata bag.
std::string take_string(json& obj, const char* key) {
    if (!obj.contains(key)) return {};
    std::string v = obj[key].is_string() ? obj[key].get<std::string>() : obj[key].dump();
    obj.erase(key);
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// load_corpus
// ---------------------------------------------------------------------------

Corpus load_corpus(const fs::path& root) {
    Corpus corpus;
    const fs::path source_path = root / "source" / "classical" / "main.json";
    const fs::path annotations_path = root / "annotations" / "annotations.csv";
    if (!fs::exists(source_path)) throw LoadError("missing file: " + source_path.string());
    if (!fs::exists(annotations_path))
        throw LoadError("missing file: " + annotations_path.string());

    // --- source stories ---
    json src = parse_json_file(source_path);
    if (!src.is_array())
        throw LoadError("malformed record: " + source_path.string() + " (expected array)");
    std::size_t idx = 0;
    for (auto& entry : src) {
        if (!entry.is_object())
            throw LoadError("malformed record: " + source_path.string() + " record " +
                            std::to_string(idx) + " (expected object)");
        Story st;
        st.id = take_string(entry, "id");
        st.title = take_string(entry, "title");
        st.content = take_string(entry, "content");
        st.metadata = std::move(entry);
        if (st.id.empty())
            throw LoadError("malformed record: " + source_path.string() + " record " +
                            std::to_string(idx) + " field id (empty)");
        if (corpus.stories.count(st.id))
            throw LoadError("malformed record: " + source_path.string() + " record " +
                            std::to_string(idx) + " field id (duplicate '" + st.id + "')");
        corpus.stories.emplace(st.id, std::move(st));
        ++idx;
    }

    // --- translation editions ---
    const fs::path translations_dir = root / "translations";
    if (!fs::exists(translations_dir))
        throw LoadError("missing file: " + translations_dir.string());
    bool any_edition = false;
    for (TranslatorId tr :
         {TranslatorId::giles1880, TranslatorId::lu1982, TranslatorId::mair1989,
          TranslatorId::minford2006, TranslatorId::sondergard2008}) {
        const fs::path ed_path = translations_dir / translator_folder(tr) / "main.json";
        if (!fs::exists(ed_path)) continue;
        any_edition = true;
        Edition ed;
        ed.translator = tr;
        ed.year = translator_year(tr);
        ed.excluded_from_eval = (tr == TranslatorId::giles1880);
        json tj = parse_json_file(ed_path);
        if (!tj.is_array())
            throw LoadError("malformed record: " + ed_path.string() + " (expected array)");
        std::size_t rec = 0;
        for (auto& entry : tj) {
            if (!entry.is_object())
                throw LoadError("malformed record: " + ed_path.string() + " record " +
                                std::to_string(rec) + " (expected object)");
            std::string sid = take_string(entry, "id");
            if (sid.empty())
                throw LoadError("malformed record: " + ed_path.string() + " record " +
                                std::to_string(rec) + " field id (empty)");
            ed.story_ids.insert(sid);
            if (entry.contains("notes")) {
                json notes = entry["notes"];
                entry.erase("notes");
                if (!notes.is_array())
                    throw LoadError("malformed record: " + ed_path.string() + " record " +
                                    std::to_string(rec) + " field notes (expected array)");
                for (auto& nj : notes) {
                    Paratext note;
                    note.story_id = sid;
                    if (nj.is_string()) {
                        note.body = nj.get<std::string>();
                    } else if (nj.is_object()) {
                        if (nj.contains("story_id")) note.story_id = nj["story_id"].get<std::string>();
                        if (nj.contains("head_term")) note.head_term = nj["head_term"].get<std::string>();
                        if (nj.contains("body")) note.body = nj["body"].get<std::string>();
                        else if (nj.contains("text")) note.body = nj["text"].get<std::string>();
                        if (nj.contains("kind")) {
                            auto k = kind_from_string(nj["kind"].get<std::string>());
                            if (k) note.kind = *k;
                        }
                    } else {
                        throw LoadError("malformed record: " + ed_path.string() + " record " +
                                        std::to_string(rec) + " field notes (bad element)");
                    }
                    ed.paratexts.push_back(std::move(note));
                }
            }
            // remaining fields (title, content, commentary, glossaries, ...) kept opaque
            ed.metadata["entries"].push_back(std::move(entry));
            ++rec;
        }
        corpus.editions.emplace(tr, std::move(ed));
    }
    if (!any_edition)
        throw LoadError("missing file: " + (translations_dir / "*" / "main.json").string());

    // --- annotations ---
    std::string csv_data = read_file(annotations_path);
    auto rows = parse_csv(csv_data);
    if (rows.empty()) {
        corpus.load_warnings.push_back(
            {"empty_annotations", annotations_path.string(), "no header row", false});
        return corpus;
    }
    const std::vector<std::string>& header = rows.front();
    std::map<std::string, std::size_t> col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        std::string name = text::lower_ascii(text::trim(header[c]));
        static const std::set<std::string> known = {"story_id", "term",      "translator",
                                                    "subsystem", "head_term", "kind",
                                                    "body"};
        if (!known.count(name))
            corpus.load_warnings.push_back({"unknown_column", annotations_path.string(),
                                            "column '" + name + "' ignored", false});
        col[name] = c;
    }
    for (const char* required : {"story_id", "term", "translator", "body"}) {
        if (!col.count(required))
            throw LoadError("malformed record: " + annotations_path.string() +
                            " header (missing column '" + std::string(required) + "')");
    }
    auto cell = [&](const std::vector<std::string>& row, const std::string& name) -> std::string {
        auto it = col.find(name);
        if (it == col.end() || it->second >= row.size()) return {};
        return row[it->second];
    };

    if (rows.size() == 1)
        corpus.load_warnings.push_back(
            {"empty_annotations", annotations_path.string(), "no data rows", false});

    // (story, term) -> aligned term under construction
    std::map<std::pair<std::string, std::string>, AlignedTerm> terms;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string loc = annotations_path.string() + " record " + std::to_string(r);
        std::string story_id = text::trim(cell(row, "story_id"));
        std::string term = text::trim(cell(row, "term"));
        std::string translator_s = cell(row, "translator");
        std::string body = cell(row, "body");
        if (story_id.empty()) throw LoadError("malformed record: " + loc + " field story_id");
        if (term.empty()) throw LoadError("malformed record: " + loc + " field term");
        auto tr = translator_from_string(translator_s);
        if (!tr)
            throw LoadError("malformed record: " + loc + " field translator ('" + translator_s +
                            "')");
        Paratext note;
        note.story_id = story_id;
        note.head_term = cell(row, "head_term");
        note.body = body;
        if (auto k = kind_from_string(cell(row, "kind"))) note.kind = *k;

        auto key = std::make_pair(story_id, term);
        auto it = terms.find(key);
        if (it == terms.end()) {
            AlignedTerm at;
            at.term = term;
            at.story_id = story_id;
            std::string subsystem_s = cell(row, "subsystem");
            if (auto sub = subsystem_from_string(subsystem_s)) {
                at.subsystem = *sub;
            } else {
                at.subsystem = Subsystem::supplementary;
                corpus.load_warnings.push_back(
                    {"missing_subsystem", loc,
                     "subsystem '" + subsystem_s + "' unrecognized; defaulted to supplementary",
                     false});
            }
            it = terms.emplace(key, std::move(at)).first;
        }
        it->second.references[*tr].push_back(std::move(note));
    }

    corpus.aligned_terms.reserve(terms.size());
    for (auto& [key, at] : terms) corpus.aligned_terms.push_back(std::move(at));
    // std::map key order is (story id, term) bytewise = codepoint order for UTF-8
    for (const AlignedTerm& at : corpus.aligned_terms) {
        auto sit = corpus.stories.find(at.story_id);
        if (sit != corpus.stories.end()) {
            std::string norm_term = text::normalize_for_match(at.term);
            std::string norm_content = text::normalize_for_match(sit->second.content);
            // a term that normalizes to nothing (pure punctuation) still warns
            if (norm_term.empty() || !text::contains_codepoints(norm_content, norm_term))
                corpus.load_warnings.push_back({"term_not_in_story",
                                                at.story_id + "/" + at.term,
                                                "term not found in story content after "
                                                "normalization; kept with warning",
                                                false});
        }
    }
    return corpus;
}

// ---------------------------------------------------------------------------

std::vector<const AlignedTerm*> pooled_terms(const Corpus& corpus,
                                             const std::optional<std::string>& story_id) {
    if (story_id && !corpus.stories.count(*story_id))
        throw std::out_of_range("unknown story id: " + *story_id);
    std::vector<const AlignedTerm*> out;
    for (const AlignedTerm& at : corpus.aligned_terms) {
        if (story_id && at.story_id != *story_id) continue;
        out.push_back(&at);
    }
    return out;
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.story_count = corpus.stories.size();
    for (const auto& [tr, ed] : corpus.editions) {
        EditionStats es;
        es.stories = ed.story_ids.size();
        es.paratexts = ed.paratexts.size();
        es.excluded_from_eval = ed.excluded_from_eval;
        for (const Paratext& p : ed.paratexts) es.paratext_tokens += text::tokenize(p.body).size();
        stats.editions.emplace(tr, es);
    }
    std::set<std::string> annotated_stories;
    for (const AlignedTerm& at : corpus.aligned_terms) {
        annotated_stories.insert(at.story_id);
        int level = static_cast<int>(at.consensus_level());
        stats.consensus[level] += 1;
        if (level >= 2) stats.multi_annotated += 1;
        stats.reference_count += at.reference_count();
    }
    stats.annotated_story_count = annotated_stories.size();
    stats.pooled_term_count = corpus.aligned_terms.size();
    return stats;
}

std::vector<Violation> validate(const Corpus& corpus) {
    std::vector<Violation> out;
    for (const auto& [id, story] : corpus.stories) {
        if (story.content.empty())
            out.push_back({"empty_story_content", id, "story content is empty", true});
    }
    for (const auto& [tr, ed] : corpus.editions) {
        for (const std::string& sid : ed.story_ids) {
            if (!corpus.stories.count(sid))
                out.push_back({"dangling_story_ref", to_string(tr) + "/" + sid,
                               "edition lists a story id absent from the source", true});
        }
        for (std::size_t i = 0; i < ed.paratexts.size(); ++i) {
            const Paratext& p = ed.paratexts[i];
            std::string loc = to_string(tr) + "/notes[" + std::to_string(i) + "]";
            if (!corpus.stories.count(p.story_id))
                out.push_back({"dangling_story_ref", loc,
                               "paratext story id '" + p.story_id + "' unknown", true});
            else if (!ed.story_ids.count(p.story_id))
                out.push_back({"note_outside_edition", loc,
                               "paratext attached to a story the edition did not translate",
                               true});
            if (p.body.empty())
                out.push_back({"empty_paratext_body", loc, "paratext body is empty", true});
        }
    }
    std::set<std::pair<std::string, std::string>> seen;
    for (const AlignedTerm& at : corpus.aligned_terms) {
        std::string loc = at.story_id + "/" + at.term;
        if (!seen.insert({at.story_id, at.term}).second)
            out.push_back({"duplicate_term", loc, "aligned term appears twice", true});
        if (at.references.empty())
            out.push_back({"references_empty", loc, "aligned term has no references", true});
        if (!corpus.stories.count(at.story_id)) {
            out.push_back({"dangling_story_ref", loc, "annotation references unknown story", true});
        } else {
            std::string norm_term = text::normalize_for_match(at.term);
            std::string norm_content =
                text::normalize_for_match(corpus.stories.at(at.story_id).content);
            if (norm_term.empty() || !text::contains_codepoints(norm_content, norm_term))
                out.push_back({"term_not_in_story", loc,
                               "term not a substring of story content after normalization",
                               false});
        }
        for (const auto& [tr, notes] : at.references) {
            auto eit = corpus.editions.find(tr);
            if (eit == corpus.editions.end()) {
                out.push_back({"annotation_without_edition", loc,
                               "annotation by " + to_string(tr) + " but edition not loaded", true});
                continue;
            }
            if (!eit->second.story_ids.count(at.story_id))
                out.push_back({"annotation_without_coverage", loc,
                               "annotation by " + to_string(tr) +
                                   " on a story that edition did not translate",
                               true});
            for (const Paratext& p : notes) {
                if (p.story_id != at.story_id)
                    out.push_back({"reference_story_mismatch", loc,
                                   "reference paratext bound to a different story", true});
                if (p.body.empty())
                    out.push_back({"empty_paratext_body", loc, "reference body is empty", true});
            }
        }
    }
    return out;
}

std::string dataset_digest(const fs::path& root) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const fs::path& p : files) {
        acc += fs::relative(p, root).generic_string();
        acc.push_back('\0');
        acc += text::sha256_hex(read_file(p));
        acc.push_back('\0');
    }
    return text::sha256_hex(acc);
}

}  // namespace paratext
