#include "paratext/fixture.hpp"

#include <fstream>
#include <map>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "paratext/corpus.hpp"
#include "paratext/text.hpp"

namespace paratext::fixture {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(Profile p) {
    switch (p) {
        case Profile::released_stats: return "released-stats";
        case Profile::small: return "small";
        case Profile::tiny: return "tiny";
    }
    return "released-stats";
}

namespace {

constexpr unsigned LU = 1, MA = 2, MI = 4, SO = 8;
constexpr TranslatorId kOrder[4] = {TranslatorId::lu1982, TranslatorId::mair1989,
                                    TranslatorId::minford2006, TranslatorId::sondergard2008};

unsigned tr_bit(TranslatorId tr) {
    switch (tr) {
        case TranslatorId::lu1982: return LU;
        case TranslatorId::mair1989: return MA;
        case TranslatorId::minford2006: return MI;
        case TranslatorId::sondergard2008: return SO;
        default: return 0;
    }
}

const char* short_name(TranslatorId tr) {
    switch (tr) {
        case TranslatorId::giles1880: return "giles";
        case TranslatorId::lu1982: return "lu";
        case TranslatorId::mair1989: return "mair";
        case TranslatorId::minford2006: return "minford";
        case TranslatorId::sondergard2008: return "sondergard";
    }
    return "unknown";
}

// 25 CJK characters; term i is the bigram pool[i / 25] + pool[i % 25], so the
// 560 corpus terms are pairwise distinct and partial matching on them reduces
// to equality (none is a substring of another).
const char* kTermPool[25] = {"山", "水", "雲", "月", "花", "風", "雪", "玉", "金",
                             "石", "門", "城", "河", "湖", "海", "天", "地", "神",
                             "仙", "鬼", "狐", "書", "劍", "琴", "棋"};

std::string term_string(std::size_t i) {
    return std::string(kTermPool[i / 25]) + kTermPool[i % 25];
}

// note-body vocabulary (ported verbatim from the statistical design)
const char* kRoles[12] = {"scholar",    "magistrate", "recluse",  "examiner",
                          "monk",       "alchemist",  "chronicler", "physician",
                          "censor",     "bailiff",    "diviner",  "archivist"};
const char* kPeriods[8] = {"tang", "song", "ming", "qing", "han", "zhou", "wei", "jin"};
const char* kThings[12] = {"ritual",   "festival", "garment", "omen",    "talisman", "registry",
                           "pavilion", "tribunal", "stipend", "lantern", "censer",   "tablet"};

// One fixed sentence frame per translator voice. The frames share no interior
// word bigram, which keeps cross-translator BLEU near the smoothing floor.
std::string voice_body(std::size_t term_idx, TranslatorId tr, const char* salt) {
    std::uint64_t k = text::stable_hash(std::string(salt) + ":" + std::to_string(term_idx) + ":" +
                                        short_name(tr));
    const char* role = kRoles[k % 12];
    const char* period = kPeriods[(k >> 8) % 8];
    const char* thing = kThings[(k >> 16) % 12];
    const char* role2 = kRoles[(k >> 24) % 12];
    switch (tr) {
        case TranslatorId::lu1982:
            return std::string("An old designation covering every ") + role +
                   " enrolled at court; " + period + " writers favoured it.";
        case TranslatorId::mair1989:
            return std::string("Refers broadly to whichever ") + thing + " accompanied a " + role +
                   " when travelling during " + period + " times.";
        case TranslatorId::minford2006:
            return std::string("Here it names one particular ") + thing + ", kept by this " +
                   role + " and mentioned again below.";
        default:
            return std::string("Such objects belonged only to ") + role2 + " households under " +
                   period + " rule, hence its weight.";
    }
}

// Three pair-annotated terms carry a long clause shared across both notes so
// the corpus-level bidirectional BLEU lands at its documented value instead of
// at the smoothing floor.
const char* kSharedA1 =
    "a successful candidate in the imperial civil service examination at the county level";
const char* kSharedA2 =
    "the deity charged with recording births and deaths in the registers of the underworld";
const char* kSharedBTail = "the watch drum dividing night into five periods.";

std::string shared_prefix(TranslatorId tr) {
    switch (tr) {
        case TranslatorId::lu1982: return "That is";
        case TranslatorId::mair1989: return "Meaning";
        case TranslatorId::minford2006: return "Namely";
        default: return "Properly";
    }
}

std::string shared_frame_b(TranslatorId tr) {
    switch (tr) {
        case TranslatorId::lu1982: return "An old designation, glossed by later commentators as";
        case TranslatorId::mair1989:
            return "Refers in vernacular usage, according to village custom, to";
        case TranslatorId::minford2006:
            return "Here it names, within this particular story, namely";
        default: return "Such wording signalled, under late imperial rule, simply";
    }
}

std::string story_title(const std::string& id) {
    static const char* kA[10] = {"青", "紅", "白", "黑", "紫", "翠", "碧", "丹", "朱", "玄"};
    static const char* kB[10] = {"鳳", "燕", "蝶", "鶴", "雁", "鹿", "馬", "猿", "蛇", "龍"};
    std::uint64_t h = text::stable_hash("title:" + id);
    return std::string(kA[h % 10]) + kB[(h >> 8) % 10] + "記";
}

// Classical filler avoids every character of the term pool, so after
// normalization a story contains exactly its own terms as pool bigrams.
std::string classical_content(const std::string& id, const std::vector<std::string>& terms) {
    static const char* kFillers[8] = {"幽冥之事", "科場之制", "簿籍之文", "社祭之儀",
                                      "庠序之教", "關市之征", "卜筮之術", "縣署之例"};
    std::string out = "聊齋舊聞，遺事一則。";
    std::size_t k = 0;
    for (const std::string& t : terms) {
        std::uint64_t h = text::stable_hash("filler:" + id + ":" + std::to_string(k++));
        out += "世稱";
        out += t;
        out += "，蓋";
        out += kFillers[h % 8];
        out += "也。";
    }
    out += "識者誌之，以傳後人。";
    return out;
}

// ---------------------------------------------------------------------------
// plans
// ---------------------------------------------------------------------------

struct TermSpec {
    unsigned annot = 0;      // annotator bitmask
    std::size_t story = 0;   // index into FixturePlan::stories
    std::string term;
};

struct StorySpec {
    std::string id;
    unsigned cov = 0;  // translators whose editions include this story
    std::vector<std::size_t> terms;
};

struct FixturePlan {
    std::vector<StorySpec> stories;
    std::vector<TermSpec> terms;
    // (term index, translator) -> number of extra same-translator notes
    std::map<std::pair<std::size_t, TranslatorId>, int> extra_notes;
    std::vector<TranslatorId> editions;  // evaluated editions present
    std::vector<std::size_t> giles_stories;
    bool explicit_story_id = false;
};

std::string story_id_for(std::size_t counter) {
    return "v" + std::to_string(1 + counter / 25) + "s" + std::to_string(1 + counter % 25);
}

FixturePlan released_plan() {
    FixturePlan plan;
    plan.editions = {kOrder[0], kOrder[1], kOrder[2], kOrder[3]};

    // rows: (annotator set, story-coverage set), in the frozen design order
    struct Block {
        unsigned annot, cov;
        int count;
    };
    const std::vector<Block> blocks = {
        {LU | MA | MI | SO, LU | MA | MI | SO, 3},
        {MA | MI | SO, MA | MI | SO, 3},
        {LU | MI | SO, LU | MI | SO, 2},
        {LU | SO, LU | SO, 14},
        {MA | SO, MA | SO, 12},
        {MI | SO, MI | SO, 38},
        {LU | MI, LU | MI, 3},
        {MA | MI, MA | MI, 6},
        // lu singletons: 34 fully private, then one-zero and two-zero coverage
        {LU, LU, 34},
        {LU, LU | MA, 2},
        {LU, LU | MI, 14},
        {LU, LU | SO, 15},
        {LU, LU | MA | MI, 6},
        {LU, LU | MA | SO, 5},
        {LU, LU | MI | SO, 2},
        // mair singletons
        {MA, MA, 10},
        {MA, LU | MA, 14},
        {MA, MA | MI, 16},
        {MA, MA | SO, 10},
        {MA, LU | MA | MI, 4},
        {MA, LU | MA | SO, 8},
        {MA, MA | MI | SO, 6},
        // minford singletons
        {MI, MI, 98},
        {MI, LU | MI, 18},
        {MI, MA | MI, 16},
        {MI, MI | SO, 17},
        {MI, LU | MA | MI, 3},
        {MI, LU | MI | SO, 6},
        {MI, MA | MI | SO, 10},
        // sondergard singletons
        {SO, SO, 82},
        {SO, LU | SO, 14},
        {SO, MA | SO, 11},
        {SO, MI | SO, 25},
        {SO, LU | MA | SO, 14},
        {SO, LU | MI | SO, 9},
        {SO, MA | MI | SO, 10},
    };

    // stories per coverage group
    const std::vector<std::pair<unsigned, int>> group_stories = {
        {LU, 12},      {MA, 8},           {MI, 33},          {SO, 30},
        {LU | MA, 3},  {LU | MI, 9},      {LU | SO, 9},      {MA | MI, 6},
        {MA | SO, 6},  {MI | SO, 17},     {LU | MA | MI, 4}, {LU | MA | SO, 4},
        {LU | MI | SO, 4}, {MA | MI | SO, 4}, {LU | MA | MI | SO, 1},
    };

    std::size_t counter = 0;
    std::map<unsigned, std::vector<std::size_t>> stories_of_group;
    for (const auto& [cov, n] : group_stories) {
        for (int i = 0; i < n; ++i) {
            stories_of_group[cov].push_back(plan.stories.size());
            plan.stories.push_back({story_id_for(counter++), cov, {}});
        }
    }

    std::map<unsigned, std::size_t> next_in_group;
    std::map<TranslatorId, int> singles_seen;
    const std::map<TranslatorId, int> kExtraNoteQuota = {{kOrder[0], 2},
                                                         {kOrder[1], 3},
                                                         {kOrder[2], 15},
                                                         {kOrder[3], 20}};
    for (const Block& b : blocks) {
        for (int i = 0; i < b.count; ++i) {
            const auto& group = stories_of_group.at(b.cov);
            std::size_t slot = next_in_group[b.cov]++ % group.size();
            std::size_t term_idx = plan.terms.size();
            std::size_t story_idx = group[slot];
            plan.terms.push_back({b.annot, story_idx, term_string(term_idx)});
            plan.stories[story_idx].terms.push_back(term_idx);
            // the first few fully private terms of each annotator carry a
            // second note, lifting reference totals above the term count
            for (TranslatorId tr : kOrder) {
                if (b.annot != tr_bit(tr)) continue;
                int& seen = singles_seen[tr];
                if (seen < kExtraNoteQuota.at(tr)) plan.extra_notes[{term_idx, tr}] = 1;
                ++seen;
            }
        }
    }

    // translated stories that carry no annotations
    const std::vector<std::pair<unsigned, int>> pads = {{LU, 13}, {MA, 7}, {MI, 8}, {SO, 1}};
    for (const auto& [cov, n] : pads)
        for (int i = 0; i < n; ++i) plan.stories.push_back({story_id_for(counter++), cov, {}});
    // classical-only stories no evaluated edition translated
    for (int i = 0; i < 21; ++i) plan.stories.push_back({story_id_for(counter++), 0, {}});

    for (std::size_t s = 0; s < 20; ++s) plan.giles_stories.push_back(s);
    return plan;
}

FixturePlan small_plan() {
    FixturePlan plan;
    plan.editions = {kOrder[0], kOrder[1], kOrder[2], kOrder[3]};
    for (std::size_t s = 0; s < 10; ++s)
        plan.stories.push_back({story_id_for(s), LU | MA | MI | SO, {}});
    const std::vector<std::pair<unsigned, std::size_t>> rows = {
        {LU | MA | MI | SO, 0}, {LU | MA | MI, 1}, {LU | SO, 2}, {MI | SO, 3}, {MA | MI, 4},
        {LU, 5},  {LU, 6},  {LU, 7},  {MA, 8},  {MA, 9},
        {MI, 0},  {MI, 1},  {MI, 2},  {SO, 3},  {SO, 4},  {SO, 5},
    };
    for (const auto& [annot, story] : rows) {
        std::size_t term_idx = plan.terms.size();
        plan.terms.push_back({annot, story, term_string(term_idx)});
        plan.stories[story].terms.push_back(term_idx);
    }
    return plan;
}

FixturePlan tiny_plan() {
    FixturePlan plan;
    plan.editions = {kOrder[0], kOrder[2], kOrder[3]};  // no mair edition on disk
    plan.stories.push_back({story_id_for(0), LU | MI | SO, {}});
    plan.stories.push_back({story_id_for(1), LU, {}});
    plan.terms.push_back({LU, 0, term_string(1)});       // 山水
    plan.terms.push_back({MI | SO, 0, term_string(53)});  // 雲月
    plan.stories[0].terms = {0, 1};
    plan.explicit_story_id = true;
    return plan;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

const char* kSubsystems[4] = {"literary", "historical", "cultural", "social"};

std::string csv_field(const std::string& v) {
    if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

void write_text(const fs::path& p, const std::string& data) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) throw std::runtime_error("cannot write fixture file: " + p.string());
}

struct NoteRow {
    std::size_t term_idx;
    TranslatorId tr;
    std::string story_id;
    std::string term;
    std::string body;
    std::string kind;
    std::string subsystem;
};

std::string note_kind(std::size_t term_idx, TranslatorId tr, bool extra) {
    if (extra) return "endnote";
    std::uint64_t h = text::stable_hash("kind:" + std::to_string(term_idx) + ":" + short_name(tr));
    return h % 5 == 0 ? "endnote" : "footnote";
}

void write_plan(const fs::path& root, const FixturePlan& plan) {
    // shared-clause bodies go to the first pair-term of three specific pairs
    std::map<unsigned, std::size_t> first_pair;
    for (std::size_t i = 0; i < plan.terms.size(); ++i) {
        unsigned a = plan.terms[i].annot;
        if ((a == (LU | MI) || a == (MA | SO) || a == (MI | SO)) && !first_pair.count(a))
            first_pair[a] = i;
    }
    auto body_for = [&](std::size_t term_idx, TranslatorId tr) -> std::string {
        unsigned annot = plan.terms[term_idx].annot;
        auto it = first_pair.find(annot);
        if (it != first_pair.end() && it->second == term_idx) {
            if (annot == (LU | MI))
                return shared_prefix(tr) + ", " + kSharedA1 + ".";
            if (annot == (MA | SO))
                return shared_prefix(tr) + ", " + kSharedA2 + ".";
            return shared_frame_b(tr) + " " + kSharedBTail;
        }
        return voice_body(term_idx, tr, "body");
    };

    // annotation rows in deterministic emission order
    std::vector<NoteRow> rows;
    for (std::size_t i = 0; i < plan.terms.size(); ++i) {
        const TermSpec& t = plan.terms[i];
        const std::string& sid = plan.stories[t.story].id;
        const char* subsystem = kSubsystems[i % 4];
        for (TranslatorId tr : kOrder) {
            if (!(t.annot & tr_bit(tr))) continue;
            rows.push_back({i, tr, sid, t.term, body_for(i, tr), note_kind(i, tr, false),
                            subsystem});
            auto extra = plan.extra_notes.find({i, tr});
            if (extra != plan.extra_notes.end()) {
                for (int d = 0; d < extra->second; ++d)
                    rows.push_back({i, tr, sid, t.term, voice_body(i, tr, "dup"),
                                    note_kind(i, tr, true), subsystem});
            }
        }
    }

    // annotations/annotations.csv
    std::string csv = "story_id,term,translator,subsystem,head_term,kind,body\n";
    for (const NoteRow& r : rows) {
        csv += csv_field(r.story_id) + "," + csv_field(r.term) + "," + short_name(r.tr) + "," +
               r.subsystem + "," + csv_field(r.term) + "," + r.kind + "," + csv_field(r.body) +
               "\n";
    }
    write_text(root / "annotations" / "annotations.csv", csv);

    write_text(root / "annotations" / "corrections.md",
               "# Corrections\n\n"
               "Alignment fixes applied to the annotation table before release:\n\n"
               "- merged duplicate rows that differed only in head-term casing;\n"
               "- re-attached notes whose story id pointed at a neighbouring tale;\n"
               "- normalized translator names to the short forms used in `translator`.\n");

    // source/classical and source/contemporary
    ordered_json classical = ordered_json::array();
    ordered_json contemporary = ordered_json::array();
    for (const StorySpec& s : plan.stories) {
        std::vector<std::string> terms;
        for (std::size_t ti : s.terms) terms.push_back(plan.terms[ti].term);
        std::string title = story_title(s.id);
        std::string content = classical_content(s.id, terms);
        classical.push_back({{"id", s.id}, {"title", title}, {"content", content}});
        contemporary.push_back(
            {{"id", s.id}, {"title", title}, {"content", "今譯：" + content}});
    }
    write_text(root / "source" / "classical" / "main.json", classical.dump(2) + "\n");
    write_text(root / "source" / "contemporary" / "main.json", contemporary.dump(2) + "\n");

    // translations/<edition>/main.json
    for (TranslatorId tr : plan.editions) {
        ordered_json entries = ordered_json::array();
        for (const StorySpec& s : plan.stories) {
            if (!(s.cov & tr_bit(tr))) continue;
            ordered_json notes = ordered_json::array();
            for (const NoteRow& r : rows) {
                if (r.tr != tr || r.story_id != s.id) continue;
                ordered_json note;
                if (plan.explicit_story_id) note["story_id"] = r.story_id;
                note["head_term"] = r.term;
                note["body"] = r.body;
                note["kind"] = r.kind;
                notes.push_back(std::move(note));
            }
            ordered_json entry;
            entry["id"] = s.id;
            entry["title"] = "The tale of " + s.id;
            entry["content"] = "An English rendering of " + s.id + " prepared for the " +
                               translator_folder(tr) + " edition.";
            entry["notes"] = std::move(notes);
            entries.push_back(std::move(entry));
        }
        write_text(root / "translations" / translator_folder(tr) / "main.json",
                   entries.dump(2) + "\n");
    }

    if (!plan.giles_stories.empty()) {
        ordered_json entries = ordered_json::array();
        for (std::size_t si : plan.giles_stories) {
            const StorySpec& s = plan.stories[si];
            ordered_json notes = ordered_json::array();
            for (int j = 0; j < 2; ++j) {
                std::uint64_t h = text::stable_hash("giles:" + s.id + ":" + std::to_string(j));
                ordered_json note;
                note["head_term"] = "";
                note["body"] = std::string("The earliest English edition remarks on the ") +
                               kThings[h % 12] + " customs surrounding this tale.";
                note["kind"] = "footnote";
                notes.push_back(std::move(note));
            }
            ordered_json entry;
            entry["id"] = s.id;
            entry["title"] = "The tale of " + s.id;
            entry["content"] = "An English rendering of " + s.id + " prepared for the " +
                               translator_folder(TranslatorId::giles1880) + " edition.";
            entry["notes"] = std::move(notes);
            entries.push_back(std::move(entry));
        }
        write_text(root / "translations" / translator_folder(TranslatorId::giles1880) /
                       "main.json",
                   entries.dump(2) + "\n");
    }
}

}  // namespace

void write_fixture(const fs::path& root, Profile profile) {
    switch (profile) {
        case Profile::released_stats: write_plan(root, released_plan()); return;
        case Profile::small: write_plan(root, small_plan()); return;
        case Profile::tiny: write_plan(root, tiny_plan()); return;
    }
}

}  // namespace paratext::fixture
