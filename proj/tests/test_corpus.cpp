#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "paratext/corpus.hpp"
#include "paratext/fixture.hpp"
#include "paratext/text.hpp"

using namespace paratext;
namespace fs = std::filesystem;

namespace {

void put(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

// Minimal hand-written dataset: one story, one edition, one annotation.
fs::path mini_dataset(const std::string& tag) {
    fs::path root = fs::temp_directory_path() / ("paratext_corpus_" + tag);
    fs::remove_all(root);
    put(root / "source" / "classical" / "main.json",
        R"([{"id":"s1","title":"題","content":"世稱江湖，蓋幽冥之事也。"}])");
    put(root / "source" / "contemporary" / "main.json",
        R"([{"id":"s1","title":"題","content":"今譯。"}])");
    put(root / "translations" / "1982_lu_etal" / "main.json",
        R"([{"id":"s1","title":"A tale","content":"An English rendering.",)"
        R"("notes":[{"story_id":"s1","head_term":"江湖","body":"rivers and lakes","kind":"footnote"}]}])");
    put(root / "annotations" / "annotations.csv",
        "story_id,term,translator,subsystem,head_term,kind,body\n"
        "s1,江湖,lu,cultural,江湖,footnote,rivers and lakes\n");
    return root;
}

int count_code(const std::vector<Violation>& vs, const std::string& code) {
    int n = 0;
    for (const Violation& v : vs)
        if (v.code == code) ++n;
    return n;
}

// true iff fn() throws LoadError whose message contains `needle`
template <typename Fn>
bool throws_load_error_with(Fn&& fn, const std::string& needle) {
    try {
        fn();
    } catch (const LoadError& e) {
        return std::string(e.what()).find(needle) != std::string::npos;
    } catch (...) {
        return false;
    }
    return false;
}

}  // namespace

TEST_CASE("load_corpus reads the minimal hand-written dataset") {
    Corpus corpus = load_corpus(mini_dataset("mini"));
    REQUIRE(corpus.stories.size() == 1);
    const Story& st = corpus.stories.at("s1");
    CHECK(st.title == "題");
    CHECK(st.content == "世稱江湖，蓋幽冥之事也。");
    REQUIRE(corpus.editions.count(TranslatorId::lu1982) == 1);
    const Edition& ed = corpus.editions.at(TranslatorId::lu1982);
    CHECK(ed.year == 1982);
    CHECK_FALSE(ed.excluded_from_eval);
    CHECK(ed.story_ids == std::set<std::string>{"s1"});
    REQUIRE(ed.paratexts.size() == 1);
    CHECK(ed.paratexts[0].body == "rivers and lakes");
    CHECK(ed.paratexts[0].kind == ParatextKind::footnote);
    REQUIRE(corpus.aligned_terms.size() == 1);
    const AlignedTerm& at = corpus.aligned_terms[0];
    CHECK(at.term == "江湖");
    CHECK(at.story_id == "s1");
    CHECK(at.subsystem == Subsystem::cultural);
    CHECK(at.consensus_level() == 1);
    CHECK(at.reference_count() == 1);
    CHECK(corpus.load_warnings.empty());
    CHECK(validate(corpus).empty());
}

TEST_CASE("loader errors name the offending path or record") {
    SUBCASE("missing source file") {
        fs::path root = fs::temp_directory_path() / "paratext_corpus_missing";
        fs::remove_all(root);
        fs::create_directories(root);
        CHECK_THROWS_AS(load_corpus(root), LoadError);
    }
    SUBCASE("malformed story JSON") {
        fs::path root = mini_dataset("badjson");
        put(root / "source" / "classical" / "main.json", "{not json");
        CHECK(throws_load_error_with([&] { load_corpus(root); }, "malformed JSON"));
    }
    SUBCASE("story array holds a non-object") {
        fs::path root = mini_dataset("notobj");
        put(root / "source" / "classical" / "main.json", R"(["just a string"])");
        CHECK(throws_load_error_with([&] { load_corpus(root); }, "malformed record"));
    }
    SUBCASE("duplicate story id") {
        fs::path root = mini_dataset("dupid");
        put(root / "source" / "classical" / "main.json",
            R"([{"id":"s1","content":"x"},{"id":"s1","content":"y"}])");
        CHECK(throws_load_error_with([&] { load_corpus(root); }, "duplicate"));
    }
    SUBCASE("annotations missing a required column") {
        fs::path root = mini_dataset("nocol");
        put(root / "annotations" / "annotations.csv", "story_id,term,body\ns1,江湖,x\n");
        CHECK(throws_load_error_with([&] { load_corpus(root); }, "translator"));
    }
    SUBCASE("unknown translator value") {
        fs::path root = mini_dataset("badtr");
        put(root / "annotations" / "annotations.csv",
            "story_id,term,translator,body\ns1,江湖,smith,x\n");
        CHECK(throws_load_error_with([&] { load_corpus(root); }, "translator"));
    }
    SUBCASE("no editions at all") {
        fs::path root = mini_dataset("noed");
        fs::remove_all(root / "translations");
        fs::create_directories(root / "translations");
        CHECK_THROWS_AS(load_corpus(root), LoadError);
    }
}

TEST_CASE("loader warnings are collected, not fatal") {
    SUBCASE("unknown CSV column") {
        fs::path root = mini_dataset("extracol");
        put(root / "annotations" / "annotations.csv",
            "story_id,term,translator,body,confidence\ns1,江湖,lu,rivers and lakes,0.9\n");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(corpus.load_warnings, "unknown_column") == 1);
        CHECK(corpus.aligned_terms.size() == 1);
    }
    SUBCASE("unrecognized subsystem defaults to supplementary") {
        fs::path root = mini_dataset("badsub");
        put(root / "annotations" / "annotations.csv",
            "story_id,term,translator,subsystem,body\ns1,江湖,lu,mystery,x\n");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(corpus.load_warnings, "missing_subsystem") == 1);
        CHECK(corpus.aligned_terms[0].subsystem == Subsystem::supplementary);
    }
    SUBCASE("term absent from story content") {
        fs::path root = mini_dataset("ghostterm");
        put(root / "annotations" / "annotations.csv",
            "story_id,term,translator,body\ns1,長城,lu,the wall\n");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(corpus.load_warnings, "term_not_in_story") == 1);
    }
    SUBCASE("header-only annotations file") {
        fs::path root = mini_dataset("hdronly");
        put(root / "annotations" / "annotations.csv", "story_id,term,translator,body\n");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(corpus.load_warnings, "empty_annotations") == 1);
        CHECK(corpus.aligned_terms.empty());
    }
}

TEST_CASE("CSV quoting: commas, escaped quotes, and newlines inside fields") {
    fs::path root = mini_dataset("quoting");
    put(root / "annotations" / "annotations.csv",
        "story_id,term,translator,body\n"
        "s1,江湖,lu,\"rivers, lakes, and \"\"outlaw\"\" society\nacross two lines\"\n");
    Corpus corpus = load_corpus(root);
    REQUIRE(corpus.aligned_terms.size() == 1);
    const auto& notes = corpus.aligned_terms[0].references.at(TranslatorId::lu1982);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].body ==
          "rivers, lakes, and \"outlaw\" society\nacross two lines");
}

TEST_CASE("multiple notes by one translator on one term accumulate") {
    fs::path root = mini_dataset("multinote");
    put(root / "annotations" / "annotations.csv",
        "story_id,term,translator,kind,body\n"
        "s1,江湖,lu,footnote,first note\n"
        "s1,江湖,lu,endnote,second note\n");
    Corpus corpus = load_corpus(root);
    REQUIRE(corpus.aligned_terms.size() == 1);
    const AlignedTerm& at = corpus.aligned_terms[0];
    CHECK(at.consensus_level() == 1);       // one translator ...
    CHECK(at.reference_count() == 2);       // ... two reference paratexts
    CHECK(at.references.at(TranslatorId::lu1982)[1].kind == ParatextKind::endnote);
}

TEST_CASE("edition notes accept bare-string and object forms") {
    fs::path root = mini_dataset("noteforms");
    put(root / "translations" / "1982_lu_etal" / "main.json",
        R"([{"id":"s1","notes":["a bare string note",)"
        R"({"head_term":"泮","text":"object with text alias","kind":"glossary"}]}])");
    Corpus corpus = load_corpus(root);
    const Edition& ed = corpus.editions.at(TranslatorId::lu1982);
    REQUIRE(ed.paratexts.size() == 2);
    CHECK(ed.paratexts[0].body == "a bare string note");
    CHECK(ed.paratexts[0].story_id == "s1");  // inherited from the entry
    CHECK(ed.paratexts[1].body == "object with text alias");
    CHECK(ed.paratexts[1].kind == ParatextKind::glossary);
}

TEST_CASE("validate flags every documented invariant violation") {
    SUBCASE("empty story content is fatal") {
        fs::path root = mini_dataset("emptystory");
        put(root / "source" / "classical" / "main.json",
            R"([{"id":"s1","title":"t","content":""}])");
        Corpus corpus = load_corpus(root);
        auto vs = validate(corpus);
        CHECK(count_code(vs, "empty_story_content") == 1);
        CHECK(vs[0].fatal);
    }
    SUBCASE("edition story id not in the source") {
        fs::path root = mini_dataset("dangling");
        put(root / "translations" / "1982_lu_etal" / "main.json",
            R"([{"id":"s1"},{"id":"ghost"}])");
        put(root / "annotations" / "annotations.csv",
            "story_id,term,translator,body\ns1,江湖,lu,x\n");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(validate(corpus), "dangling_story_ref") == 1);
    }
    SUBCASE("paratext attached outside the edition's stories") {
        fs::path root = mini_dataset("outside");
        put(root / "translations" / "1982_lu_etal" / "main.json",
            R"([{"id":"s1","notes":[{"story_id":"s2","body":"stray"}]}])");
        put(root / "source" / "classical" / "main.json",
            R"([{"id":"s1","content":"世稱江湖。"},{"id":"s2","content":"他話。"}])");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(validate(corpus), "note_outside_edition") == 1);
    }
    SUBCASE("empty paratext body") {
        fs::path root = mini_dataset("emptybody");
        put(root / "translations" / "1982_lu_etal" / "main.json",
            R"([{"id":"s1","notes":[{"body":""}]}])");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(validate(corpus), "empty_paratext_body") >= 1);
    }
    SUBCASE("annotation by a translator that did not cover the story") {
        fs::path root = mini_dataset("nocover");
        put(root / "translations" / "2006_minford" / "main.json", R"([{"id":"s1"}])");
        // shrink lu's edition so it no longer covers s1
        put(root / "translations" / "1982_lu_etal" / "main.json", "[]");
        Corpus corpus = load_corpus(root);
        CHECK(count_code(validate(corpus), "annotation_without_coverage") == 1);
    }
    SUBCASE("annotation without edition loaded") {
        fs::path root = mini_dataset("noedition");
        put(root / "annotations" / "annotations.csv",
            "story_id,term,translator,body\n"
            "s1,江湖,lu,x\n"
            "s1,幽冥,minford,y\n");  // minford edition directory absent
        Corpus corpus = load_corpus(root);
        CHECK(count_code(validate(corpus), "annotation_without_edition") == 1);
    }
}

TEST_CASE("pooled_terms ordering and story filter") {
    fs::path root = fs::temp_directory_path() / "paratext_corpus_small";
    fs::remove_all(root);
    fixture::write_fixture(root, fixture::Profile::small);
    Corpus corpus = load_corpus(root);
    auto all = pooled_terms(corpus);
    CHECK(all.size() == 16);
    // deterministic (story id, term) order
    for (std::size_t i = 1; i < all.size(); ++i) {
        auto prev = std::make_pair(all[i - 1]->story_id, all[i - 1]->term);
        auto cur = std::make_pair(all[i]->story_id, all[i]->term);
        CHECK(prev < cur);
    }
    auto one = pooled_terms(corpus, all[0]->story_id);
    CHECK(!one.empty());
    for (const AlignedTerm* at : one) CHECK(at->story_id == all[0]->story_id);
    CHECK_THROWS_AS(pooled_terms(corpus, std::string("nope")), std::out_of_range);
}

TEST_CASE("small fixture statistics are exactly the documented plan") {
    fs::path root = fs::temp_directory_path() / "paratext_corpus_small2";
    fs::remove_all(root);
    fixture::write_fixture(root, fixture::Profile::small);
    Corpus corpus = load_corpus(root);
    CHECK(validate(corpus).empty());
    CHECK(corpus.load_warnings.empty());
    CorpusStats stats = corpus_stats(corpus);
    CHECK(stats.story_count == 10);
    CHECK(stats.annotated_story_count == 10);
    CHECK(stats.pooled_term_count == 16);
    CHECK(stats.reference_count == 24);  // 4+3+2+2+2 multi refs + 11 singles
    CHECK(stats.multi_annotated == 5);
    CHECK(stats.consensus.at(1) == 11);
    CHECK(stats.consensus.at(2) == 3);
    CHECK(stats.consensus.at(3) == 1);
    CHECK(stats.consensus.at(4) == 1);
    for (TranslatorId tr : kEvaluatedTranslators)
        CHECK(stats.editions.at(tr).stories == 10);  // every story fully covered
}

TEST_CASE("tiny fixture loads to the hand-written expectation") {
    fs::path root = fs::temp_directory_path() / "paratext_corpus_tiny";
    fs::remove_all(root);
    fixture::write_fixture(root, fixture::Profile::tiny);
    Corpus corpus = load_corpus(root);
    CHECK(corpus.stories.size() == 2);
    CHECK(corpus.stories.count("v1s1") == 1);
    CHECK(corpus.stories.count("v1s2") == 1);
    CHECK(corpus.editions.size() == 3);  // lu, minford, sondergard
    CHECK(corpus.editions.count(TranslatorId::mair1989) == 0);
    REQUIRE(corpus.aligned_terms.size() == 2);
    CHECK(corpus.aligned_terms[0].story_id == "v1s1");
    CHECK(corpus.aligned_terms[1].story_id == "v1s1");
    // terms appear inside the story content after normalization
    for (const AlignedTerm& at : corpus.aligned_terms) {
        std::string norm_content =
            text::normalize_for_match(corpus.stories.at(at.story_id).content);
        CHECK(text::contains_codepoints(norm_content, text::normalize_for_match(at.term)));
    }
    CHECK(validate(corpus).empty());
}

TEST_CASE("dataset_digest: stable for identical trees, sensitive to any byte") {
    fs::path a = fs::temp_directory_path() / "paratext_digest_a";
    fs::path b = fs::temp_directory_path() / "paratext_digest_b";
    fs::remove_all(a);
    fs::remove_all(b);
    fixture::write_fixture(a, fixture::Profile::tiny);
    fixture::write_fixture(b, fixture::Profile::tiny);
    CHECK(dataset_digest(a) == dataset_digest(b));
    // flip one byte
    std::ofstream out(b / "annotations" / "annotations.csv", std::ios::app | std::ios::binary);
    out << " ";
    out.close();
    CHECK(dataset_digest(a) != dataset_digest(b));
}

TEST_CASE("giles edition is loaded but excluded from evaluation") {
    fs::path root = fs::temp_directory_path() / "paratext_corpus_rel";
    fs::remove_all(root);
    fixture::write_fixture(root, fixture::Profile::released_stats);
    Corpus corpus = load_corpus(root);
    REQUIRE(corpus.editions.count(TranslatorId::giles1880) == 1);
    CHECK(corpus.editions.at(TranslatorId::giles1880).excluded_from_eval);
    // giles never appears among aligned-term references
    for (const AlignedTerm& at : corpus.aligned_terms)
        CHECK(at.references.count(TranslatorId::giles1880) == 0);
}
