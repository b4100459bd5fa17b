#include <doctest.h>

#include <litkg/error.hpp>
#include <litkg/extractor.hpp>
#include <litkg/lexicon.hpp>

#include "oracles.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

using namespace litkg;
using namespace std::chrono;

namespace {

const Date kToday{year{2024}, month{5}, day{1}};

struct Fixture {
    Lexicon lexicon;
    SurfaceIndex index;
};

const Fixture& mini() {
    static const Fixture f = [] {
        const std::filesystem::path dir(LITKG_FIXTURES);
        Lexicon lex = load_lexicon_file(dir / "mini_lexicon.jsonl", load_stoplist_file(dir / "mini_stoplist.txt"));
        SurfaceIndex index = compile_surface_index(lex);
        return Fixture{std::move(lex), std::move(index)};
    }();
    return f;
}

ArticleRecord article(std::string title, std::string abstract_text) {
    ArticleRecord a;
    a.article_id = "A";
    a.title = std::move(title);
    a.abstract_text = std::move(abstract_text);
    a.pub_date = Date{year{2020}, month{1}, day{1}};
    return a;
}

std::vector<std::string> ids(const std::vector<ConceptMention>& mentions) {
    std::vector<std::string> out;
    for (const auto& m : mentions) out.push_back(m.concept_id);
    return out;
}

std::vector<std::pair<std::string, std::string>> pairs(const std::vector<RelationTriple>& triples) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& t : triples) out.emplace_back(t.concept_a, t.concept_b);
    return out;
}

}  // namespace

TEST_CASE("longest match wins and scanning resumes after it") {
    const auto tokens = fold_tokens("working memory capacity and working memory and memory");
    const auto m = match_concepts(tokens, mini().index);
    CHECK(ids(m) == std::vector<std::string>{"working_memory_capacity", "working_memory"});
    CHECK(m[0].token_begin == 0);
    CHECK(m[0].token_end == 3);
    CHECK(m[1].token_begin == 4);
    CHECK(m[1].token_end == 6);
}

TEST_CASE("nested phrase does not also match its inner form") {
    const auto tokens = fold_tokens("the dorsolateral prefrontal cortex");
    CHECK(ids(match_concepts(tokens, mini().index)) == std::vector<std::string>{"dorsolateral_prefrontal_cortex"});
}

TEST_CASE("stoplisted synonyms never match") {
    const auto tokens = fold_tokens("we did see DA in PD but dopamine");
    CHECK(ids(match_concepts(tokens, mini().index)) == std::vector<std::string>{"dopamine"});
}

TEST_CASE("matcher agrees with the naive oracle on the fixture lexicon") {
    const auto forms = oracle::forms_of(mini().lexicon);
    const auto tokens = fold_tokens(
        "Working memory capacity in the prefrontal cortex, PFC, and dorsolateral prefrontal cortex: "
        "levodopa, dopamine and set-shifting in Parkinson's disease.");
    std::uint64_t comparisons = 0;
    const auto got = match_concepts(tokens, mini().index, &comparisons);
    CHECK(got == oracle::naive_match(tokens, forms));
    CHECK(comparisons <= tokens.size() * mini().index.max_phrase_len());
}

TEST_CASE("one triple per distinct pair per sentence") {
    const auto triples = extract_relations(
        article("Dopamine and working memory.",
                "Dopamine and dopamine in the PFC with working memory. Only dopamine here."),
        mini().index, SpeciesLexicon::bundled(), kToday);
    CHECK(pairs(triples) == std::vector<std::pair<std::string, std::string>>{
                                {"dopamine", "working_memory"},
                                {"dopamine", "prefrontal_cortex"},
                                {"dopamine", "working_memory"},
                                {"prefrontal_cortex", "working_memory"},
                            });
    CHECK(triples[0].sentence_index == 0);
    CHECK(triples[0].sentence_text == "Dopamine and working memory.");
    CHECK(triples[1].sentence_index == 1);
    CHECK(triples[1].sentence_text == "Dopamine and dopamine in the PFC with working memory.");
    for (const auto& t : triples) {
        CHECK(t.concept_a < t.concept_b);
        CHECK(t.extraction_date == kToday);
        CHECK(t.pub_date == Date{year{2020}, month{1}, day{1}});
        CHECK(t.article_id == "A");
    }
}

TEST_CASE("no triples from single-concept sentences or empty text") {
    CHECK(extract_relations(article("Dopamine.", "The hippocampus."), mini().index, SpeciesLexicon::bundled(), kToday)
              .empty());
    CHECK(extract_relations(article("", ""), mini().index, SpeciesLexicon::bundled(), kToday).empty());
}

TEST_CASE("species inference") {
    const auto species = SpeciesLexicon::bundled();
    CHECK(infer_species("Dopamine in mice", "Rats and a mouse; also humans.", species) ==
          std::vector<std::string>{"mouse", "rat", "human"});
    CHECK(infer_species("Nothing here", "", species).empty());
    const auto triples = extract_relations(article("Dopamine and working memory in rats.", ""), mini().index,
                                           species, kToday);
    REQUIRE(triples.size() == 1);
    CHECK(triples[0].species == std::vector<std::string>{"rat"});
}

TEST_CASE("species table validation and loading") {
    CHECK_THROWS_AS(SpeciesLexicon({{"a", {"x"}}, {"b", {"x"}}}), Error);
    std::istringstream in(R"({"species": "frog", "surface_forms": ["frog", "frogs", "xenopus laevis"]})"
                          "\n");
    const auto s = SpeciesLexicon::load(in);
    CHECK(infer_species("Xenopus laevis tadpoles", "", s) == std::vector<std::string>{"frog"});
}

TEST_CASE("triple JSON round-trip") {
    RelationTriple t{"a", "b", "A1", "S.", 2, Date{year{2020}, month{2}, day{3}}, kToday, {"mouse"}};
    nlohmann::json j = t;
    CHECK(j.get<RelationTriple>() == t);
}
