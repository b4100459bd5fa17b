#include <doctest.h>

#include <litkg/text.hpp>

using namespace litkg;

namespace {

std::vector<std::string> sentence_texts(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& s : split_sentences(text)) out.push_back(s.text);
    return out;
}

}  // namespace

TEST_CASE("tokenize keeps internal hyphens and apostrophes") {
    CHECK(fold_tokens("Set-shifting deficits!") == std::vector<std::string>{"set-shifting", "deficits"});
    CHECK(fold_tokens("Parkinson's disease") == std::vector<std::string>{"parkinson's", "disease"});
    CHECK(fold_tokens("A1-receptor") == std::vector<std::string>{"a1-receptor"});
}

TEST_CASE("tokenize separators and edges") {
    CHECK(fold_tokens("").empty());
    CHECK(fold_tokens("-- ' --").empty());
    CHECK(fold_tokens("-leading trailing- 'quoted'") == std::vector<std::string>{"leading", "trailing", "quoted"});
    CHECK(fold_tokens("a--b") == std::vector<std::string>{"a", "b"});
    CHECK(fold_tokens("dopamine,serotonin;GABA") == std::vector<std::string>{"dopamine", "serotonin", "gaba"});
    // U+2019 folds to an ASCII apostrophe
    CHECK(fold_tokens("Parkinson\xE2\x80\x99s") == std::vector<std::string>{"parkinson's"});
}

TEST_CASE("token spans index the original text") {
    const std::string text = "  Dopamine, PFC.";
    const auto tokens = tokenize(text);
    REQUIRE(tokens.size() == 2);
    CHECK(text.substr(tokens[0].span.begin, tokens[0].span.end - tokens[0].span.begin) == "Dopamine");
    CHECK(text.substr(tokens[1].span.begin, tokens[1].span.end - tokens[1].span.begin) == "PFC");
}

TEST_CASE("sentence splitting") {
    CHECK(sentence_texts("Dopamine modulates memory. The cortex is large.") ==
          std::vector<std::string>{"Dopamine modulates memory.", "The cortex is large."});
    CHECK(sentence_texts("Deficits (e.g. memory loss) occur. More follows.") ==
          std::vector<std::string>{"Deficits (e.g. memory loss) occur.", "More follows."});
    CHECK(split_sentences("").empty());
    CHECK(split_sentences("   ").empty());
}

TEST_CASE("abbreviations and lowercase continuations do not split") {
    CHECK(sentence_texts("Smith et al. Reported it. Fig. 2 shows it.") ==
          std::vector<std::string>{"Smith et al. Reported it.", "Fig. 2 shows it."});
    CHECK(sentence_texts("Values rose vs. Controls. ok.") == std::vector<std::string>{"Values rose vs. Controls. ok."});
    CHECK(sentence_texts("It rose by 3.5 units. Then fell!  Why? 42 cases.") ==
          std::vector<std::string>{"It rose by 3.5 units.", "Then fell!", "Why?", "42 cases."});
}

TEST_CASE("sentence spans cover the text up to whitespace") {
    const std::string text = " One here.  Two there.\nThree ";
    const auto sentences = split_sentences(text);
    REQUIRE(sentences.size() == 3);
    std::size_t prev_end = 0;
    for (const auto& s : sentences) {
        CHECK(text.substr(s.span.begin, s.span.end - s.span.begin) == s.text);
        for (std::size_t i = prev_end; i < s.span.begin; ++i) CHECK(std::isspace(static_cast<unsigned char>(text[i])));
        prev_end = s.span.end;
        CHECK_FALSE(s.tokens.empty());
    }
}
