#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace litkg {

/// Byte offsets [begin, end) into the text that was tokenized or split.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Span&) const = default;
};

struct Token {
    std::string folded;
    Span span;
};

struct Sentence {
    std::string text;
    Span span;  // position within the text passed to split_sentences
    std::vector<Token> tokens;
};

/// Tokens are maximal runs of letters and digits. A hyphen or apostrophe is
/// kept when it sits between two word characters. Everything else separates.
/// Folding lowercases ASCII and maps U+2019 to an ASCII apostrophe.
///
/// The lexicon tokenizes surface forms with this same function, so a change
/// here changes what every synonym matches.
std::vector<Token> tokenize(std::string_view text);

/// Folded token strings only.
std::vector<std::string> fold_tokens(std::string_view text);

/// A '.', '!' or '?' followed by whitespace and then an uppercase letter or a
/// digit ends a sentence, unless the terminator closes a known abbreviation
/// ("e.g.", "i.e.", "et al.", "vs.", "Fig.", "cf.", "approx."). Sentence
/// spans exclude surrounding whitespace; the gaps between spans contain only
/// whitespace. Each sentence is tokenized.
std::vector<Sentence> split_sentences(std::string_view text);

}  // namespace litkg
