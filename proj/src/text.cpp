#include <litkg/text.hpp>

#include <array>
#include <cstdint>

namespace litkg {

namespace {

struct Codepoint {
    char32_t value = 0;
    std::size_t length = 1;  // bytes
};

// Malformed sequences decode as U+FFFD with length 1 so scanning always advances.
Codepoint decode_at(std::string_view text, std::size_t pos) {
    const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    const unsigned char lead = byte(pos);
    if (lead < 0x80) return {lead, 1};
    std::size_t length = 0;
    char32_t value = 0;
    if ((lead & 0xE0) == 0xC0) {
        length = 2;
        value = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        length = 3;
        value = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        length = 4;
        value = lead & 0x07;
    } else {
        return {0xFFFD, 1};
    }
    if (pos + length > text.size()) return {0xFFFD, 1};
    for (std::size_t i = 1; i < length; ++i) {
        const unsigned char cont = byte(pos + i);
        if ((cont & 0xC0) != 0x80) return {0xFFFD, 1};
        value = (value << 6) | (cont & 0x3F);
    }
    return {value, length};
}

bool is_ascii_alnum(char32_t c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_word_char(char32_t c) {
    if (c < 0x80) return is_ascii_alnum(c);
    if (c == 0xFFFD || c == 0xFEFF) return false;
    if (c >= 0x80 && c <= 0xBF) return c == 0xB5;  // micro sign counts as a letter
    if (c == 0xD7 || c == 0xF7) return false;
    if (c >= 0x2000 && c <= 0x206F) return false;  // general punctuation
    if (c >= 0x2100 && c <= 0x2BFF) return false;  // symbols, arrows, math operators
    if (c >= 0x3000 && c <= 0x303F) return false;
    if (c >= 0xFF00 && c <= 0xFF0F) return false;
    return true;
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }
bool is_hyphen(char32_t c) { return c == '-' || c == 0x2010 || c == 0x2011; }
bool is_joiner(char32_t c) { return is_apostrophe(c) || is_hyphen(c); }

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_sentence(char32_t c) {
    if (c < 0x80) return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return true;  // Latin-1 capitals
    if (c >= 0x391 && c <= 0x3A9) return true;              // Greek capitals
    return false;
}

void append_folded(std::string& out, std::string_view text, std::size_t pos, Codepoint cp) {
    if (cp.value < 0x80) {
        char c = static_cast<char>(cp.value);
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        out.push_back(c);
    } else if (is_apostrophe(cp.value)) {
        out.push_back('\'');
    } else if (is_hyphen(cp.value)) {
        out.push_back('-');
    } else {
        out.append(text.substr(pos, cp.length));
    }
}

constexpr std::array<std::string_view, 7> kAbbreviations = {
    "e.g.", "i.e.", "et al.", "vs.", "fig.", "cf.", "approx.",
};

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// True when text[0, end) finishes with one of the abbreviations as a whole word.
bool ends_with_abbreviation(std::string_view text, std::size_t end) {
    for (std::string_view abbr : kAbbreviations) {
        if (abbr.size() > end) continue;
        const std::size_t start = end - abbr.size();
        bool match = true;
        for (std::size_t i = 0; i < abbr.size(); ++i) {
            if (ascii_lower(text[start + i]) != abbr[i]) {
                match = false;
                break;
            }
        }
        if (!match) continue;
        if (start == 0) return true;
        const unsigned char before = static_cast<unsigned char>(text[start - 1]);
        if (before < 0x80 && !is_ascii_alnum(before)) return true;
    }
    return false;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t pos = 0;
    bool in_token = false;
    Token current;
    while (pos < text.size()) {
        const Codepoint cp = decode_at(text, pos);
        if (is_word_char(cp.value)) {
            if (!in_token) {
                in_token = true;
                current = Token{{}, {pos, pos}};
            }
            append_folded(current.folded, text, pos, cp);
            pos += cp.length;
            current.span.end = pos;
            continue;
        }
        if (in_token && is_joiner(cp.value) && pos + cp.length < text.size()) {
            const Codepoint next = decode_at(text, pos + cp.length);
            if (is_word_char(next.value)) {
                append_folded(current.folded, text, pos, cp);
                pos += cp.length;
                continue;
            }
        }
        if (in_token) {
            tokens.push_back(std::move(current));
            in_token = false;
        }
        pos += cp.length;
    }
    if (in_token) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> fold_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& token : tokenize(text)) out.push_back(std::move(token.folded));
    return out;
}

std::vector<Sentence> split_sentences(std::string_view text) {
    std::vector<Span> spans;
    std::size_t start = 0;
    while (start < text.size() && is_space(text[start])) ++start;

    for (std::size_t pos = start; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t next = pos + 1;
        if (next >= text.size() || !is_space(text[next])) continue;
        while (next < text.size() && is_space(text[next])) ++next;
        if (next >= text.size()) continue;
        if (!starts_sentence(decode_at(text, next).value)) continue;
        if (c == '.' && ends_with_abbreviation(text, pos + 1)) continue;
        spans.push_back({start, pos + 1});
        start = next;
        pos = next - 1;
    }
    std::size_t end = text.size();
    while (end > start && is_space(text[end - 1])) --end;
    if (end > start) spans.push_back({start, end});

    std::vector<Sentence> sentences;
    sentences.reserve(spans.size());
    for (const Span& span : spans) {
        Sentence sentence;
        sentence.text = std::string(text.substr(span.begin, span.end - span.begin));
        sentence.span = span;
        sentence.tokens = tokenize(sentence.text);
        sentences.push_back(std::move(sentence));
    }
    return sentences;
}

}  // namespace litkg
