#include <litkg/date.hpp>
#include <litkg/error.hpp>

#include <charconv>
#include <cstdio>

namespace litkg {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::parse: return "parse";
        case ErrorCode::io: return "io";
        case ErrorCode::format: return "format";
        case ErrorCode::validation: return "validation";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::bad_request: return "bad_request";
        case ErrorCode::degenerate_query: return "degenerate_query";
        case ErrorCode::insufficient_data: return "insufficient_data";
        case ErrorCode::config: return "config";
        case ErrorCode::precondition: return "precondition";
        case ErrorCode::updating: return "updating";
    }
    return "unknown";
}

namespace {

bool parse_fixed_int(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
    int year = 0;
    unsigned month = 1;
    unsigned day = 1;
    if (text.size() < 4 || !parse_fixed_int(text.substr(0, 4), year)) return std::nullopt;
    if (text.size() > 4) {
        if (text.size() < 7 || text[4] != '-') return std::nullopt;
        int m = 0;
        if (!parse_fixed_int(text.substr(5, 2), m)) return std::nullopt;
        month = static_cast<unsigned>(m);
        if (text.size() > 7) {
            if (text.size() != 10 || text[7] != '-') return std::nullopt;
            int d = 0;
            if (!parse_fixed_int(text.substr(8, 2), d)) return std::nullopt;
            day = static_cast<unsigned>(d);
        }
    }
    Date date{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!date.ok()) return std::nullopt;
    return date;
}

Date parse_date_or_throw(std::string_view text) {
    auto date = parse_date(text);
    if (!date) throw Error(ErrorCode::parse, "invalid date '" + std::string(text) + "'");
    return *date;
}

std::string format_date(const Date& date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

Date today_utc() {
    return Date{std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now())};
}

}  // namespace litkg
