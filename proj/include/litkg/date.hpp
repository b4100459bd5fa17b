#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace litkg {

using Date = std::chrono::year_month_day;

/// Accepts "YYYY-MM-DD", "YYYY-MM" and "YYYY". Missing parts normalize to the
/// first of the period. Returns nullopt for anything else or an invalid date.
std::optional<Date> parse_date(std::string_view text);

/// Throws Error(parse) on failure.
Date parse_date_or_throw(std::string_view text);

std::string format_date(const Date& date);

Date today_utc();

}  // namespace litkg
