#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace litkg {

enum class ErrorCode {
    parse,
    io,
    format,
    validation,
    not_found,
    bad_request,
    degenerate_query,
    insufficient_data,
    config,
    precondition,
    updating,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so
/// the service and CLI layers can map it to HTTP statuses and exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure at a known input line (1-based).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace litkg
