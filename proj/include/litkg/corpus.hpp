#pragma once

#include <litkg/date.hpp>

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace litkg {

struct ArticleRecord {
    std::string article_id;
    std::string title;
    std::string abstract_text;
    Date pub_date{};
    std::string citation;
    std::string source_file;
    Date fetch_date{};

    bool operator==(const ArticleRecord&) const = default;
};

struct UpdateBatch {
    std::string file_name;
    std::vector<ArticleRecord> records;
    std::size_t record_count = 0;
    std::size_t skipped_count = 0;
};

/// Parses a JSON Lines or XML-subset article file. The format is chosen by the
/// first non-whitespace byte ('<' means XML). Malformed records are skipped and
/// counted; a non-empty input without a single good record is a format error.
UpdateBatch parse_article_file(std::istream& in, const std::string& file_name, Date today);
UpdateBatch parse_article_file(const std::filesystem::path& path, Date today);

/// One canonical JSON line (no trailing newline).
std::string to_jsonl(const ArticleRecord& record);

/// Files in `directory` not named in the ledger, sorted by name. Only regular
/// files are considered.
std::vector<std::string> pending_update_files(const std::filesystem::path& directory,
                                              const std::set<std::string>& processed_ledger);

/// Append-only list of processed update file names, one per line.
class ProcessedLedger {
public:
    explicit ProcessedLedger(std::filesystem::path path);

    const std::set<std::string>& entries() const { return entries_; }
    bool contains(const std::string& file_name) const { return entries_.count(file_name) != 0; }
    /// Appends and flushes to disk before returning.
    void append(const std::string& file_name);

private:
    std::filesystem::path path_;
    std::set<std::string> entries_;
};

}  // namespace litkg
