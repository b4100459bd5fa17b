#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace litkg {

/// Appends and fsyncs. Throws Error(io).
void append_durably(const std::filesystem::path& path, std::string_view data);

/// Writes to a temporary sibling, fsyncs, then renames over `path` and fsyncs
/// the directory. Readers see either the old or the new content.
void write_file_atomically(const std::filesystem::path& path, std::string_view data);

/// Writes and fsyncs without the rename dance (for files inside a directory
/// that is not yet published).
void write_file_durably(const std::filesystem::path& path, std::string_view data);

std::string read_file(const std::filesystem::path& path);

void fsync_directory(const std::filesystem::path& dir);

/// Exclusive advisory lock on a file, held for the object's lifetime.
class FileLock {
public:
    /// Throws Error(io) when another process holds the lock.
    explicit FileLock(const std::filesystem::path& path);
    ~FileLock();
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

}  // namespace litkg
