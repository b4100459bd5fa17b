#pragma once

#include <litkg/embedding.hpp>
#include <litkg/graph.hpp>
#include <litkg/store.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace litkg {

/// Immutable bundle served to readers. Everything behind the pointers is
/// const and never changes after publication.
struct Snapshot {
    std::uint64_t id = 0;
    std::chrono::system_clock::time_point created_at{};
    std::shared_ptr<const StoreState> store;
    std::shared_ptr<const RelationGraph> graph;
    std::shared_ptr<const EmbeddingModel> embedding;  // may be null
};

/// Freezes the store's current state with id = previous + 1.
std::shared_ptr<const Snapshot> publish_snapshot(Store& store,
                                                 std::shared_ptr<const EmbeddingModel> embedding,
                                                 std::shared_ptr<const RelationGraph> graph = nullptr);

/// The one replaceable reference that every reader goes through.
class SnapshotHolder {
public:
    SnapshotHolder();
    explicit SnapshotHolder(std::shared_ptr<const Snapshot> initial);

    std::shared_ptr<const Snapshot> current() const;
    void replace(std::shared_ptr<const Snapshot> next);

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const Snapshot> current_;
};

/// On-disk layout of a data directory:
///
///   triples.log          JSON Lines, append-only; one line per article
///                        revision: {"article_id": ..., "triples": [...]}
///   processed.ledger     processed update file names
///   index/<gen>/         meta.json, summaries.jsonl, stats.jsonl and
///                        embeddings.kfem for one published generation
///   MANIFEST             "generation <gen>\n", replaced atomically after the
///                        generation directory is complete
///   LOCK                 writer lock
class DataDir {
public:
    explicit DataDir(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path log_path() const { return root_ / "triples.log"; }
    std::filesystem::path ledger_path() const { return root_ / "processed.ledger"; }
    std::filesystem::path manifest_path() const { return root_ / "MANIFEST"; }
    std::filesystem::path lock_path() const { return root_ / "LOCK"; }
    std::filesystem::path generation_dir(std::uint64_t generation) const;

    /// Appends one line per article and fsyncs.
    void append_log(std::span<const ArticleTriples> articles) const;
    std::uint64_t log_size() const;

    /// Parses complete lines of triples.log in [from, to) byte range. An
    /// unterminated final line (torn write) is ignored.
    std::vector<ArticleTriples> read_log(std::uint64_t from, std::uint64_t to) const;

    /// Generation named by MANIFEST, if any.
    std::optional<std::uint64_t> current_generation() const;

    /// Writes index/<gen>/ through a temporary directory, then MANIFEST.
    void write_generation(const Snapshot& snapshot, std::uint64_t log_offset) const;

    struct GenerationMeta {
        std::uint64_t snapshot_id = 0;
        std::int64_t created_at_ms = 0;
        std::uint64_t log_offset = 0;
        bool has_embedding = false;
    };
    GenerationMeta read_generation_meta(std::uint64_t generation) const;

    /// Checks that every file listed in meta.json exists with its recorded size
    /// and checksum.
    bool generation_complete(std::uint64_t generation) const;

    /// Removes leftover temporary generation directories.
    void clean_partial_generations() const;

private:
    std::filesystem::path root_;
};

/// Rebuilds the writer store and the last published snapshot from disk.
struct RecoveredState {
    Store store;
    std::shared_ptr<const Snapshot> snapshot;  // null when nothing was published
};
RecoveredState recover(const DataDir& dir, std::shared_ptr<const Lexicon> lexicon);

}  // namespace litkg
