#pragma once

#include <litkg/corpus.hpp>
#include <litkg/embedding.hpp>
#include <litkg/eval.hpp>
#include <litkg/extractor.hpp>
#include <litkg/fsutil.hpp>
#include <litkg/lexicon.hpp>
#include <litkg/snapshot.hpp>
#include <litkg/walk.hpp>

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace litkg {

/// Writes one JSON object per line to stderr: {"ts", "level", "event", ...fields}.
void log_event(std::string_view level, std::string_view event, nlohmann::ordered_json fields = {});
/// Silences log_event below "error" (tests) or restores it.
void set_quiet_logging(bool quiet);

/// Cron-like "minute hour day-of-month month day-of-week". Minute and hour
/// accept a number, a comma list or "*"; the other three fields must be "*".
/// Times are interpreted at a fixed offset from UTC.
class Schedule {
public:
    static Schedule parse(std::string_view expression, int utc_offset_minutes = 0);

    /// First tick strictly after `after`.
    std::chrono::system_clock::time_point next_after(std::chrono::system_clock::time_point after) const;
    const std::string& expression() const { return expression_; }

private:
    std::string expression_;
    std::vector<int> minutes_;  // sorted, empty means every minute
    std::vector<int> hours_;
    int offset_minutes_ = 0;
};

struct PipelineConfig {
    WalkConfig walk;
    SGNSConfig sgns;
    std::string schedule = "30 0 * * *";
    int utc_offset_minutes = 480;
    std::size_t holdout_k = 40;
    double negative_ratio = 1.0;
    std::uint64_t eval_seed = 1;

    /// Unknown keys and ill-typed values throw Error(config).
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
};

struct PipelineOptions {
    std::filesystem::path data_dir;
    std::filesystem::path lexicon_path;
    std::optional<std::filesystem::path> stoplist_path;
    std::optional<std::filesystem::path> species_path;  // bundled species table when absent
    std::optional<std::filesystem::path> updates_dir;   // for scheduled and triggered updates
    PipelineConfig config;
    /// Extraction date stamped on new triples.
    std::function<Date()> today = today_utc;
    /// Called at named points ("parsed", "logged", "inserted") with the file
    /// name; throwing from it simulates a crash at that point.
    std::function<void(std::string_view stage, const std::string& file)> fault_hook;
};

struct FileOutcome {
    std::string file;
    bool ok = false;
    std::size_t records = 0;
    std::size_t skipped_records = 0;
    std::size_t triples = 0;
    std::string error;
};

struct IngestReport {
    std::vector<FileOutcome> files;
    std::size_t processed() const;
    std::size_t failed() const;
    nlohmann::ordered_json to_json() const;
};

/// Owns the data directory's writer role (LOCK), the store, and the
/// published snapshot. Readers go through holder().
class Pipeline {
public:
    explicit Pipeline(PipelineOptions options);
    ~Pipeline();
    Pipeline(const Pipeline&) = delete;
    Pipeline& operator=(const Pipeline&) = delete;

    /// Processes every pending file in name order. The ledger records a file
    /// only after its triples are in the log and the store; a file that fails
    /// to parse is reported and left pending.
    IngestReport ingest(const std::filesystem::path& update_dir);

    /// Builds graph and embeddings from the current store, persists the new
    /// generation, then swaps it in. Throws Error(insufficient_data) on an
    /// empty store.
    std::uint64_t rebuild();

    /// ingest(updates_dir) then rebuild().
    std::uint64_t update();

    /// Runs update() on a background thread unless one is running. Returns
    /// the id the new snapshot will get, or nullopt when busy.
    std::optional<std::uint64_t> start_update();
    bool updating() const { return busy_.load(); }
    void wait_for_update();

    const SnapshotHolder& holder() const { return holder_; }
    const Store& store() const { return store_; }
    const DataDir& data_dir() const { return dir_; }
    const PipelineOptions& options() const { return options_; }
    std::shared_ptr<const Lexicon> lexicon() const { return lexicon_; }

private:
    PipelineOptions options_;
    DataDir dir_;
    FileLock lock_;
    std::shared_ptr<const Lexicon> lexicon_;
    SurfaceIndex index_;
    SpeciesLexicon species_;
    Store store_;
    SnapshotHolder holder_;
    std::mutex writer_mutex_;
    std::atomic<bool> busy_{false};
    std::thread worker_;
};

/// Source of time for the update loop; tests substitute a fake.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::chrono::system_clock::time_point now() = 0;
    /// Returns false if woken early by stop.
    virtual bool sleep_until(std::chrono::system_clock::time_point t, const std::atomic<bool>& stop) = 0;
};

class SystemClock : public Clock {
public:
    std::chrono::system_clock::time_point now() override { return std::chrono::system_clock::now(); }
    bool sleep_until(std::chrono::system_clock::time_point t, const std::atomic<bool>& stop) override;
};

struct LoopStats {
    std::size_t ticks = 0;
    std::size_t started = 0;
    std::size_t skipped_busy = 0;
    std::size_t failed = 0;
};

/// Waits for each schedule tick and calls `start`. A tick that finds an
/// update already running (start returns nullopt) is skipped; exceptions are
/// logged and the loop continues. Stops after max_ticks ticks or when `stop`
/// is set.
LoopStats run_update_loop(const Schedule& schedule, Clock& clock,
                          const std::function<std::optional<std::uint64_t>()>& start,
                          const std::atomic<bool>& stop, std::optional<std::size_t> max_ticks = std::nullopt);

struct EvalOutputs {
    std::optional<std::filesystem::path> report_json;
    std::optional<std::filesystem::path> roc_csv;
};

/// AUROC of the current snapshot's embedding. With holdout_fraction, a new
/// model is trained on the graph minus the held-out edges instead.
AurocReport eval_auroc(const Snapshot& snapshot, const PipelineConfig& config,
                       std::optional<double> holdout_fraction, const EvalOutputs& outputs);
/// AUROC on a planted-partition graph trained with the configured settings.
AurocReport eval_auroc_planted(const PlantedPartition& params, const PipelineConfig& config,
                               const EvalOutputs& outputs);
HoldoutReport eval_holdout(const StoreState& store, Date cutoff, const PipelineConfig& config,
                           const EvalOutputs& outputs);

}  // namespace litkg
