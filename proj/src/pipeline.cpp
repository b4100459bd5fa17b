#include <litkg/error.hpp>
#include <litkg/pipeline.hpp>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <ctime>
#include <sstream>

namespace litkg {

namespace {

std::shared_ptr<spdlog::logger> make_logger() {
    auto logger = spdlog::stderr_logger_mt("litkg");
    logger->set_pattern("%v");
    logger->flush_on(spdlog::level::info);
    return logger;
}

spdlog::logger& logger() {
    static const auto instance = make_logger();
    return *instance;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t secs = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[40];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[48];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
    return out;
}

}  // namespace

void log_event(std::string_view level, std::string_view event, nlohmann::ordered_json fields) {
    nlohmann::ordered_json line;
    line["ts"] = utc_timestamp();
    line["level"] = level;
    line["event"] = event;
    if (fields.is_object()) {
        for (auto& [k, v] : fields.items()) line[k] = std::move(v);
    }
    const auto text = line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    if (level == "error") {
        logger().error(text);
    } else if (level == "warn") {
        logger().warn(text);
    } else {
        logger().info(text);
    }
}

void set_quiet_logging(bool quiet) { logger().set_level(quiet ? spdlog::level::err : spdlog::level::info); }

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_fields(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string field;
    while (in >> field) out.push_back(field);
    return out;
}

std::vector<int> parse_cron_field(const std::string& field, int max, const char* name) {
    if (field == "*") return {};
    std::vector<int> values;
    std::size_t pos = 0;
    while (pos <= field.size()) {
        const auto comma = field.find(',', pos);
        const auto end = comma == std::string::npos ? field.size() : comma;
        int v = -1;
        const auto [ptr, ec] = std::from_chars(field.data() + pos, field.data() + end, v);
        if (ec != std::errc() || ptr != field.data() + end || v < 0 || v > max) {
            throw Error(ErrorCode::config, std::string("bad ") + name + " field '" + field + "' in schedule");
        }
        values.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

bool matches(const std::vector<int>& allowed, int value) {
    return allowed.empty() || std::binary_search(allowed.begin(), allowed.end(), value);
}

}  // namespace

Schedule Schedule::parse(std::string_view expression, int utc_offset_minutes) {
    const auto fields = split_fields(expression);
    if (fields.size() != 5) throw Error(ErrorCode::config, "schedule needs 5 fields: '" + std::string(expression) + "'");
    for (std::size_t i = 2; i < 5; ++i) {
        if (fields[i] != "*") throw Error(ErrorCode::config, "only '*' is supported for day, month and weekday");
    }
    if (utc_offset_minutes <= -24 * 60 || utc_offset_minutes >= 24 * 60) {
        throw Error(ErrorCode::config, "utc offset out of range");
    }
    Schedule s;
    s.expression_ = std::string(expression);
    s.minutes_ = parse_cron_field(fields[0], 59, "minute");
    s.hours_ = parse_cron_field(fields[1], 23, "hour");
    s.offset_minutes_ = utc_offset_minutes;
    return s;
}

std::chrono::system_clock::time_point Schedule::next_after(std::chrono::system_clock::time_point after) const {
    using namespace std::chrono;
    const auto offset = minutes(offset_minutes_);
    auto local = floor<minutes>(after + offset) + minutes(1);
    for (int i = 0; i < 2 * 24 * 60; ++i, local += minutes(1)) {
        const auto in_day = local - floor<days>(local);
        const auto h = static_cast<int>(duration_cast<hours>(in_day).count());
        const auto m = static_cast<int>(duration_cast<minutes>(in_day).count() % 60);
        if (matches(hours_, h) && matches(minutes_, m)) {
            return time_point_cast<system_clock::duration>(local - offset);
        }
    }
    throw Error(ErrorCode::config, "schedule never fires");
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out, std::set<std::string>& seen) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    seen.insert(key);
    try {
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!it->is_number_integer()) throw Error(ErrorCode::config, "");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->get<std::int64_t>() < 0) throw Error(ErrorCode::config, "");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw Error(ErrorCode::config, "");
        }
        out = it->get<T>();
    } catch (const std::exception&) {
        throw Error(ErrorCode::config, std::string("config field '") + key + "' has the wrong type");
    }
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& seen, const std::string& where) {
    for (const auto& [k, v] : obj.items()) {
        if (!seen.count(k)) throw Error(ErrorCode::config, "unknown config key '" + where + k + "'");
    }
}

void expect_object(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::config, where + " must be a JSON object");
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    expect_object(j, "config");
    PipelineConfig c;
    std::set<std::string> seen;
    if (auto it = j.find("walk"); it != j.end()) {
        seen.insert("walk");
        expect_object(*it, "walk");
        std::set<std::string> w;
        read_field(*it, "p", c.walk.p, w);
        read_field(*it, "q", c.walk.q, w);
        read_field(*it, "walk_length", c.walk.walk_length, w);
        read_field(*it, "walks_per_node", c.walk.walks_per_node, w);
        read_field(*it, "seed", c.walk.seed, w);
        read_field(*it, "workers", c.walk.workers, w);
        read_field(*it, "alias_memory_limit", c.walk.alias_memory_limit, w);
        std::string sampler = "automatic";
        read_field(*it, "sampler", sampler, w);
        if (sampler == "automatic") {
            c.walk.sampler = NeighborSampler::automatic;
        } else if (sampler == "alias") {
            c.walk.sampler = NeighborSampler::alias;
        } else if (sampler == "rejection") {
            c.walk.sampler = NeighborSampler::rejection;
        } else {
            throw Error(ErrorCode::config, "walk.sampler must be automatic, alias or rejection");
        }
        reject_unknown(*it, w, "walk.");
    }
    if (auto it = j.find("sgns"); it != j.end()) {
        seen.insert("sgns");
        expect_object(*it, "sgns");
        std::set<std::string> s;
        read_field(*it, "dimension", c.sgns.dimension, s);
        read_field(*it, "window", c.sgns.window, s);
        read_field(*it, "epochs", c.sgns.epochs, s);
        read_field(*it, "negative_samples", c.sgns.negative_samples, s);
        read_field(*it, "initial_lr", c.sgns.initial_lr, s);
        read_field(*it, "min_lr", c.sgns.min_lr, s);
        read_field(*it, "seed", c.sgns.seed, s);
        read_field(*it, "workers", c.sgns.workers, s);
        reject_unknown(*it, s, "sgns.");
    }
    read_field(j, "schedule", c.schedule, seen);
    read_field(j, "utc_offset_minutes", c.utc_offset_minutes, seen);
    read_field(j, "holdout_k", c.holdout_k, seen);
    read_field(j, "negative_ratio", c.negative_ratio, seen);
    read_field(j, "eval_seed", c.eval_seed, seen);
    reject_unknown(j, seen, "");

    c.walk.validate();
    c.sgns.validate();
    Schedule::parse(c.schedule, c.utc_offset_minutes);
    if (c.holdout_k == 0) throw Error(ErrorCode::config, "holdout_k must be at least 1");
    if (!(c.negative_ratio > 0.0)) throw Error(ErrorCode::config, "negative_ratio must be positive");
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::config, path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::ordered_json PipelineConfig::to_json() const {
    nlohmann::ordered_json j;
    const char* sampler = walk.sampler == NeighborSampler::alias       ? "alias"
                          : walk.sampler == NeighborSampler::rejection ? "rejection"
                                                                       : "automatic";
    j["walk"] = {{"p", walk.p},
                 {"q", walk.q},
                 {"walk_length", walk.walk_length},
                 {"walks_per_node", walk.walks_per_node},
                 {"seed", walk.seed},
                 {"workers", walk.workers},
                 {"sampler", sampler},
                 {"alias_memory_limit", walk.alias_memory_limit}};
    j["sgns"] = {{"dimension", sgns.dimension},
                 {"window", sgns.window},
                 {"epochs", sgns.epochs},
                 {"negative_samples", sgns.negative_samples},
                 {"initial_lr", sgns.initial_lr},
                 {"min_lr", sgns.min_lr},
                 {"seed", sgns.seed},
                 {"workers", sgns.workers}};
    j["schedule"] = schedule;
    j["utc_offset_minutes"] = utc_offset_minutes;
    j["holdout_k"] = holdout_k;
    j["negative_ratio"] = negative_ratio;
    j["eval_seed"] = eval_seed;
    return j;
}

// ---------------------------------------------------------------------------

std::size_t IngestReport::processed() const {
    return static_cast<std::size_t>(std::count_if(files.begin(), files.end(), [](const auto& f) { return f.ok; }));
}

std::size_t IngestReport::failed() const { return files.size() - processed(); }

nlohmann::ordered_json IngestReport::to_json() const {
    nlohmann::ordered_json j;
    j["processed"] = processed();
    j["failed"] = failed();
    auto& list = j["files"];
    list = nlohmann::ordered_json::array();
    for (const auto& f : files) {
        nlohmann::ordered_json row;
        row["file"] = f.file;
        row["ok"] = f.ok;
        row["records"] = f.records;
        row["skipped_records"] = f.skipped_records;
        row["triples"] = f.triples;
        if (!f.ok) row["error"] = f.error;
        list.push_back(std::move(row));
    }
    return j;
}

namespace {

std::shared_ptr<const Lexicon> load_lexicon_for(const PipelineOptions& options) {
    const Stoplist stoplist = options.stoplist_path ? load_stoplist_file(*options.stoplist_path) : Stoplist{};
    return std::make_shared<const Lexicon>(load_lexicon_file(options.lexicon_path, stoplist));
}

}  // namespace

Pipeline::Pipeline(PipelineOptions options)
    : options_(std::move(options)),
      dir_(options_.data_dir),
      lock_(dir_.lock_path()),
      lexicon_(load_lexicon_for(options_)),
      index_(compile_surface_index(*lexicon_)),
      species_(options_.species_path ? SpeciesLexicon::load_file(*options_.species_path) : SpeciesLexicon::bundled()),
      store_(lexicon_) {
    auto recovered = recover(dir_, lexicon_);
    store_ = std::move(recovered.store);
    if (recovered.snapshot) holder_.replace(std::move(recovered.snapshot));
    const auto& report = lexicon_->report();
    log_event("info", "pipeline_open",
              {{"data_dir", dir_.root().string()},
               {"concepts", lexicon_->size()},
               {"enabled", lexicon_->enabled_count()},
               {"synonym_collisions", report.collisions.size()},
               {"stoplisted", report.stoplisted.size()},
               {"triples", store_.state().triple_count()},
               {"snapshot_id", holder_.current()->id}});
}

Pipeline::~Pipeline() { wait_for_update(); }

IngestReport Pipeline::ingest(const std::filesystem::path& update_dir) {
    std::lock_guard guard(writer_mutex_);
    ProcessedLedger ledger(dir_.ledger_path());
    IngestReport report;
    auto hook = [&](std::string_view stage, const std::string& file) {
        if (options_.fault_hook) options_.fault_hook(stage, file);
    };
    for (const auto& name : pending_update_files(update_dir, ledger.entries())) {
        FileOutcome outcome;
        outcome.file = name;
        try {
            const Date today = options_.today();
            const auto batch = parse_article_file(update_dir / name, today);
            hook("parsed", name);
            std::vector<ArticleTriples> articles;
            articles.reserve(batch.records.size());
            for (const auto& record : batch.records) {
                articles.push_back({record.article_id, extract_relations(record, index_, species_, today)});
                outcome.triples += articles.back().triples.size();
            }
            dir_.append_log(articles);
            hook("logged", name);
            store_.replace_articles(articles);
            hook("inserted", name);
            ledger.append(name);
            outcome.ok = true;
            outcome.records = batch.records.size();
            outcome.skipped_records = batch.skipped_count;
            log_event("info", "file_ingested",
                      {{"file", name},
                       {"records", outcome.records},
                       {"skipped_records", outcome.skipped_records},
                       {"triples", outcome.triples}});
        } catch (const Error& e) {
            outcome.ok = false;
            outcome.triples = 0;
            outcome.error = e.what();
            log_event("error", "file_failed",
                      {{"file", name}, {"code", std::string(to_string(e.code()))}, {"message", e.what()}});
        }
        report.files.push_back(std::move(outcome));
    }
    return report;
}

std::uint64_t Pipeline::rebuild() {
    std::lock_guard guard(writer_mutex_);
    const auto started = std::chrono::steady_clock::now();
    const auto state = store_.share();
    if (state->relation_count() == 0) throw Error(ErrorCode::insufficient_data, "the store holds no relations");
    auto graph = std::make_shared<const RelationGraph>(build_graph(*state));
    const auto walks = generate_walks(*graph, options_.config.walk);
    auto embedding = std::make_shared<const EmbeddingModel>(
        train_embeddings(walks, graph->names(), options_.config.sgns));
    const std::uint64_t log_offset = dir_.log_size();
    auto snapshot = publish_snapshot(store_, std::move(embedding), std::move(graph));
    dir_.write_generation(*snapshot, log_offset);
    holder_.replace(snapshot);
    log_event("info", "snapshot_published",
              {{"snapshot_id", snapshot->id},
               {"concepts", snapshot->graph->node_count()},
               {"relations", snapshot->store->relation_count()},
               {"walks", walks.size()},
               {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}});
    return snapshot->id;
}

std::uint64_t Pipeline::update() {
    if (options_.updates_dir) ingest(*options_.updates_dir);
    return rebuild();
}

std::optional<std::uint64_t> Pipeline::start_update() {
    bool expected = false;
    if (!busy_.compare_exchange_strong(expected, true)) return std::nullopt;
    if (worker_.joinable()) worker_.join();
    const std::uint64_t next_id = store_.last_snapshot_id() + 1;
    worker_ = std::thread([this] {
        try {
            update();
        } catch (const std::exception& e) {
            log_event("error", "update_failed", {{"message", e.what()}});
        }
        busy_.store(false);
    });
    return next_id;
}

void Pipeline::wait_for_update() {
    if (worker_.joinable()) worker_.join();
}

// ---------------------------------------------------------------------------

bool SystemClock::sleep_until(std::chrono::system_clock::time_point t, const std::atomic<bool>& stop) {
    while (!stop.load()) {
        const auto now = std::chrono::system_clock::now();
        if (now >= t) return true;
        std::this_thread::sleep_for(std::min<std::chrono::system_clock::duration>(t - now, std::chrono::seconds(1)));
    }
    return false;
}

LoopStats run_update_loop(const Schedule& schedule, Clock& clock,
                          const std::function<std::optional<std::uint64_t>()>& start, const std::atomic<bool>& stop,
                          std::optional<std::size_t> max_ticks) {
    LoopStats stats;
    while (!stop.load() && (!max_ticks || stats.ticks < *max_ticks)) {
        const auto next = schedule.next_after(clock.now());
        if (!clock.sleep_until(next, stop)) break;
        ++stats.ticks;
        try {
            if (auto id = start()) {
                ++stats.started;
                log_event("info", "update_started", {{"snapshot_building", *id}});
            } else {
                ++stats.skipped_busy;
                log_event("warn", "tick_skipped", {{"reason", "update already running"}});
            }
        } catch (const std::exception& e) {
            ++stats.failed;
            log_event("error", "update_failed", {{"message", e.what()}});
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------

namespace {

void write_outputs(const nlohmann::ordered_json& report, const std::vector<RocPoint>* roc,
                   const EvalOutputs& outputs) {
    if (outputs.report_json) write_file_atomically(*outputs.report_json, report.dump(2) + "\n");
    if (outputs.roc_csv && roc) {
        std::ostringstream csv;
        write_roc_csv(csv, *roc);
        write_file_atomically(*outputs.roc_csv, csv.str());
    }
}

}  // namespace

AurocReport eval_auroc(const Snapshot& snapshot, const PipelineConfig& config, std::optional<double> holdout_fraction,
                       const EvalOutputs& outputs) {
    if (!snapshot.embedding || !snapshot.graph) {
        throw Error(ErrorCode::insufficient_data, "no embedding published yet; run rebuild first");
    }
    AurocReport report;
    nlohmann::ordered_json j;
    if (holdout_fraction) {
        const auto split = split_edges(*snapshot.graph, *holdout_fraction, config.eval_seed);
        const auto walks = generate_walks(split.train, config.walk);
        const auto model = train_embeddings(walks, split.train.names(), config.sgns);
        report = auroc_held_out_edges(*snapshot.graph, split, model, config.negative_ratio, config.eval_seed);
        j = to_json(report);
        j["mode"] = "held_out_edges";
        j["holdout_fraction"] = *holdout_fraction;
    } else {
        report = auroc_link_prediction(*snapshot.graph, *snapshot.embedding, config.negative_ratio, config.eval_seed);
        j = to_json(report);
        j["mode"] = "training_graph";
    }
    j["snapshot_id"] = snapshot.id;
    write_outputs(j, &report.roc, outputs);
    return report;
}

AurocReport eval_auroc_planted(const PlantedPartition& params, const PipelineConfig& config,
                               const EvalOutputs& outputs) {
    const auto graph = planted_partition(params);
    const auto walks = generate_walks(graph, config.walk);
    const auto model = train_embeddings(walks, graph.names(), config.sgns);
    auto report = auroc_link_prediction(graph, model, config.negative_ratio, config.eval_seed);
    auto j = to_json(report);
    j["mode"] = "planted_partition";
    j["graph"] = {{"blocks", params.blocks},
                  {"block_size", params.block_size},
                  {"p_in", params.p_in},
                  {"p_out", params.p_out},
                  {"seed", params.seed},
                  {"nodes", graph.node_count()},
                  {"edges", graph.edge_count()}};
    write_outputs(j, &report.roc, outputs);
    return report;
}

HoldoutReport eval_holdout(const StoreState& store, Date cutoff, const PipelineConfig& config,
                           const EvalOutputs& outputs) {
    auto report = temporal_holdout(store, cutoff, config.walk, config.sgns, config.holdout_k);
    write_outputs(to_json(report), nullptr, outputs);
    return report;
}

}  // namespace litkg
