#include <litkg/error.hpp>
#include <litkg/fsutil.hpp>
#include <litkg/snapshot.hpp>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace litkg {

std::shared_ptr<const Snapshot> publish_snapshot(Store& store,
                                                 std::shared_ptr<const EmbeddingModel> embedding,
                                                 std::shared_ptr<const RelationGraph> graph) {
    auto snapshot = std::make_shared<Snapshot>();
    snapshot->id = store.last_snapshot_id() + 1;
    snapshot->created_at = std::chrono::system_clock::now();
    snapshot->store = store.share();
    snapshot->graph = graph ? std::move(graph)
                            : std::make_shared<const RelationGraph>(build_graph(*snapshot->store));
    snapshot->embedding = std::move(embedding);
    store.set_last_snapshot_id(snapshot->id);
    return snapshot;
}

SnapshotHolder::SnapshotHolder() {
    auto empty = std::make_shared<Snapshot>();
    empty->store = std::make_shared<const StoreState>();
    empty->graph = std::make_shared<const RelationGraph>();
    current_ = std::move(empty);
}

SnapshotHolder::SnapshotHolder(std::shared_ptr<const Snapshot> initial) : current_(std::move(initial)) {}

std::shared_ptr<const Snapshot> SnapshotHolder::current() const {
    std::lock_guard lock(mutex_);
    return current_;
}

void SnapshotHolder::replace(std::shared_ptr<const Snapshot> next) {
    std::lock_guard lock(mutex_);
    current_.swap(next);
    // the previous snapshot is released outside the lock when `next` dies
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string generation_name(std::uint64_t generation) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%08llu", static_cast<unsigned long long>(generation));
    return buf;
}

std::string summaries_jsonl(const StoreState& state) {
    std::string out;
    for (const auto& s : state.summaries()) {
        nlohmann::ordered_json j;
        j["a"] = s.key.a;
        j["b"] = s.key.b;
        j["count"] = s.count;
        j["first_pub_date"] = format_date(s.first_pub_date);
        j["last_pub_date"] = format_date(s.last_pub_date);
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string stats_jsonl(const StoreState& state) {
    std::string out;
    for (const auto& s : state.all_stats()) {
        nlohmann::ordered_json j;
        j["concept"] = s.concept_id;
        j["total_relations"] = s.total_relations;
        j["partner_count"] = s.partner_count;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace

DataDir::DataDir(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_ / "index", ec);
    if (ec) throw Error(ErrorCode::io, "cannot create data directory " + root_.string() + ": " + ec.message());
}

std::filesystem::path DataDir::generation_dir(std::uint64_t generation) const {
    return root_ / "index" / generation_name(generation);
}

void DataDir::append_log(std::span<const ArticleTriples> articles) const {
    std::string out;
    for (const auto& article : articles) {
        nlohmann::json j;
        j["article_id"] = article.article_id;
        j["triples"] = article.triples;
        out += j.dump();
        out += '\n';
    }
    if (!out.empty()) append_durably(log_path(), out);
}

std::uint64_t DataDir::log_size() const {
    std::error_code ec;
    const auto size = std::filesystem::file_size(log_path(), ec);
    return ec ? 0 : static_cast<std::uint64_t>(size);
}

std::vector<ArticleTriples> DataDir::read_log(std::uint64_t from, std::uint64_t to) const {
    std::vector<ArticleTriples> articles;
    if (to <= from) return articles;
    std::ifstream in(log_path(), std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + log_path().string());
    in.seekg(static_cast<std::streamoff>(from));
    std::string chunk(to - from, '\0');
    in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    chunk.resize(static_cast<std::size_t>(in.gcount()));

    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < chunk.size()) {
        const std::size_t nl = chunk.find('\n', pos);
        if (nl == std::string::npos) break;  // torn tail
        ++line_no;
        const std::string_view line(chunk.data() + pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            ArticleTriples article;
            j.at("article_id").get_to(article.article_id);
            j.at("triples").get_to(article.triples);
            articles.push_back(std::move(article));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, "triples.log: " + std::string(e.what()));
        }
    }
    return articles;
}

std::optional<std::uint64_t> DataDir::current_generation() const {
    std::ifstream in(manifest_path());
    if (!in) return std::nullopt;
    std::string word;
    std::uint64_t generation = 0;
    if (!(in >> word >> generation) || word != "generation") {
        throw Error(ErrorCode::format, "MANIFEST is malformed");
    }
    return generation;
}

void DataDir::write_generation(const Snapshot& snapshot, std::uint64_t log_offset) const {
    const auto final_dir = generation_dir(snapshot.id);
    auto tmp_dir = final_dir;
    tmp_dir += ".tmp";
    std::filesystem::remove_all(tmp_dir);
    std::filesystem::create_directories(tmp_dir);

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("summaries.jsonl", summaries_jsonl(*snapshot.store));
    files.emplace_back("stats.jsonl", stats_jsonl(*snapshot.store));
    if (snapshot.embedding) {
        std::ostringstream bin;
        snapshot.embedding->save_binary(bin);
        files.emplace_back("embeddings.kfem", bin.str());
    }

    nlohmann::ordered_json meta;
    meta["snapshot_id"] = snapshot.id;
    meta["created_at_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                snapshot.created_at.time_since_epoch())
                                .count();
    meta["log_offset"] = log_offset;
    meta["relations"] = snapshot.store->relation_count();
    meta["triples"] = snapshot.store->triple_count();
    meta["articles"] = snapshot.store->article_count();
    meta["has_embedding"] = static_cast<bool>(snapshot.embedding);
    auto& listing = meta["files"];
    listing = nlohmann::ordered_json::object();
    for (const auto& [name, content] : files) {
        write_file_durably(tmp_dir / name, content);
        listing[name] = {{"size", content.size()}, {"fnv1a64", fnv1a(content)}};
    }
    write_file_durably(tmp_dir / "meta.json", meta.dump(2) + "\n");
    fsync_directory(tmp_dir);

    std::filesystem::remove_all(final_dir);
    std::filesystem::rename(tmp_dir, final_dir);
    fsync_directory(final_dir.parent_path());
    write_file_atomically(manifest_path(), "generation " + std::to_string(snapshot.id) + "\n");
}

DataDir::GenerationMeta DataDir::read_generation_meta(std::uint64_t generation) const {
    const auto j = nlohmann::json::parse(read_file(generation_dir(generation) / "meta.json"));
    GenerationMeta meta;
    j.at("snapshot_id").get_to(meta.snapshot_id);
    j.at("created_at_ms").get_to(meta.created_at_ms);
    j.at("log_offset").get_to(meta.log_offset);
    j.at("has_embedding").get_to(meta.has_embedding);
    return meta;
}

bool DataDir::generation_complete(std::uint64_t generation) const {
    try {
        const auto dir = generation_dir(generation);
        const auto meta = nlohmann::json::parse(read_file(dir / "meta.json"));
        for (const auto& [name, info] : meta.at("files").items()) {
            const std::string content = read_file(dir / name);
            if (content.size() != info.at("size").get<std::size_t>()) return false;
            if (fnv1a(content) != info.at("fnv1a64").get<std::uint64_t>()) return false;
        }
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

void DataDir::clean_partial_generations() const {
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(root_ / "index", ec)) {
        if (entry.path().extension() == ".tmp") std::filesystem::remove_all(entry.path(), ec);
    }
}

RecoveredState recover(const DataDir& dir, std::shared_ptr<const Lexicon> lexicon) {
    dir.clean_partial_generations();
    RecoveredState out{Store(lexicon), nullptr};
    const std::uint64_t log_end = dir.log_size();
    std::uint64_t replayed = 0;

    if (auto generation = dir.current_generation()) {
        if (!dir.generation_complete(*generation)) {
            throw Error(ErrorCode::format, "MANIFEST names incomplete generation " + std::to_string(*generation));
        }
        const auto meta = dir.read_generation_meta(*generation);
        if (meta.log_offset > log_end) {
            throw Error(ErrorCode::format, "generation references log bytes beyond triples.log");
        }
        out.store.replace_articles(dir.read_log(0, meta.log_offset));
        replayed = meta.log_offset;

        auto snapshot = std::make_shared<Snapshot>();
        snapshot->id = meta.snapshot_id;
        snapshot->created_at = std::chrono::system_clock::time_point(std::chrono::milliseconds(meta.created_at_ms));
        snapshot->store = out.store.share();
        snapshot->graph = std::make_shared<const RelationGraph>(build_graph(*snapshot->store));
        if (meta.has_embedding) {
            snapshot->embedding = std::make_shared<const EmbeddingModel>(
                EmbeddingModel::load(dir.generation_dir(*generation) / "embeddings.kfem"));
        }
        out.store.set_last_snapshot_id(meta.snapshot_id);
        out.snapshot = std::move(snapshot);
    }
    out.store.replace_articles(dir.read_log(replayed, log_end));
    return out;
}

}  // namespace litkg
