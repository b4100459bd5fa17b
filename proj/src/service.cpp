#include <litkg/error.hpp>
#include <litkg/semantics.hpp>
#include <litkg/service.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <ctime>

namespace litkg {

using Json = nlohmann::ordered_json;

namespace {

std::map<std::string, std::string> parse_query(const std::string& text) {
    httplib::Params params;
    httplib::detail::parse_query_text(text, params);
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : params) out.emplace(k, v);  // first occurrence wins
    return out;
}

}  // namespace

ApiRequest ApiRequest::get(const std::string& target) {
    ApiRequest r;
    const auto q = target.find('?');
    r.path = httplib::detail::decode_url(target.substr(0, q), false);
    if (q != std::string::npos) r.query = parse_query(target.substr(q + 1));
    return r;
}

ApiRequest ApiRequest::post(const std::string& target, std::string body) {
    ApiRequest r = get(target);
    r.method = "POST";
    r.body = std::move(body);
    return r;
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::bad_request:
        case ErrorCode::validation:
        case ErrorCode::parse: return 400;
        case ErrorCode::degenerate_query: return 422;
        case ErrorCode::updating: return 409;
        default: return 500;
    }
}

ApiResponse error_response(ErrorCode code, const std::string& message) {
    // Input-shaped failures surface as bad_request; the API's code set is
    // not_found, bad_request, degenerate_query, updating, plus internal.
    std::string name;
    switch (code) {
        case ErrorCode::not_found:
        case ErrorCode::bad_request:
        case ErrorCode::degenerate_query:
        case ErrorCode::updating: name = std::string(to_string(code)); break;
        case ErrorCode::validation:
        case ErrorCode::parse: name = "bad_request"; break;
        default: name = "internal"; break;
    }
    Json body;
    body["error"] = {{"code", name}, {"message", message}};
    return {http_status(code), body.dump(), "application/json"};
}

namespace {

Json ratio_json(const Ratio& r) {
    Json j;
    j["value"] = r.display();
    j["numerator"] = r.numerator;
    j["denominator"] = r.denominator;
    return j;
}

Json summary_json(const RelationSummary& s) {
    Json j;
    j["a"] = s.key.a;
    j["b"] = s.key.b;
    j["count"] = s.count;
    j["first_pub_date"] = format_date(s.first_pub_date);
    j["last_pub_date"] = format_date(s.last_pub_date);
    return j;
}

Json triple_json(const RelationTriple& t) {
    Json j;
    j["concept_a"] = t.concept_a;
    j["concept_b"] = t.concept_b;
    j["article_id"] = t.article_id;
    j["sentence_text"] = t.sentence_text;
    j["sentence_index"] = t.sentence_index;
    j["pub_date"] = format_date(t.pub_date);
    j["extraction_date"] = format_date(t.extraction_date);
    j["species"] = t.species;
    return j;
}

void describe_concept(Json& j, const StoreState& store, const std::string& id) {
    j["id"] = id;
    if (const auto* lex = store.lexicon()) {
        if (const auto* entry = lex->find(id)) {
            j["name"] = entry->canonical_name;
            j["category"] = std::string(to_string(entry->category));
            return;
        }
    }
    j["name"] = id;
    j["category"] = nullptr;
}

std::uint64_t total_relations(const StoreState& store, const std::string& id) {
    const auto stats = store.stats(id);
    return stats ? stats->total_relations : 0;
}

std::size_t size_param(const ApiRequest& req, const std::string& name, std::size_t fallback, std::size_t max) {
    auto it = req.query.find(name);
    if (it == req.query.end()) return fallback;
    std::size_t value = 0;
    const auto& text = it->second;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
        throw Error(ErrorCode::bad_request, "'" + name + "' must be a non-negative integer");
    }
    if (value > max) throw Error(ErrorCode::bad_request, "'" + name + "' must be at most " + std::to_string(max));
    return value;
}

std::string fold_ascii(std::string_view text) {
    std::string out(text);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        const auto slash = path.find('/', pos);
        const auto end = slash == std::string::npos ? path.size() : slash;
        if (end > pos) parts.push_back(path.substr(pos, end - pos));
        if (slash == std::string::npos) break;
        pos = slash + 1;
    }
    return parts;
}

constexpr std::size_t kDefaultPage = 50;
constexpr std::size_t kMaxPage = 10000;

ApiResponse ok(const Json& body) { return {200, body.dump(), "application/json"}; }

ApiResponse search_concepts(const Snapshot& snap, const ApiRequest& req) {
    auto q = req.query.find("q");
    if (q == req.query.end() || q->second.empty()) throw Error(ErrorCode::bad_request, "q is required");
    const std::size_t limit = size_param(req, "limit", kDefaultPage, kMaxPage);
    const std::string needle = fold_ascii(q->second);
    const auto& store = *snap.store;

    std::vector<std::pair<std::uint64_t, std::string>> found;
    if (const auto* lex = store.lexicon()) {
        for (const auto& entry : lex->entries()) {
            if (!entry.enabled) continue;
            bool hit = fold_ascii(entry.canonical_name).find(needle) != std::string::npos;
            for (const auto& syn : entry.synonyms) {
                if (hit) break;
                hit = fold_ascii(syn).find(needle) != std::string::npos;
            }
            if (hit) found.emplace_back(total_relations(store, entry.id), entry.id);
        }
    } else {
        for (const auto& s : store.all_stats()) {
            if (fold_ascii(s.concept_id).find(needle) != std::string::npos) {
                found.emplace_back(s.total_relations, s.concept_id);
            }
        }
    }
    std::sort(found.begin(), found.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    if (found.size() > limit) found.resize(limit);
    Json out = Json::array();
    for (const auto& [total, id] : found) {
        Json j;
        describe_concept(j, store, id);
        j["total_relations"] = total;
        out.push_back(std::move(j));
    }
    return ok(out);
}

ApiResponse category_concepts(const Snapshot& snap, const ApiRequest& req, const std::string& category_text) {
    const auto category = parse_category(category_text);
    if (!category) throw Error(ErrorCode::not_found, "unknown category '" + category_text + "'");
    const std::size_t limit = size_param(req, "limit", kDefaultPage, kMaxPage);
    const std::size_t offset = size_param(req, "offset", 0, SIZE_MAX);
    const auto& store = *snap.store;

    std::vector<ConceptStats> rows;
    if (const auto* lex = store.lexicon()) {
        for (const auto& s : store.all_stats()) {
            const auto* entry = lex->find(s.concept_id);
            if (entry && entry->category == *category && s.total_relations > 0) rows.push_back(s);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ConceptStats& x, const ConceptStats& y) {
        return x.total_relations != y.total_relations ? x.total_relations > y.total_relations
                                                      : x.concept_id < y.concept_id;
    });
    Json out = Json::array();
    for (std::size_t i = offset; i < rows.size() && i - offset < limit; ++i) {
        Json j;
        describe_concept(j, store, rows[i].concept_id);
        j["total_relations"] = rows[i].total_relations;
        j["partner_count"] = rows[i].partner_count;
        out.push_back(std::move(j));
    }
    return ok(out);
}

ApiResponse relation(const Snapshot& snap, const ApiRequest& req, const std::string& a, const std::string& b) {
    const auto& store = *snap.store;
    if (a == b) throw Error(ErrorCode::bad_request, "a relation needs two different concepts");
    const auto key = RelationKey::of(a, b);
    const auto* summary = store.summary(key);
    if (!summary) throw Error(ErrorCode::not_found, "no relation between '" + key.a + "' and '" + key.b + "'");

    EvidenceOrder order = EvidenceOrder::pub_date_asc;
    if (auto it = req.query.find("order"); it != req.query.end()) {
        if (it->second == "desc") {
            order = EvidenceOrder::pub_date_desc;
        } else if (it->second != "asc") {
            throw Error(ErrorCode::bad_request, "order must be asc or desc");
        }
    }
    const std::size_t limit = size_param(req, "limit", kDefaultPage, kMaxPage);
    const std::size_t offset = size_param(req, "offset", 0, SIZE_MAX);
    const auto p = store.conditional_probability(key.a, key.b);

    Json out;
    out["summary"] = summary_json(*summary);
    out["p_a_given_b"] = ratio_json(p.p_a_given_b);
    out["p_b_given_a"] = ratio_json(p.p_b_given_a);
    Json evidence = Json::array();
    for (const auto& t : store.evidence(key, order, limit, offset)) evidence.push_back(triple_json(t));
    out["evidence"] = std::move(evidence);
    return ok(out);
}

ApiResponse related(const Snapshot& snap, const ApiRequest& req, const std::string& id) {
    const auto& store = *snap.store;
    if (!store.knows_concept(id)) throw Error(ErrorCode::not_found, "unknown concept '" + id + "'");
    std::optional<ConceptCategory> filter;
    if (auto it = req.query.find("category"); it != req.query.end()) {
        filter = parse_category(it->second);
        if (!filter) throw Error(ErrorCode::bad_request, "unknown category '" + it->second + "'");
    }
    RelatedSort sort = RelatedSort::count;
    if (auto it = req.query.find("sort"); it != req.query.end()) {
        if (it->second == "p_a_given_b") {
            sort = RelatedSort::p_a_given_b;
        } else if (it->second == "p_b_given_a") {
            sort = RelatedSort::p_b_given_a;
        } else if (it->second != "count") {
            throw Error(ErrorCode::bad_request, "sort must be count, p_a_given_b or p_b_given_a");
        }
    }
    const std::size_t limit = size_param(req, "limit", kDefaultPage, kMaxPage);
    const std::size_t offset = size_param(req, "offset", 0, SIZE_MAX);

    Json out = Json::array();
    for (const auto& row : store.related_concepts(id, filter, sort, limit, offset)) {
        Json j;
        describe_concept(j, store, row.concept_id);
        j["count"] = row.count;
        j["p_a_given_b"] = ratio_json(row.p_a_given_b);
        j["p_b_given_a"] = ratio_json(row.p_b_given_a);
        out.push_back(std::move(j));
    }
    return ok(out);
}

ApiResponse semantic(const Snapshot& snap, const ApiRequest& req) {
    Json body;
    try {
        body = Json::parse(req.body);
    } catch (const Json::parse_error&) {
        throw Error(ErrorCode::bad_request, "body is not valid JSON");
    }
    if (!body.is_object()) throw Error(ErrorCode::bad_request, "body must be a JSON object");
    auto concepts_it = body.find("concepts");
    if (concepts_it == body.end() || !concepts_it->is_array()) {
        throw Error(ErrorCode::bad_request, "concepts must be an array of ids");
    }
    std::vector<std::string> concepts;
    for (const auto& c : *concepts_it) {
        if (!c.is_string()) throw Error(ErrorCode::bad_request, "concept ids must be strings");
        concepts.push_back(c.get<std::string>());
    }
    std::size_t k = kDefaultTopK;
    if (auto it = body.find("k"); it != body.end()) {
        if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0 || it->get<std::uint64_t>() > kMaxPage) {
            throw Error(ErrorCode::bad_request, "k must be an integer in [1, " + std::to_string(kMaxPage) + "]");
        }
        k = it->get<std::size_t>();
    }
    bool exclude_direct = false;
    if (auto it = body.find("exclude_direct"); it != body.end()) {
        if (!it->is_boolean()) throw Error(ErrorCode::bad_request, "exclude_direct must be a boolean");
        exclude_direct = it->get<bool>();
    }
    if (concepts.empty()) throw Error(ErrorCode::bad_request, "concepts must not be empty");
    if (!snap.embedding) throw Error(ErrorCode::not_found, "no embedding has been published yet");

    const auto query = combine(concepts, *snap.embedding);
    const auto hits = exclude_direct ? related_not_connected(query, k, *snap.embedding, *snap.graph)
                                     : top_k_related(query, k, {}, *snap.embedding, *snap.graph);
    Json out;
    out["snapshot_id"] = snap.id;
    out["concepts"] = query.source_concepts;
    Json list = Json::array();
    for (const auto& h : hits) {
        Json j;
        describe_concept(j, *snap.store, h.concept_id);
        j["score"] = h.score;
        j["directly_related"] = h.directly_related;
        list.push_back(std::move(j));
    }
    out["hits"] = std::move(list);
    return ok(out);
}

std::string iso_time(std::chrono::system_clock::time_point t) {
    const std::time_t secs = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ApiResponse stats(const Snapshot& snap) {
    const auto& store = *snap.store;
    Json out;
    out["concepts"] = store.concept_count();
    out["relations"] = store.relation_count();
    out["triples"] = store.triple_count();
    out["articles"] = store.article_count();
    out["snapshot_id"] = snap.id;
    if (snap.id == 0) {
        out["last_update"] = nullptr;
    } else {
        out["last_update"] = iso_time(snap.created_at);
    }
    return ok(out);
}

}  // namespace

ApiService::ApiService(const SnapshotHolder& holder, UpdateTrigger trigger)
    : holder_(holder), trigger_(std::move(trigger)) {}

ApiResponse ApiService::handle(const ApiRequest& req) const {
    const auto snap = holder_.current();
    const auto parts = split_path(req.path);
    const bool get = req.method == "GET" || req.method == "HEAD";
    const bool post = req.method == "POST";
    try {
        if (parts.size() < 2 || parts[0] != "v1") throw Error(ErrorCode::not_found, "no route for " + req.path);
        const auto& root = parts[1];
        if (root == "concepts" && parts.size() == 2 && get) return search_concepts(*snap, req);
        if (root == "concepts" && parts.size() == 4 && parts[3] == "related" && get) {
            return related(*snap, req, parts[2]);
        }
        if (root == "categories" && parts.size() == 4 && parts[3] == "concepts" && get) {
            return category_concepts(*snap, req, parts[2]);
        }
        if (root == "relations" && parts.size() == 4 && get) return relation(*snap, req, parts[2], parts[3]);
        if (root == "semantic" && parts.size() == 3 && parts[2] == "related" && post) return semantic(*snap, req);
        if (root == "stats" && parts.size() == 2 && get) return stats(*snap);
        if (root == "admin" && parts.size() == 3 && parts[2] == "update" && post) {
            if (!trigger_) throw Error(ErrorCode::not_found, "updates are not enabled on this server");
            const auto building = trigger_();
            if (!building) throw Error(ErrorCode::updating, "an update is already running");
            Json out;
            out["accepted"] = true;
            out["snapshot_building"] = *building;
            return {202, out.dump(), "application/json"};
        }
        throw Error(ErrorCode::not_found, "no route for " + req.method + " " + req.path);
    } catch (const Error& e) {
        return error_response(e.code(), e.what());
    } catch (const std::exception& e) {
        return error_response(ErrorCode::io, e.what());
    }
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
    explicit Impl(const ApiService& s) : service(s) {}
    const ApiService& service;
    httplib::Server server;
};

HttpServer::HttpServer(const ApiService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
    auto handler = [this](const httplib::Request& in, httplib::Response& out) {
        ApiRequest req;
        req.method = in.method;
        req.path = in.path;
        for (const auto& [k, v] : in.params) req.query.emplace(k, v);
        req.body = in.body;
        const auto res = impl_->service.handle(req);
        out.status = res.status;
        out.set_content(res.body, res.content_type);
    };
    impl_->server.Get("/v1/.*", handler);
    impl_->server.Post("/v1/.*", handler);
    if (static_dir && !impl_->server.set_mount_point("/", static_dir->string())) {
        throw Error(ErrorCode::io, "cannot serve static files from " + static_dir->string());
    }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorCode::io, "cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace litkg
