#include <litkg/error.hpp>
#include <litkg/semantics.hpp>

#include <algorithm>
#include <cmath>

namespace litkg {

QueryVector combine(std::span<const std::string> concepts, const EmbeddingModel& model) {
    if (concepts.empty()) throw Error(ErrorCode::bad_request, "query needs at least one concept");
    std::vector<std::string> missing;
    QueryVector query;
    query.vector.assign(model.dimension(), 0.0);
    for (const auto& id : concepts) {
        auto row = model.find(id);
        if (!row) {
            if (std::find(missing.begin(), missing.end(), id) == missing.end()) missing.push_back(id);
            continue;
        }
        const auto v = model.vector(*row);
        for (std::size_t i = 0; i < v.size(); ++i) query.vector[i] += static_cast<double>(v[i]);
        if (std::find(query.source_concepts.begin(), query.source_concepts.end(), id) ==
            query.source_concepts.end()) {
            query.source_concepts.push_back(id);
        }
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::not_found, "no embedding for: " + names);
    }
    double norm = 0.0;
    for (double x : query.vector) norm += x * x;
    norm = std::sqrt(norm);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::degenerate_query, "query vectors sum to zero");
    }
    for (double& x : query.vector) x /= norm;
    return query;
}

namespace {

double cosine_to(const QueryVector& query, std::span<const float> v) {
    double dot = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto x = static_cast<double>(v[i]);
        dot += query.vector[i] * x;
        norm += x * x;
    }
    return norm > 0.0 ? dot / std::sqrt(norm) : 0.0;
}

bool hit_before(const SemanticHit& x, const SemanticHit& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.concept_id < y.concept_id;
}

bool adjacent_to_any(const RelationGraph& graph, const std::vector<std::optional<NodeId>>& sources,
                     const std::string& concept_id) {
    auto node = graph.find(concept_id);
    if (!node) return false;
    for (const auto& s : sources) {
        if (s && graph.adjacent(*s, *node)) return true;
    }
    return false;
}

std::vector<SemanticHit> ranked(const QueryVector& query, const std::set<std::string>& exclude,
                                const EmbeddingModel& model, const RelationGraph& graph) {
    std::vector<std::optional<NodeId>> sources;
    for (const auto& s : query.source_concepts) sources.push_back(graph.find(s));
    std::vector<SemanticHit> hits;
    hits.reserve(model.size());
    for (std::size_t row = 0; row < model.size(); ++row) {
        const auto& id = model.vocabulary()[row];
        if (exclude.count(id)) continue;
        if (std::find(query.source_concepts.begin(), query.source_concepts.end(), id) !=
            query.source_concepts.end()) {
            continue;
        }
        hits.push_back({id, cosine_to(query, model.vector(row)), adjacent_to_any(graph, sources, id)});
    }
    return hits;
}

void keep_top(std::vector<SemanticHit>& hits, std::size_t k) {
    if (k < hits.size()) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), hit_before);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), hit_before);
    }
}

}  // namespace

std::vector<SemanticHit> top_k_related(const QueryVector& query, std::size_t k,
                                       const std::set<std::string>& exclude,
                                       const EmbeddingModel& model, const RelationGraph& graph) {
    if (k == 0) throw Error(ErrorCode::bad_request, "k must be at least 1");
    auto hits = ranked(query, exclude, model, graph);
    keep_top(hits, k);
    return hits;
}

std::vector<SemanticHit> related_not_connected(const QueryVector& query, std::size_t k,
                                               const EmbeddingModel& model, const RelationGraph& graph) {
    if (k == 0) throw Error(ErrorCode::bad_request, "k must be at least 1");
    auto hits = ranked(query, {}, model, graph);
    std::erase_if(hits, [](const SemanticHit& h) { return h.directly_related; });
    keep_top(hits, k);
    return hits;
}

std::vector<SemanticHit> related_not_connected(const std::string& concept_id, std::size_t k,
                                               const EmbeddingModel& model, const RelationGraph& graph) {
    const std::string ids[] = {concept_id};
    return related_not_connected(combine(ids, model), k, model, graph);
}

std::optional<MutualRank> mutual_rank(const std::string& a, const std::string& b, std::size_t k,
                                      const EmbeddingModel& model, const RelationGraph& graph) {
    auto na = graph.find(a);
    auto nb = graph.find(b);
    if (na && nb && graph.adjacent(*na, *nb)) {
        throw Error(ErrorCode::precondition, "'" + a + "' and '" + b + "' are directly related");
    }
    auto position = [&](const std::string& from, const std::string& target) -> std::optional<std::size_t> {
        const auto hits = related_not_connected(from, k, model, graph);
        for (std::size_t i = 0; i < hits.size(); ++i) {
            if (hits[i].concept_id == target) return i + 1;
        }
        return std::nullopt;
    };
    const auto rank_a = position(a, b);
    const auto rank_b = position(b, a);
    if (rank_a && rank_b) return MutualRank{std::min(*rank_a, *rank_b), false};
    if (rank_a) return MutualRank{*rank_a, true};
    if (rank_b) return MutualRank{*rank_b, true};
    return std::nullopt;
}

double cosmul_score(double cosine) {
    // No negative terms: their product is the empty product 1.
    constexpr double kEpsilon = 1e-6;
    return ((1.0 + cosine) / 2.0) / (1.0 + kEpsilon);
}

std::vector<SemanticHit> rank_by_cosmul(const QueryVector& query, const EmbeddingModel& model) {
    std::vector<SemanticHit> hits;
    for (std::size_t row = 0; row < model.size(); ++row) {
        const auto& id = model.vocabulary()[row];
        if (std::find(query.source_concepts.begin(), query.source_concepts.end(), id) !=
            query.source_concepts.end()) {
            continue;
        }
        hits.push_back({id, cosmul_score(cosine_to(query, model.vector(row))), false});
    }
    std::sort(hits.begin(), hits.end(), hit_before);
    return hits;
}

}  // namespace litkg
