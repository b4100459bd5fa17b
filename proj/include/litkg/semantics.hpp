#pragma once

#include <litkg/embedding.hpp>
#include <litkg/graph.hpp>

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace litkg {

inline constexpr std::size_t kDefaultTopK = 20;
inline constexpr std::size_t kDefaultPredictionK = 40;

struct QueryVector {
    std::vector<double> vector;  // unit L2 norm
    std::vector<std::string> source_concepts;
};

struct SemanticHit {
    std::string concept_id;
    double score = 0.0;  // cosine
    bool directly_related = false;  // edge to any source concept
};

/// normalize(sum of the concepts' vectors). Throws Error(not_found) naming
/// every unknown concept, Error(bad_request) for an empty list, and
/// Error(degenerate_query) when the sum is zero.
QueryVector combine(std::span<const std::string> concepts, const EmbeddingModel& model);

/// Every embedded concept outside `exclude` and the query's sources, ranked by
/// cosine descending with ties by concept id; at most k hits.
std::vector<SemanticHit> top_k_related(const QueryVector& query, std::size_t k,
                                       const std::set<std::string>& exclude,
                                       const EmbeddingModel& model, const RelationGraph& graph);

/// Like top_k_related but drops concepts adjacent to any source before
/// taking the first k.
std::vector<SemanticHit> related_not_connected(const QueryVector& query, std::size_t k,
                                               const EmbeddingModel& model, const RelationGraph& graph);
std::vector<SemanticHit> related_not_connected(const std::string& concept_id, std::size_t k,
                                               const EmbeddingModel& model, const RelationGraph& graph);

struct MutualRank {
    std::size_t rank = 0;  // 1-based
    bool one_sided = false;  // only one concept appeared in the other's list
};

/// Position of b among related_not_connected(a, k) and of a among
/// related_not_connected(b, k); the smaller of the two when both exist, the
/// single one when only one exists, nullopt when neither. Throws
/// Error(precondition) if a and b are adjacent.
std::optional<MutualRank> mutual_rank(const std::string& a, const std::string& b, std::size_t k,
                                      const EmbeddingModel& model, const RelationGraph& graph);

/// Multiplicative-combination score over a single positive query with no
/// negatives: ((1 + cos) / 2) / (1 + epsilon). Monotone in the cosine.
double cosmul_score(double cosine);

/// Ranking of all embedded concepts (query sources excluded) by cosmul_score.
std::vector<SemanticHit> rank_by_cosmul(const QueryVector& query, const EmbeddingModel& model);

}  // namespace litkg
