#pragma once

#include <litkg/date.hpp>
#include <litkg/embedding.hpp>
#include <litkg/graph.hpp>
#include <litkg/store.hpp>
#include <litkg/walk.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace litkg {

/// Mann-Whitney AUROC: the fraction of (positive, negative) pairs ordered
/// correctly, ties counting 1/2. O((n + m) log(n + m)). Throws
/// Error(insufficient_data) if either side is empty and Error(validation) on
/// NaN scores.
double auroc(std::span<const double> positives, std::span<const double> negatives);

struct RocPoint {
    double threshold = 0.0;  // predict positive when score >= threshold
    double fpr = 0.0;
    double tpr = 0.0;
};

/// Threshold sweep over the distinct scores, highest first, starting at
/// (+inf, 0, 0) and ending at (lowest score, 1, 1).
std::vector<RocPoint> roc_curve(std::span<const double> positives, std::span<const double> negatives);
void write_roc_csv(std::ostream& out, std::span<const RocPoint> points);

struct AurocReport {
    double auroc = 0.0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::uint64_t seed = 0;
    std::vector<RocPoint> roc;
};

/// Cosine of two embedded concepts' vectors (0 when either is the zero vector).
double embedding_cosine(const EmbeddingModel& model, std::size_t row_a, std::size_t row_b);

/// Positives are every edge of `graph`; negatives are ceil(ratio * |E|)
/// distinct non-adjacent pairs drawn uniformly. Throws
/// Error(insufficient_data) for fewer than 2 edges or too few non-adjacent
/// pairs, Error(validation) if a graph node has no embedding.
AurocReport auroc_link_prediction(const RelationGraph& graph, const EmbeddingModel& model,
                                  double negative_ratio = 1.0, std::uint64_t seed = 1);

struct EdgeSplit {
    RelationGraph train;
    std::vector<RelationGraph::Edge> held_out;  // node ids of the full graph
};

/// Removes about fraction * |E| edges, never one whose removal would leave an
/// endpoint without edges.
EdgeSplit split_edges(const RelationGraph& graph, double fraction, std::uint64_t seed);

/// Positives are the held-out edges; negatives are pairs non-adjacent in the
/// full graph. `model` is trained on the split's train graph.
AurocReport auroc_held_out_edges(const RelationGraph& full, const EdgeSplit& split,
                                 const EmbeddingModel& model, double negative_ratio = 1.0,
                                 std::uint64_t seed = 1);

struct HoldoutPrediction {
    std::string concept_a;
    std::string concept_b;
    std::size_t rank = 0;  // 0 when unpredictable
    bool one_sided = false;
};

struct HoldoutReport {
    Date cutoff{};
    std::size_t k = 0;
    std::size_t new_relations_total = 0;
    std::size_t excluded_unseen_concept = 0;
    std::size_t unpredictable = 0;
    std::vector<std::size_t> rank_histogram;  // index r - 1 holds rank r
    std::size_t one_sided_count = 0;
    std::vector<HoldoutPrediction> predictions;  // every scored pair, key order

    std::size_t predicted() const;
    /// sum(histogram) + unpredictable == new_relations_total - excluded_unseen_concept
    bool accounting_holds() const;
};

/// Trains on triples dated <= cutoff and ranks each relation that first
/// appears after it with mutual_rank. Throws Error(insufficient_data) when
/// nothing precedes the cutoff.
HoldoutReport temporal_holdout(const StoreState& store, Date cutoff, const WalkConfig& walk,
                               const SGNSConfig& sgns, std::size_t k);

/// Same, over a graph and model already built from the pre-cutoff state.
HoldoutReport score_holdout(const StoreState& store, const StoreState& before, Date cutoff,
                            const RelationGraph& graph, const EmbeddingModel& model, std::size_t k);

struct PlantedPartition {
    std::size_t blocks = 4;
    std::size_t block_size = 25;
    double p_in = 0.3;
    double p_out = 0.02;
    std::uint64_t seed = 7;
};

/// Unit-weight random graph; node "n<i>" belongs to block i / block_size.
/// Isolated nodes are dropped.
RelationGraph planted_partition(const PlantedPartition& params);

nlohmann::ordered_json to_json(const AurocReport& report);
nlohmann::ordered_json to_json(const HoldoutReport& report);

}  // namespace litkg
