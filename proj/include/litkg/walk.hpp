#pragma once

#include <litkg/graph.hpp>
#include <litkg/random.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace litkg {

enum class NeighborSampler {
    automatic,  // alias tables below alias_memory_limit, rejection above
    alias,
    rejection,
};

struct WalkConfig {
    double p = 0.25;  // return parameter
    double q = 0.25;  // in-out parameter
    std::size_t walk_length = 80;
    std::size_t walks_per_node = 18;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    NeighborSampler sampler = NeighborSampler::automatic;
    /// Upper bound on second-order alias entries (sum of squared degrees)
    /// before the automatic sampler falls back to rejection sampling.
    std::size_t alias_memory_limit = 20'000'000;

    /// Throws Error(config) on non-positive parameters.
    void validate() const;
};

using Walk = std::vector<NodeId>;

/// Second-order transition probabilities over neighbors(current), in
/// adjacency order. The unnormalized weight of neighbor x is w(current, x)
/// times 1/p when x == prev, 1 when x is adjacent to prev, and 1/q otherwise.
/// Without a previous node the weights alone are used.
std::vector<double> step_distribution(const RelationGraph& graph, std::optional<NodeId> prev,
                                      NodeId current, const WalkConfig& config);

/// Draws next steps for biased walks. Either precomputes one alias table per
/// directed edge or samples on the fly by rejection against first-order
/// tables; both produce step_distribution exactly.
class WalkSampler {
public:
    WalkSampler(const RelationGraph& graph, const WalkConfig& config);

    bool uses_alias_tables() const { return use_alias_; }

    /// nullopt when `current` has no neighbors.
    std::optional<NodeId> next(std::optional<NodeId> prev, NodeId current, Rng& rng) const;

    Walk walk(NodeId start, std::size_t length, Rng& rng) const;

private:
    const RelationGraph& graph_;
    WalkConfig config_;
    std::vector<AliasTable> node_tables_;
    // edge_offsets_[v] indexes edge_tables_ for directed edges (t -> v) where
    // t runs over neighbors(v) in adjacency order.
    std::vector<std::size_t> edge_offsets_;
    std::vector<AliasTable> edge_tables_;
    double max_bias_ = 1.0;
    bool use_alias_ = false;
};

/// walks_per_node passes; each pass visits every node with at least one
/// neighbor in a freshly shuffled order. Each walk has its own RNG stream
/// derived from (seed, pass, node), so output is identical for any number of
/// workers. Walks are ordered pass-major in shuffled order.
std::vector<Walk> generate_walks(const RelationGraph& graph, const WalkConfig& config);

}  // namespace litkg
