#pragma once

#include <litkg/store.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace litkg {

using NodeId = std::uint32_t;

/// Undirected weighted graph over concept ids. Node ids follow concept id
/// order; adjacency lists are sorted by neighbor id.
class RelationGraph {
public:
    struct Neighbor {
        NodeId node = 0;
        std::uint64_t weight = 0;
    };
    struct Edge {
        NodeId u = 0;  // u < v
        NodeId v = 0;
        std::uint64_t weight = 0;
    };

    RelationGraph() = default;

    /// Throws Error(validation) on self loops, zero weights or duplicate edges.
    static RelationGraph from_edges(
        const std::vector<std::tuple<std::string, std::string, std::uint64_t>>& edges);

    std::size_t node_count() const { return names_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return names_.empty(); }

    const std::string& name(NodeId node) const { return names_[node]; }
    const std::vector<std::string>& names() const { return names_; }
    std::optional<NodeId> find(std::string_view concept_id) const;

    std::span<const Neighbor> neighbors(NodeId node) const;
    std::size_t degree(NodeId node) const { return offsets_[node + 1] - offsets_[node]; }
    bool adjacent(NodeId u, NodeId v) const { return weight(u, v) != 0; }
    /// 0 when not adjacent.
    std::uint64_t weight(NodeId u, NodeId v) const;
    const std::vector<Edge>& edges() const { return edges_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, NodeId> ids_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Neighbor> adjacency_;
    std::vector<Edge> edges_;
};

/// One edge per relation, weight = supporting triple count. Concepts without
/// relations do not appear.
RelationGraph build_graph(const StoreState& view);

}  // namespace litkg
