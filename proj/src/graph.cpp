#include <litkg/error.hpp>
#include <litkg/graph.hpp>

#include <algorithm>
#include <map>
#include <set>

namespace litkg {

RelationGraph RelationGraph::from_edges(
    const std::vector<std::tuple<std::string, std::string, std::uint64_t>>& edges) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> canonical;
    std::set<std::string> names;
    for (const auto& [x, y, w] : edges) {
        if (x == y) throw Error(ErrorCode::validation, "self loop on '" + x + "'");
        if (w == 0) throw Error(ErrorCode::validation, "zero edge weight " + x + "-" + y);
        auto key = x < y ? std::pair{x, y} : std::pair{y, x};
        if (!canonical.emplace(key, w).second) {
            throw Error(ErrorCode::validation, "duplicate edge " + key.first + "-" + key.second);
        }
        names.insert(x);
        names.insert(y);
    }

    RelationGraph g;
    g.names_.assign(names.begin(), names.end());
    for (NodeId i = 0; i < g.names_.size(); ++i) g.ids_.emplace(g.names_[i], i);

    std::vector<std::vector<Neighbor>> lists(g.names_.size());
    for (const auto& [key, w] : canonical) {
        const NodeId u = g.ids_.at(key.first);
        const NodeId v = g.ids_.at(key.second);
        lists[u].push_back({v, w});
        lists[v].push_back({u, w});
        g.edges_.push_back({u, v, w});
    }
    for (auto& list : lists) {
        std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
        g.adjacency_.insert(g.adjacency_.end(), list.begin(), list.end());
        g.offsets_.push_back(g.adjacency_.size());
    }
    std::sort(g.edges_.begin(), g.edges_.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    return g;
}

std::optional<NodeId> RelationGraph::find(std::string_view concept_id) const {
    auto it = ids_.find(std::string(concept_id));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

std::span<const RelationGraph::Neighbor> RelationGraph::neighbors(NodeId node) const {
    return {adjacency_.data() + offsets_[node], offsets_[node + 1] - offsets_[node]};
}

std::uint64_t RelationGraph::weight(NodeId u, NodeId v) const {
    const auto list = neighbors(u);
    auto it = std::lower_bound(list.begin(), list.end(), v,
                               [](const Neighbor& n, NodeId target) { return n.node < target; });
    return (it != list.end() && it->node == v) ? it->weight : 0;
}

RelationGraph build_graph(const StoreState& view) {
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> edges;
    edges.reserve(view.relation_count());
    for (const auto& summary : view.summaries()) {
        edges.emplace_back(summary.key.a, summary.key.b, summary.count);
    }
    return RelationGraph::from_edges(edges);
}

}  // namespace litkg
