#include <litkg/error.hpp>
#include <litkg/walk.hpp>

#include <algorithm>
#include <thread>

namespace litkg {

void WalkConfig::validate() const {
    if (!(p > 0.0) || !(q > 0.0)) throw Error(ErrorCode::config, "walk p and q must be positive");
    if (walk_length == 0 || walks_per_node == 0) {
        throw Error(ErrorCode::config, "walk_length and walks_per_node must be positive");
    }
    if (workers == 0) throw Error(ErrorCode::config, "walk workers must be positive");
}

namespace {

double bias(const RelationGraph& graph, NodeId prev, NodeId x, const WalkConfig& config) {
    if (x == prev) return 1.0 / config.p;
    if (graph.adjacent(prev, x)) return 1.0;
    return 1.0 / config.q;
}

std::size_t position_in(std::span<const RelationGraph::Neighbor> list, NodeId node) {
    auto it = std::lower_bound(list.begin(), list.end(), node,
                               [](const auto& n, NodeId target) { return n.node < target; });
    return static_cast<std::size_t>(it - list.begin());
}

}  // namespace

std::vector<double> step_distribution(const RelationGraph& graph, std::optional<NodeId> prev,
                                      NodeId current, const WalkConfig& config) {
    const auto list = graph.neighbors(current);
    std::vector<double> probs(list.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i) {
        double w = static_cast<double>(list[i].weight);
        if (prev) w *= bias(graph, *prev, list[i].node, config);
        probs[i] = w;
        sum += w;
    }
    for (auto& p : probs) p /= sum;
    return probs;
}

WalkSampler::WalkSampler(const RelationGraph& graph, const WalkConfig& config)
    : graph_(graph), config_(config) {
    config_.validate();
    max_bias_ = std::max({1.0 / config_.p, 1.0, 1.0 / config_.q});

    const std::size_t n = graph_.node_count();
    node_tables_.resize(n);
    std::size_t squared_degrees = 0;
    for (NodeId v = 0; v < n; ++v) {
        const auto list = graph_.neighbors(v);
        squared_degrees += list.size() * list.size();
        if (list.empty()) continue;
        std::vector<double> weights;
        weights.reserve(list.size());
        for (const auto& nb : list) weights.push_back(static_cast<double>(nb.weight));
        node_tables_[v] = AliasTable(weights);
    }

    switch (config_.sampler) {
        case NeighborSampler::alias: use_alias_ = true; break;
        case NeighborSampler::rejection: use_alias_ = false; break;
        case NeighborSampler::automatic: use_alias_ = squared_degrees <= config_.alias_memory_limit; break;
    }
    if (!use_alias_) return;

    edge_offsets_.resize(n + 1, 0);
    for (NodeId v = 0; v < n; ++v) edge_offsets_[v + 1] = edge_offsets_[v] + graph_.degree(v);
    edge_tables_.reserve(edge_offsets_[n]);
    for (NodeId v = 0; v < n; ++v) {
        for (const auto& t : graph_.neighbors(v)) {
            edge_tables_.emplace_back(step_distribution(graph_, t.node, v, config_));
        }
    }
}

std::optional<NodeId> WalkSampler::next(std::optional<NodeId> prev, NodeId current, Rng& rng) const {
    const auto list = graph_.neighbors(current);
    if (list.empty()) return std::nullopt;
    if (!prev) return list[node_tables_[current].sample(rng)].node;

    if (use_alias_) {
        const std::size_t slot = edge_offsets_[current] + position_in(list, *prev);
        return list[edge_tables_[slot].sample(rng)].node;
    }
    // Propose from the weight-only table, accept with bias / max_bias.
    while (true) {
        const NodeId x = list[node_tables_[current].sample(rng)].node;
        if (uniform01(rng) * max_bias_ < bias(graph_, *prev, x, config_)) return x;
    }
}

Walk WalkSampler::walk(NodeId start, std::size_t length, Rng& rng) const {
    Walk walk;
    walk.reserve(length);
    walk.push_back(start);
    std::optional<NodeId> prev;
    while (walk.size() < length) {
        const auto step = next(prev, walk.back(), rng);
        if (!step) break;
        prev = walk.back();
        walk.push_back(*step);
    }
    return walk;
}

std::vector<Walk> generate_walks(const RelationGraph& graph, const WalkConfig& config) {
    config.validate();
    if (graph.empty()) throw Error(ErrorCode::insufficient_data, "cannot walk an empty graph");
    const WalkSampler sampler(graph, config);

    std::vector<NodeId> starts;
    for (NodeId v = 0; v < graph.node_count(); ++v) {
        if (graph.degree(v) > 0) starts.push_back(v);
    }
    // (pass, node) in output order
    std::vector<std::pair<std::size_t, NodeId>> plan;
    plan.reserve(starts.size() * config.walks_per_node);
    for (std::size_t pass = 0; pass < config.walks_per_node; ++pass) {
        Rng order_rng(derive_seed(config.seed, 0x6f72646572ULL, pass));
        auto order = starts;
        shuffle(order, order_rng);
        for (NodeId v : order) plan.emplace_back(pass, v);
    }

    std::vector<Walk> walks(plan.size());
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto [pass, node] = plan[i];
            Rng rng(derive_seed(config.seed, pass + 1, node));
            walks[i] = sampler.walk(node, config.walk_length, rng);
        }
    };
    const std::size_t workers = std::min(config.workers, std::max<std::size_t>(plan.size(), 1));
    if (workers <= 1) {
        run(0, plan.size());
    } else {
        std::vector<std::thread> threads;
        const std::size_t chunk = (plan.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(plan.size(), w * chunk);
            const std::size_t end = std::min(plan.size(), begin + chunk);
            threads.emplace_back(run, begin, end);
        }
        for (auto& t : threads) t.join();
    }
    return walks;
}

}  // namespace litkg
