#include <doctest.h>

#include <litkg/error.hpp>
#include <litkg/graph.hpp>
#include <litkg/store.hpp>
#include <litkg/walk.hpp>

#include <cmath>
#include <map>
#include <numeric>

using namespace litkg;

namespace {

WalkConfig config(double p, double q) {
    WalkConfig c;
    c.p = p;
    c.q = q;
    return c;
}

NodeId id(const RelationGraph& g, const char* name) { return *g.find(name); }

double prob_of(const RelationGraph& g, const std::vector<double>& dist, NodeId current, const char* name) {
    const auto nbrs = g.neighbors(current);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        if (nbrs[i].node == id(g, name)) return dist[i];
    }
    return -1.0;
}

/// Fraction of next steps landing on each neighbor of `current` given `prev`.
std::vector<double> empirical(const RelationGraph& g, const WalkSampler& sampler, NodeId prev, NodeId current,
                              std::size_t samples, std::uint64_t seed) {
    Rng rng(seed);
    std::map<NodeId, std::size_t> hits;
    for (std::size_t i = 0; i < samples; ++i) ++hits[*sampler.next(prev, current, rng)];
    std::vector<double> out;
    for (const auto& n : g.neighbors(current)) out.push_back(static_cast<double>(hits[n.node]) / static_cast<double>(samples));
    return out;
}

}  // namespace

TEST_CASE("graph construction") {
    const auto g = RelationGraph::from_edges({{"b", "c", 1}, {"a", "b", 3}});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.weight(id(g, "a"), id(g, "b")) == 3);
    CHECK(g.weight(id(g, "b"), id(g, "a")) == 3);
    CHECK(g.weight(id(g, "a"), id(g, "c")) == 0);
    CHECK(g.degree(id(g, "b")) == 2);
    CHECK(g.names() == std::vector<std::string>{"a", "b", "c"});
    CHECK_THROWS_AS(RelationGraph::from_edges({{"a", "a", 1}}), Error);
    CHECK_THROWS_AS(RelationGraph::from_edges({{"a", "b", 0}}), Error);
    CHECK_THROWS_AS(RelationGraph::from_edges({{"a", "b", 1}, {"b", "a", 1}}), Error);
    CHECK(build_graph(StoreState{}).empty());
}

TEST_CASE("build_graph uses pair counts as weights") {
    Store store;
    RelationTriple t;
    t.concept_a = "a";
    t.concept_b = "b";
    std::vector<RelationTriple> batch;
    for (std::size_t i = 0; i < 3; ++i) {
        t.article_id = "P" + std::to_string(i);
        batch.push_back(t);
    }
    t.concept_a = "b";
    t.concept_b = "c";
    batch.push_back(t);
    store.insert_triples(batch);
    const auto g = build_graph(store.state());
    CHECK(g.edge_count() == 2);
    CHECK(g.weight(id(g, "a"), id(g, "b")) == 3);
    CHECK(g.weight(id(g, "b"), id(g, "c")) == 1);
}

TEST_CASE("triangle: return probability 4/5") {
    const auto g = RelationGraph::from_edges({{"t", "v", 1}, {"v", "x", 1}, {"t", "x", 1}});
    const auto dist = step_distribution(g, id(g, "t"), id(g, "v"), config(0.25, 0.25));
    CHECK(std::abs(prob_of(g, dist, id(g, "v"), "t") - 0.8) <= 1e-12);
    CHECK(std::abs(prob_of(g, dist, id(g, "v"), "x") - 0.2) <= 1e-12);
}

TEST_CASE("path: return and outward step both 1/2") {
    const auto g = RelationGraph::from_edges({{"t", "v", 1}, {"v", "x", 1}});
    const auto dist = step_distribution(g, id(g, "t"), id(g, "v"), config(0.25, 0.25));
    CHECK(std::abs(prob_of(g, dist, id(g, "v"), "t") - 0.5) <= 1e-12);
    CHECK(std::abs(prob_of(g, dist, id(g, "v"), "x") - 0.5) <= 1e-12);
}

TEST_CASE("first step and p=q=1 follow edge weights") {
    const auto g = RelationGraph::from_edges({{"t", "v", 1}, {"v", "x", 3}, {"v", "y", 4}, {"t", "x", 2}});
    const auto v = id(g, "v");
    for (auto prev : {std::optional<NodeId>{}, std::optional<NodeId>{id(g, "t")}}) {
        const auto dist = step_distribution(g, prev, v, config(prev ? 1.0 : 0.25, prev ? 1.0 : 4.0));
        CHECK(std::abs(prob_of(g, dist, v, "t") - 1.0 / 8) <= 1e-12);
        CHECK(std::abs(prob_of(g, dist, v, "x") - 3.0 / 8) <= 1e-12);
        CHECK(std::abs(prob_of(g, dist, v, "y") - 4.0 / 8) <= 1e-12);
    }
}

TEST_CASE("step distribution sums to one") {
    const auto g = RelationGraph::from_edges(
        {{"a", "b", 2}, {"b", "c", 7}, {"c", "d", 1}, {"a", "c", 3}, {"b", "d", 5}, {"d", "e", 1}});
    for (double p : {0.25, 1.0, 4.0}) {
        for (double q : {0.25, 1.0, 4.0}) {
            for (const auto& e : g.edges()) {
                for (auto [t, v] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
                    const auto dist = step_distribution(g, t, v, config(p, q));
                    CHECK(std::abs(std::accumulate(dist.begin(), dist.end(), 0.0) - 1.0) <= 1e-12);
                    for (double x : dist) CHECK(x >= 0.0);
                }
            }
        }
    }
}

TEST_CASE("both samplers reproduce the distribution") {
    const auto g = RelationGraph::from_edges(
        {{"t", "v", 2}, {"v", "x", 1}, {"v", "y", 3}, {"t", "x", 1}, {"y", "z", 1}, {"v", "w", 1}});
    for (auto kind : {NeighborSampler::alias, NeighborSampler::rejection}) {
        auto c = config(0.25, 2.0);
        c.sampler = kind;
        const WalkSampler sampler(g, c);
        CHECK(sampler.uses_alias_tables() == (kind == NeighborSampler::alias));
        const auto expected = step_distribution(g, id(g, "t"), id(g, "v"), c);
        const auto got = empirical(g, sampler, id(g, "t"), id(g, "v"), 100000, 11);
        for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(got[i] - expected[i]) <= 0.01);
    }
}

TEST_CASE("lower p returns more often") {
    const auto g = RelationGraph::from_edges({{"t", "v", 1}, {"v", "x", 1}, {"v", "y", 1}, {"x", "y", 1}});
    auto rate = [&](double p) {
        const WalkSampler sampler(g, config(p, 1.0));
        return empirical(g, sampler, id(g, "t"), id(g, "v"), 20000, 5)[0];
    };
    CHECK(rate(0.25) > rate(4.0));
}

TEST_CASE("walk counts and forced alternation") {
    const auto tri = RelationGraph::from_edges({{"a", "b", 1}, {"b", "c", 1}, {"a", "c", 1}});
    auto c = config(0.25, 0.25);
    CHECK(generate_walks(tri, c).size() == 54);

    const auto pair = RelationGraph::from_edges({{"A", "B", 1}});
    const auto walks = generate_walks(pair, c);
    CHECK(walks.size() == 36);
    for (const auto& w : walks) {
        REQUIRE(w.size() == 80);
        for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] != w[i - 1]);
        for (std::size_t i = 2; i < w.size(); ++i) CHECK(w[i] == w[i - 2]);
    }
}

TEST_CASE("walks are deterministic and independent of workers") {
    const auto g = RelationGraph::from_edges(
        {{"a", "b", 2}, {"b", "c", 7}, {"c", "d", 1}, {"a", "c", 3}, {"b", "d", 5}, {"d", "e", 1}});
    auto c = config(0.5, 2.0);
    c.walk_length = 20;
    c.walks_per_node = 3;
    const auto one = generate_walks(g, c);
    CHECK(generate_walks(g, c) == one);
    c.workers = 3;
    CHECK(generate_walks(g, c) == one);
    c.sampler = NeighborSampler::rejection;
    c.workers = 1;
    CHECK(generate_walks(g, c).size() == one.size());
    c.seed = 2;
    CHECK(generate_walks(g, c) != one);
}

TEST_CASE("invalid walk settings") {
    CHECK_THROWS_AS(config(0.0, 1.0).validate(), Error);
    CHECK_THROWS_AS(config(1.0, -1.0).validate(), Error);
    auto c = config(1.0, 1.0);
    c.walk_length = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("alias table draws match weights") {
    const std::vector<double> w{1, 0, 3, 6};
    const AliasTable table(w);
    Rng rng(3);
    std::vector<std::size_t> hits(4);
    for (int i = 0; i < 100000; ++i) ++hits[table.sample(rng)];
    CHECK(hits[1] == 0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(hits[i] / 1e5 - w[i] / 10) <= 0.01);
}

TEST_CASE("p = q = 1 walks are simple random walks") {
    const auto g = RelationGraph::from_edges(
        {{"a", "b", 1}, {"a", "c", 1}, {"a", "d", 1}, {"b", "c", 1}, {"d", "e", 1}, {"c", "e", 1}});
    auto c = config(1.0, 1.0);
    c.walk_length = 40;
    c.walks_per_node = 200;
    const auto a = id(g, "a");
    std::map<NodeId, double> counts;
    double total = 0;
    for (const auto& w : generate_walks(g, c)) {
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            if (w[i] != a) continue;
            ++counts[w[i + 1]];
            ++total;
        }
    }
    double chi2 = 0;
    for (const auto& n : g.neighbors(a)) {
        const double expected = total / 3.0;
        chi2 += (counts[n.node] - expected) * (counts[n.node] - expected) / expected;
    }
    // two degrees of freedom, significance 0.01
    CHECK(chi2 < 9.21);
}
