#include <doctest.h>

#include <litkg/embedding.hpp>
#include <litkg/error.hpp>
#include <litkg/graph.hpp>
#include <litkg/walk.hpp>

#include "oracles.hpp"

#include <cmath>
#include <sstream>

using namespace litkg;

namespace {

struct PairPoint {
    std::vector<double> center, context;
    std::vector<std::vector<double>> negatives;

    std::vector<std::span<const double>> negative_views() const {
        return {negatives.begin(), negatives.end()};
    }
    double loss() const { return sgns_pair_loss(center, context, negative_views()); }
};

PairPoint random_point(Rng& rng, std::size_t dim, std::size_t negatives) {
    auto vec = [&] {
        std::vector<double> v(dim);
        for (auto& x : v) x = (uniform01(rng) - 0.5) * 2.0;
        return v;
    };
    PairPoint p{vec(), vec(), {}};
    for (std::size_t k = 0; k < negatives; ++k) p.negatives.push_back(vec());
    return p;
}

double central_difference(PairPoint& p, std::vector<double>& param, std::size_t i, double h) {
    const double saved = param[i];
    param[i] = saved + h;
    const double up = p.loss();
    param[i] = saved - h;
    const double down = p.loss();
    param[i] = saved;
    return (up - down) / (2 * h);
}

EmbeddingModel train_on(const RelationGraph& g, SGNSConfig sgns, TrainingStats* stats = nullptr) {
    WalkConfig walk;
    walk.walk_length = 20;
    walk.walks_per_node = 10;
    return train_embeddings(generate_walks(g, walk), g.names(), sgns, stats);
}

RelationGraph two_cliques(std::size_t size) {
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> edges;
    for (const char* side : {"l", "r"}) {
        for (std::size_t i = 0; i < size; ++i) {
            for (std::size_t j = i + 1; j < size; ++j) {
                edges.emplace_back(side + std::to_string(i), side + std::to_string(j), 1);
            }
        }
    }
    return RelationGraph::from_edges(edges);
}

SGNSConfig small_config() {
    SGNSConfig c;
    c.dimension = 16;
    c.window = 4;
    c.epochs = 5;
    return c;
}

}  // namespace

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        PairPoint p = random_point(rng, 8, 3);
        std::vector<double> gc(8), go(8);
        std::vector<std::vector<double>> gn(3, std::vector<double>(8));
        std::vector<std::span<double>> gn_views(gn.begin(), gn.end());
        const double loss = sgns_pair_gradient(p.center, p.context, p.negative_views(), gc, go, gn_views);
        CHECK(loss == doctest::Approx(p.loss()).epsilon(1e-12));
        auto check = [&](std::vector<double>& param, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                const double fd = central_difference(p, param, i, 1e-5);
                CHECK(std::abs(fd - grad[i]) <= 1e-5 * std::max(1.0, std::abs(grad[i])));
            }
        };
        check(p.center, gc);
        check(p.context, go);
        for (std::size_t k = 0; k < 3; ++k) check(p.negatives[k], gn[k]);
    }
}

TEST_CASE("fused SGD step equals lr times the gradient") {
    Rng rng(9);
    PairPoint p = random_point(rng, 12, 4);
    std::vector<double> gc(12), go(12);
    std::vector<std::vector<double>> gn(4, std::vector<double>(12));
    std::vector<std::span<double>> gn_views(gn.begin(), gn.end());
    const double loss = sgns_pair_gradient(p.center, p.context, p.negative_views(), gc, go, gn_views);

    PairPoint q = p;
    std::vector<std::span<double>> neg_views(q.negatives.begin(), q.negatives.end());
    std::vector<double> scratch(12);
    const double lr = 0.05;
    CHECK(sgns_sgd_step(q.center, q.context, neg_views, lr, scratch) == doctest::Approx(loss).epsilon(1e-12));
    for (std::size_t i = 0; i < 12; ++i) {
        CHECK(q.center[i] == doctest::Approx(p.center[i] - lr * gc[i]).epsilon(1e-12));
        CHECK(q.context[i] == doctest::Approx(p.context[i] - lr * go[i]).epsilon(1e-12));
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(q.negatives[k][i] == doctest::Approx(p.negatives[k][i] - lr * gn[k][i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("loss stays finite for large scores") {
    std::vector<double> c(4, 30.0), o(4, -30.0);
    std::vector<std::span<const double>> none;
    CHECK(std::isfinite(sgns_pair_loss(c, o, none)));
    CHECK(sgns_pair_loss(c, o, none) == doctest::Approx(3600.0));
}

TEST_CASE("two cliques separate") {
    const auto g = two_cliques(6);
    const auto model = train_on(g, small_config());
    double intra = 0, inter = 0;
    std::size_t n_intra = 0, n_inter = 0;
    for (const auto& x : model.vocabulary()) {
        for (const auto& y : model.vocabulary()) {
            if (x >= y) continue;
            const double c = oracle::cosine(oracle::row(model, x), oracle::row(model, y));
            if (x[0] == y[0]) {
                intra += c;
                ++n_intra;
            } else {
                inter += c;
                ++n_inter;
            }
        }
    }
    CHECK(intra / n_intra > inter / n_inter);
}

TEST_CASE("training is deterministic with one worker") {
    const auto g = two_cliques(5);
    const auto a = train_on(g, small_config());
    const auto b = train_on(g, small_config());
    CHECK(a == b);
    auto other = small_config();
    other.seed = 2;
    CHECK_FALSE(train_on(g, other) == a);
    CHECK(a.size() == 10);
    CHECK(a.dimension() == 16);
}

TEST_CASE("epoch loss trends down") {
    TrainingStats stats;
    train_on(two_cliques(6), small_config(), &stats);
    REQUIRE(stats.epoch_mean_loss.size() == 5);
    CHECK(stats.epoch_mean_loss.back() < stats.epoch_mean_loss.front());
    CHECK(stats.pairs > 0);
}

TEST_CASE("multi-worker training completes") {
    auto c = small_config();
    c.workers = 2;
    const auto model = train_on(two_cliques(5), c);
    for (float x : model.data()) CHECK(std::isfinite(x));
}

TEST_CASE("invalid training settings") {
    const auto g = two_cliques(3);
    const auto walks = generate_walks(g, WalkConfig{});
    for (auto mutate : {+[](SGNSConfig& c) { c.dimension = 0; }, +[](SGNSConfig& c) { c.epochs = 0; },
                        +[](SGNSConfig& c) { c.window = 0; }, +[](SGNSConfig& c) { c.initial_lr = -1; }}) {
        SGNSConfig c = small_config();
        mutate(c);
        CHECK_THROWS_AS(train_embeddings(walks, g.names(), c), Error);
    }
    CHECK_THROWS_AS(train_embeddings({}, g.names(), small_config()), Error);
}

TEST_CASE("text and binary formats round-trip") {
    const auto model = oracle::random_model(7, 5, 3);
    std::stringstream text;
    model.save_text(text);
    const auto from_text = EmbeddingModel::load_text(text);
    CHECK(from_text == model);
    CHECK(from_text.seed() == 3);

    std::stringstream bin;
    model.save_binary(bin);
    CHECK(bin.str().substr(0, 5) == "KFEM1");
    CHECK(EmbeddingModel::load_binary(bin) == model);

    oracle::TempDir tmp("emb");
    model.save(tmp / "m.txt");
    model.save(tmp / "m.kfem");
    CHECK(EmbeddingModel::load(tmp / "m.txt") == model);
    CHECK(EmbeddingModel::load(tmp / "m.kfem") == model);

    std::stringstream truncated(bin.str().substr(0, 30));
    CHECK_THROWS_AS(EmbeddingModel::load_binary(truncated), Error);
    std::stringstream bad_text("2 3 0\na 1 2 3\n");
    CHECK_THROWS_AS(EmbeddingModel::load_text(bad_text), Error);
}
