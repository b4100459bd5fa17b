#include <doctest.h>

#include <litkg/error.hpp>
#include <litkg/graph.hpp>
#include <litkg/semantics.hpp>

#include "oracles.hpp"

using namespace litkg;

namespace {

EmbeddingModel model_of(const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
    std::vector<std::string> vocab;
    std::vector<float> data;
    for (const auto& [id, v] : rows) {
        vocab.push_back(id);
        data.insert(data.end(), v.begin(), v.end());
    }
    return EmbeddingModel(vocab, rows.front().second.size(), data);
}

std::vector<std::string> ids(const std::vector<SemanticHit>& hits) {
    std::vector<std::string> out;
    for (const auto& h : hits) out.push_back(h.concept_id);
    return out;
}

RelationGraph random_graph(const EmbeddingModel& model, double density, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::tuple<std::string, std::string, std::uint64_t>> edges;
    const auto& v = model.vocabulary();
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            if (uniform01(rng) < density) edges.emplace_back(v[i], v[j], 1);
        }
    }
    return RelationGraph::from_edges(edges);
}

}  // namespace

TEST_CASE("combine normalizes the sum") {
    const auto m = model_of({{"a", {3, 0}}, {"b", {0, 4}}, {"c", {-3, 0}}});
    const std::vector<std::string> ab{"a", "b"};
    const auto q = combine(ab, m);
    CHECK(q.vector[0] == doctest::Approx(3.0 / 5));
    CHECK(q.vector[1] == doctest::Approx(4.0 / 5));
    CHECK(q.source_concepts == ab);

    const std::vector<std::string> ac{"a", "c"};
    CHECK_THROWS_WITH_AS(combine(ac, m), doctest::Contains(""), Error);
    try {
        combine(ac, m);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::degenerate_query);
    }
    const std::vector<std::string> unknown{"a", "x", "y"};
    try {
        combine(unknown, m);
        FAIL("expected not_found");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::not_found);
        CHECK(std::string(e.what()).find('x') != std::string::npos);
        CHECK(std::string(e.what()).find('y') != std::string::npos);
    }
    try {
        combine(std::vector<std::string>{}, m);
        FAIL("expected bad_request");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::bad_request);
    }
}

TEST_CASE("top-k matches a brute-force ranking") {
    const auto m = oracle::random_model(40, 8, 5);
    const auto g = random_graph(m, 0.1, 2);
    for (const char* src : {"v000", "v017", "v039"}) {
        const std::vector<std::string> sources{src};
        const auto q = combine(sources, m);
        const auto hits = top_k_related(q, 10, {}, m, g);
        const auto expected = oracle::brute_rank(m, oracle::row(m, src), {src});
        REQUIRE(hits.size() == 10);
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].concept_id == expected[i].first);
            CHECK(hits[i].score == doctest::Approx(expected[i].second).epsilon(1e-6));
            const auto u = g.find(src), w = g.find(hits[i].concept_id);
            CHECK(hits[i].directly_related == (u && w && g.adjacent(*u, *w)));
        }
    }
}

TEST_CASE("exclusions and ties") {
    const auto m = model_of({{"q", {1, 0}}, {"b", {1, 1}}, {"a", {1, 1}}, {"c", {1, 0.1f}}, {"d", {-1, 0}}});
    const auto g = RelationGraph::from_edges({{"q", "c", 1}, {"a", "d", 1}});
    const std::vector<std::string> sources{"q"};
    const auto q = combine(sources, m);
    CHECK(ids(top_k_related(q, 10, {}, m, g)) == std::vector<std::string>{"c", "a", "b", "d"});
    CHECK(ids(top_k_related(q, 2, {"c"}, m, g)) == std::vector<std::string>{"a", "b"});
    CHECK(ids(related_not_connected(q, 10, m, g)) == std::vector<std::string>{"a", "b", "d"});
    CHECK(ids(related_not_connected("q", 1, m, g)) == std::vector<std::string>{"a"});
    CHECK_THROWS_AS(top_k_related(q, 0, {}, m, g), Error);
}

TEST_CASE("mutual rank") {
    const auto m = model_of({{"a", {1, 0}}, {"b", {1, 0.2f}}, {"c", {0, 1}}, {"d", {1, -0.1f}}, {"e", {-1, 0}}});
    const auto g = RelationGraph::from_edges({{"a", "c", 1}, {"b", "e", 1}, {"c", "d", 1}});
    // a's list: d, b, e; b's list: a, d, c
    const auto ab = mutual_rank("a", "b", 5, m, g);
    REQUIRE(ab);
    CHECK(ab->rank == 1);
    CHECK_FALSE(ab->one_sided);
    // d's list: a, b, e; e's list: c, d, a
    const auto de = mutual_rank("d", "e", 2, m, g);
    REQUIRE(de);
    CHECK(de->rank == 2);
    CHECK(de->one_sided);
    const auto ae = mutual_rank("a", "e", 3, m, g);
    REQUIRE(ae);
    CHECK(ae->rank == 3);
    CHECK_FALSE(ae->one_sided);
    CHECK_FALSE(mutual_rank("a", "e", 1, m, g));
    CHECK_THROWS_AS(mutual_rank("a", "c", 5, m, g), Error);
}

TEST_CASE("cosmul ranking equals cosine ranking") {
    const auto m = oracle::random_model(50, 16, 8);
    const auto g = RelationGraph::from_edges({{"v000", "v001", 1}});
    for (std::size_t i = 0; i < 50; i += 7) {
        const std::vector<std::string> sources{m.vocabulary()[i]};
        const auto q = combine(sources, m);
        CHECK(ids(rank_by_cosmul(q, m)) == ids(top_k_related(q, 1000, {}, m, g)));
    }
    CHECK(cosmul_score(0.5) > cosmul_score(0.25));
}
