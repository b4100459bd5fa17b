#include <doctest.h>

#include <litkg/service.hpp>

#include "fixtures.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

using namespace litkg;
using nlohmann::json;

namespace {

struct Served {
    oracle::TempDir tmp{"svc"};
    std::unique_ptr<Pipeline> pipeline;

    explicit Served(bool rebuild = true) {
        fixture::copy_updates(tmp / "updates");
        pipeline = std::make_unique<Pipeline>(fixture::options(tmp / "data", tmp / "updates"));
        pipeline->ingest(tmp / "updates");
        if (rebuild) pipeline->rebuild();
    }
};

json get(const ApiService& api, const std::string& target, int expect = 200) {
    const auto r = api.handle(ApiRequest::get(target));
    CHECK_MESSAGE(r.status == expect, target << " -> " << r.body);
    return json::parse(r.body);
}

json post(const ApiService& api, const std::string& target, const std::string& body, int expect = 200) {
    const auto r = api.handle(ApiRequest::post(target, body));
    CHECK_MESSAGE(r.status == expect, target << " -> " << r.body);
    return json::parse(r.body);
}

}  // namespace

TEST_CASE("request parsing") {
    const auto r = ApiRequest::get("/v1/concepts?q=working%20memory&limit=5");
    CHECK(r.path == "/v1/concepts");
    CHECK(r.query.at("q") == "working memory");
    CHECK(r.query.at("limit") == "5");
    CHECK(ApiRequest::post("/v1/x", "{}").method == "POST");
}

TEST_CASE("stats and concept search") {
    Served s;
    const ApiService api(s.pipeline->holder());
    const auto stats = get(api, "/v1/stats");
    CHECK(stats["relations"] == 16);
    CHECK(stats["triples"] == 25);
    CHECK(stats["articles"] == 8);
    CHECK(stats["concepts"] == 10);
    CHECK(stats["snapshot_id"] == 1);
    CHECK(stats["last_update"].is_string());

    const auto hits = get(api, "/v1/concepts?q=prefrontal");
    REQUIRE(hits.size() == 2);
    CHECK(hits[0]["id"] == "prefrontal_cortex");
    CHECK(hits[0]["total_relations"] == 7);
    CHECK(hits[1]["id"] == "dorsolateral_prefrontal_cortex");
    CHECK(get(api, "/v1/concepts?q=PFC")[0]["id"] == "prefrontal_cortex");
    CHECK(get(api, "/v1/concepts?q=prefrontal&limit=1").size() == 1);
    get(api, "/v1/concepts?q=x&limit=abc", 400);
}

TEST_CASE("relation detail with exact probabilities") {
    Served s;
    const ApiService api(s.pipeline->holder());
    const auto r = get(api, "/v1/relations/set_shifting/prefrontal_cortex");
    CHECK(r["summary"]["count"] == 3);
    // a and b follow the canonical key: a = prefrontal_cortex (total 7), b = set_shifting (total 8)
    CHECK(r["summary"]["a"] == "prefrontal_cortex");
    CHECK(r["p_a_given_b"]["numerator"] == 3);
    CHECK(r["p_a_given_b"]["denominator"] == 8);
    CHECK(r["p_a_given_b"]["value"] == "0.375");
    CHECK(r["p_b_given_a"]["denominator"] == 7);
    CHECK(r["p_b_given_a"]["value"] == "0.429");
    CHECK(api.handle(ApiRequest::get("/v1/relations/prefrontal_cortex/set_shifting")).body ==
          api.handle(ApiRequest::get("/v1/relations/set_shifting/prefrontal_cortex")).body);
    REQUIRE(r["evidence"].size() == 3);
    CHECK(r["evidence"][0]["pub_date"] <= r["evidence"][2]["pub_date"]);
    const auto desc = get(api, "/v1/relations/prefrontal_cortex/set_shifting?order=desc&limit=1");
    CHECK(desc["evidence"].size() == 1);
    CHECK(desc["evidence"][0]["pub_date"] == r["evidence"][2]["pub_date"]);

    CHECK(get(api, "/v1/relations/autism/levodopa", 404)["error"]["code"] == "not_found");
    get(api, "/v1/relations/autism/autism", 400);
    get(api, "/v1/relations/autism/nonexistent", 404);
}

TEST_CASE("related concepts and categories") {
    Served s;
    const ApiService api(s.pipeline->holder());
    const auto rows = get(api, "/v1/concepts/dopamine/related");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0]["count"] == 2);
    const auto regions = get(api, "/v1/concepts/dopamine/related?category=brain_region");
    REQUIRE(regions.size() == 1);
    CHECK(regions[0]["id"] == "prefrontal_cortex");
    get(api, "/v1/concepts/dopamine/related?category=planet", 400);
    get(api, "/v1/concepts/nonexistent/related", 404);

    const auto cats = get(api, "/v1/categories/brain_region/concepts");
    CHECK(cats.size() == 3);
    CHECK(cats[0]["id"] == "prefrontal_cortex");
    get(api, "/v1/categories/planet/concepts", 404);
}

TEST_CASE("semantic query") {
    Served s;
    const ApiService api(s.pipeline->holder());
    const auto r = post(api, "/v1/semantic/related", R"({"concepts": ["dopamine", "working_memory"], "k": 3})");
    CHECK(r["snapshot_id"] == 1);
    REQUIRE(r["hits"].size() == 3);
    for (const auto& h : r["hits"]) {
        CHECK(h["id"] != "dopamine");
        CHECK(h.contains("directly_related"));
    }
    const auto excl = post(api, "/v1/semantic/related", R"({"concepts": ["autism"], "exclude_direct": true})");
    for (const auto& h : excl["hits"]) CHECK(h["directly_related"] == false);
    post(api, "/v1/semantic/related", R"({"concepts": ["nope"]})", 404);
    post(api, "/v1/semantic/related", R"({"concepts": []})", 400);
    post(api, "/v1/semantic/related", "not json", 400);
    post(api, "/v1/semantic/related", R"({"concepts": ["autism"], "k": 0})", 400);
}

TEST_CASE("no embedding yet") {
    Served s(false);
    const ApiService api(s.pipeline->holder());
    CHECK(get(api, "/v1/stats")["snapshot_id"] == 0);
    CHECK(get(api, "/v1/stats")["last_update"].is_null());
    post(api, "/v1/semantic/related", R"({"concepts": ["autism"]})", 404);
    get(api, "/v1/nothing", 404);
}

TEST_CASE("admin update trigger") {
    Served s;
    const ApiService none(s.pipeline->holder());
    post(none, "/v1/admin/update", "", 404);

    bool busy = false;
    const ApiService api(s.pipeline->holder(), [&]() -> std::optional<std::uint64_t> {
        if (busy) return std::nullopt;
        busy = true;
        return 2;
    });
    const auto ok = post(api, "/v1/admin/update", "", 202);
    CHECK(ok["accepted"] == true);
    CHECK(ok["snapshot_building"] == 2);
    CHECK(post(api, "/v1/admin/update", "", 409)["error"]["code"] == "updating");
}

TEST_CASE("error statuses") {
    CHECK(http_status(ErrorCode::not_found) == 404);
    CHECK(http_status(ErrorCode::validation) == 400);
    CHECK(http_status(ErrorCode::degenerate_query) == 422);
    CHECK(http_status(ErrorCode::updating) == 409);
    CHECK(http_status(ErrorCode::io) == 500);
    const auto r = error_response(ErrorCode::degenerate_query, "zero");
    CHECK(r.status == 422);
    CHECK(json::parse(r.body)["error"]["message"] == "zero");
}

TEST_CASE("HTTP front end serves the same bodies") {
    Served s;
    const ApiService api(s.pipeline->holder());
    oracle::TempDir web("web");
    std::ofstream(web / "index.html") << "<html>ok</html>";
    HttpServer server(api, web.path());
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread t([&] { server.run(); });
    httplib::Client client("127.0.0.1", port);
    for (int i = 0; i < 100 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));

    const auto stats = client.Get("/v1/stats");
    REQUIRE(stats);
    CHECK(stats->status == 200);
    CHECK(stats->body == api.handle(ApiRequest::get("/v1/stats")).body);
    const auto sem = client.Post("/v1/semantic/related", R"({"concepts": ["autism"], "k": 2})", "application/json");
    REQUIRE(sem);
    CHECK(sem->status == 200);
    const auto missing = client.Get("/v1/relations/autism/levodopa");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    const auto page = client.Get("/index.html");
    REQUIRE(page);
    CHECK(page->body == "<html>ok</html>");
    server.stop();
    t.join();
}
