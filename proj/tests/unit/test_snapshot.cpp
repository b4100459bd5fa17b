#include <doctest.h>

#include <litkg/error.hpp>
#include <litkg/fsutil.hpp>
#include <litkg/snapshot.hpp>

#include "oracles.hpp"

#include <fstream>

using namespace litkg;
using namespace std::chrono;

namespace {

RelationTriple triple(std::string a, std::string b, std::string article, std::size_t sentence = 0) {
    RelationTriple t;
    t.concept_a = std::move(a);
    t.concept_b = std::move(b);
    t.article_id = std::move(article);
    t.sentence_index = sentence;
    t.sentence_text = "s";
    t.pub_date = Date{year{2020}, month{1}, day{1}};
    t.extraction_date = Date{year{2024}, month{1}, day{1}};
    return t;
}

}  // namespace

TEST_CASE("published snapshots are immutable and numbered") {
    Store store;
    store.insert_triples(std::vector<RelationTriple>{triple("a", "b", "P1")});
    const auto s1 = publish_snapshot(store, nullptr);
    store.insert_triples(std::vector<RelationTriple>{triple("a", "c", "P2")});
    const auto s2 = publish_snapshot(store, nullptr);
    CHECK(s1->id == 1);
    CHECK(s2->id == 2);
    CHECK(s1->store->triple_count() == 1);
    CHECK(s1->graph->edge_count() == 1);
    CHECK(s2->graph->edge_count() == 2);

    SnapshotHolder holder;
    CHECK(holder.current()->id == 0);
    CHECK(holder.current()->store->triple_count() == 0);
    holder.replace(s1);
    const auto reader = holder.current();
    holder.replace(s2);
    CHECK(reader->id == 1);
    CHECK(holder.current()->id == 2);
}

TEST_CASE("log round-trip ignores a torn tail") {
    oracle::TempDir tmp("log");
    DataDir dir(tmp.path());
    const std::vector<ArticleTriples> articles{{"P1", {triple("a", "b", "P1")}}, {"P2", {}}};
    dir.append_log(articles);
    const auto size = dir.log_size();
    append_durably(dir.log_path(), R"({"article_id": "P3", "trip)");
    const auto back = dir.read_log(0, dir.log_size());
    REQUIRE(back.size() == 2);
    CHECK(back[0].article_id == "P1");
    CHECK(back[0].triples == articles[0].triples);
    CHECK(back[1].triples.empty());
    CHECK(dir.read_log(size, dir.log_size()).empty());
}

TEST_CASE("generation write and recovery") {
    oracle::TempDir tmp("gen");
    DataDir dir(tmp.path());
    Store store;
    const std::vector<ArticleTriples> first{{"P1", {triple("a", "b", "P1"), triple("b", "c", "P1", 1)}}};
    dir.append_log(first);
    store.replace_articles(first);
    const auto model = std::make_shared<const EmbeddingModel>(oracle::random_model(3, 4, 1));
    auto snap = publish_snapshot(store, model);
    dir.write_generation(*snap, dir.log_size());
    CHECK(dir.current_generation() == 1);
    CHECK(dir.generation_complete(1));
    CHECK(read_file(dir.manifest_path()) == "generation 1\n");

    // written after the generation: replayed into the store but not the snapshot
    const std::vector<ArticleTriples> second{{"P2", {triple("a", "d", "P2")}}};
    dir.append_log(second);

    const auto recovered = recover(dir, nullptr);
    REQUIRE(recovered.snapshot);
    CHECK(recovered.snapshot->id == 1);
    CHECK(recovered.snapshot->store->triple_count() == 2);
    CHECK(*recovered.snapshot->embedding == *model);
    CHECK(recovered.store.state().triple_count() == 3);
    CHECK(recovered.store.last_snapshot_id() == 1);
}

TEST_CASE("partial generations are cleaned and corrupt ones rejected") {
    oracle::TempDir tmp("partial");
    DataDir dir(tmp.path());
    Store store;
    const std::vector<ArticleTriples> first{{"P1", {triple("a", "b", "P1")}}};
    dir.append_log(first);
    store.replace_articles(first);
    dir.write_generation(*publish_snapshot(store, nullptr), dir.log_size());

    std::filesystem::create_directories(dir.root() / "index" / "00000002.tmp");
    const auto r = recover(dir, nullptr);
    CHECK_FALSE(std::filesystem::exists(dir.root() / "index" / "00000002.tmp"));
    CHECK(r.snapshot->id == 1);

    std::ofstream(dir.generation_dir(1) / "summaries.jsonl", std::ios::app) << "junk\n";
    CHECK_FALSE(dir.generation_complete(1));
    CHECK_THROWS_AS(recover(dir, nullptr), Error);
}

TEST_CASE("empty directory recovers to nothing") {
    oracle::TempDir tmp("empty");
    DataDir dir(tmp.path());
    const auto r = recover(dir, nullptr);
    CHECK_FALSE(r.snapshot);
    CHECK(r.store.state().triple_count() == 0);
    CHECK_FALSE(dir.current_generation());
}

TEST_CASE("writer lock is exclusive") {
    oracle::TempDir tmp("lock");
    FileLock first(tmp / "LOCK");
    CHECK_THROWS_AS(FileLock(tmp / "LOCK"), Error);
}
