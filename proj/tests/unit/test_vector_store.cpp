#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "social/vector_store.hpp"
#include "test_support.hpp"

using namespace social;
using namespace social::memory;

namespace {

Chunk chunk(std::string id, std::vector<double> v, std::string text = "t") {
    Chunk c;
    c.chunk_id = std::move(id);
    c.text = std::move(text);
    c.embedding = std::move(v);
    return c;
}

std::vector<std::string> ids(const std::vector<RetrievedPassage>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(p.chunk.chunk_id);
    return out;
}

}  // namespace

TEST_SUITE("vector_store") {

TEST_CASE("upsert counts and replace semantics") {
    VectorStore s(2);
    CHECK(s.upsert("knowledge", {chunk("a", {1, 0}), chunk("b", {0, 1}), chunk("c", {1, 1})}) == 3);
    CHECK(s.size("knowledge") == 3);
    s.upsert("knowledge", {chunk("a", {0, 1}, "new")});
    CHECK(s.size("knowledge") == 3);
    const auto cs = s.chunks("knowledge");
    CHECK(cs[0].text == "new");
    CHECK(cs[0].insertion_seq == 0);  // keeps original position
    CHECK_THROWS_AS(s.upsert("knowledge", {chunk("d", {1, 0, 0})}), ValidationError);
    CHECK(s.size("knowledge") == 3);
}

TEST_CASE("retrieval ordering, ties and caps") {
    VectorStore s(2);
    CHECK(s.retrieve("knowledge", std::vector<double>{1, 0}).empty());
    s.upsert("knowledge", {chunk("x", {0, 1}), chunk("tie1", {2, 0}), chunk("tie2", {1, 0}), chunk("diag", {1, 1})});
    const auto r = s.retrieve("knowledge", std::vector<double>{1, 0}, 5);
    CHECK(ids(r) == std::vector<std::string>{"tie1", "tie2", "diag", "x"});
    CHECK(r[0].rank == 1);
    CHECK(r[0].score == doctest::Approx(1.0));
    CHECK(r[0].chunk.embedding.empty());
    CHECK(s.retrieve("knowledge", std::vector<double>{1, 0}, 2).size() == 2);
    CHECK_THROWS_AS(s.retrieve("knowledge", std::vector<double>{1, 0}, 0), ValidationError);
    CHECK_THROWS_AS(s.retrieve("knowledge", std::vector<double>{1}, 1), ValidationError);
}

TEST_CASE("spaces are isolated") {
    VectorStore s(2);
    s.upsert("user:a", {chunk("a1", {1, 0})});
    s.upsert("user:b", {chunk("b1", {1, 0})});
    CHECK(ids(s.retrieve("user:a", std::vector<double>{1, 0})) == std::vector<std::string>{"a1"});
    CHECK(ids(s.retrieve("user:b", std::vector<double>{1, 0})) == std::vector<std::string>{"b1"});
    CHECK(s.retrieve("user:c", std::vector<double>{1, 0}).empty());
}

TEST_CASE("brute-force oracle on random stores") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1);
    VectorStore s(8);
    std::vector<Chunk> all;
    for (int i = 0; i < 500; ++i) {
        std::vector<double> v(8);
        for (auto& x : v) x = std::round(u(rng) * 2) / 2;  // coarse values -> ties happen
        if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0; })) v[0] = 1;
        all.push_back(chunk("c" + std::to_string(i), v));
    }
    s.upsert("knowledge", all);
    for (int q = 0; q < 50; ++q) {
        std::vector<double> query(8);
        for (auto& x : query) x = u(rng);
        std::vector<std::pair<double, int>> scored;
        for (int i = 0; i < 500; ++i) {
            const auto& e = all[i].embedding;
            double dot = 0, en = 0, qn = 0;
            for (int d = 0; d < 8; ++d) {
                dot += e[d] * query[d];
                en += e[d] * e[d];
                qn += query[d] * query[d];
            }
            scored.push_back({dot / (std::sqrt(en) * std::sqrt(qn)), i});
        }
        std::stable_sort(scored.begin(), scored.end(), [](auto& a, auto& b) { return a.first > b.first; });
        std::vector<std::string> want;
        for (int k = 0; k < 5; ++k) want.push_back("c" + std::to_string(scored[k].second));
        CHECK(ids(s.retrieve("knowledge", query, 5)) == want);
    }
}

TEST_CASE("persistence: journal replay, checkpoint, torn tail") {
    testing::TempDir dir;
    {
        VectorStore s(2, dir.path());
        s.upsert("knowledge", {chunk("k1", {1, 0})});
        s.upsert("user:bob smith", {chunk("m1", {0, 1})});
        s.upsert("other", {chunk("o1", {0, 1})});
        // no checkpoint: the journal alone must restore state
    }
    CHECK(std::filesystem::exists(dir / "knowledge" / "journal.jsonl"));
    CHECK(std::filesystem::exists(dir.path() / "memory" / safe_path_component("bob smith") / "journal.jsonl"));
    {
        VectorStore s(2, dir.path());
        CHECK(s.size("knowledge") == 1);
        CHECK(s.size("user:bob smith") == 1);
        CHECK(s.size("other") == 1);
        s.checkpoint();
        CHECK(testing::slurp(dir / "knowledge" / "journal.jsonl").empty());
        s.upsert("knowledge", {chunk("k2", {0, 1})});
    }
    // simulate a crash mid-append
    {
        std::ofstream out(dir / "knowledge" / "journal.jsonl", std::ios::app);
        out << "{\"op\":\"upsert\",\"chunk\":{\"id\":\"k3\"";
    }
    VectorStore s(2, dir.path());
    CHECK(s.size("knowledge") == 2);
    const auto cs = s.chunks("knowledge");
    CHECK(cs[1].chunk_id == "k2");
    CHECK(cs[1].insertion_seq == 1);
    CHECK_THROWS_AS(VectorStore(3, dir.path()), ConfigError);
}

TEST_CASE("compaction threshold rewrites the snapshot") {
    testing::TempDir dir;
    VectorStore s(2, dir.path(), 3);
    for (int i = 0; i < 3; ++i) s.upsert("knowledge", {chunk("k" + std::to_string(i), {1, 0})});
    CHECK(testing::slurp(dir / "knowledge" / "journal.jsonl").empty());
    CHECK(std::filesystem::exists(dir / "knowledge" / "snapshot.jsonl"));
    s.upsert("knowledge", {chunk("k9", {1, 0})});
    VectorStore t(2, dir.path());
    CHECK(t.size("knowledge") == 4);
}

TEST_CASE("safe path components") {
    CHECK(safe_path_component("alice") == "alice");
    CHECK(safe_path_component("a/b c") == "a%2Fb%20c");
    CHECK(unsafe_path_component(safe_path_component("../x:y")) == "../x:y");
    CHECK(safe_path_component("..") != "..");
}

}
