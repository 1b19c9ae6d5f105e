#include <cmath>

#include "doctest.h"
#include "social/embedding.hpp"
#include "test_support.hpp"

using namespace social;
using namespace social::memory;
using nlohmann::json;

namespace {

double norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("hashing embedder basics") {
    HashingEmbedder e(256);
    CHECK(e.dimension() == 256);
    const auto a = e.embed("Alpha beta");
    CHECK(a.size() == 256);
    CHECK(a == e.embed("Alpha beta"));
    CHECK(a == e.embed("beta ALPHA!"));
    CHECK(std::abs(norm(a) - 1.0) < 1e-9);
    CHECK(std::abs(norm(e.embed("?!")) - 1.0) < 1e-9);
    CHECK(std::abs(norm(e.embed("der Bär läuft schnell schnell")) - 1.0) < 1e-9);
    CHECK_THROWS_AS(e.embed("   "), ValidationError);
    CHECK_THROWS_AS(HashingEmbedder(0), ValidationError);
}

TEST_CASE("tokenizer") {
    CHECK(HashingEmbedder::tokenize("Hello, World! it's 42") ==
          std::vector<std::string>{"hello", "world", "it", "s", "42"});
    CHECK(HashingEmbedder::tokenize("caf\xC3\xA9 bar") == std::vector<std::string>{"caf\xC3\xA9", "bar"});
    CHECK(HashingEmbedder::tokenize("...").empty());
    // FNV-1a reference values
    CHECK(HashingEmbedder::hash("") == 14695981039346656037ull);
    CHECK(HashingEmbedder::hash("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("http embedder") {
    testing::StubHttp stub;
    stub.server().Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        if (body["input"] == "fail") {
            res.status = 500;
            return;
        }
        if (body["input"] == "short") {
            res.set_content(R"({"data":[{"embedding":[1.0]}]})", "application/json");
            return;
        }
        res.set_content(R"({"data":[{"embedding":[0.6, 0.8]}]})", "application/json");
    });
    stub.start();
    HttpEmbedderConfig cfg;
    cfg.endpoint = stub.url("/embed");
    cfg.dimension = 2;
    HttpEmbedder e(cfg);
    CHECK(e.embed("hello") == std::vector<double>{0.6, 0.8});
    CHECK_THROWS_AS(e.embed("fail"), RetryableError);
    CHECK_THROWS_AS(e.embed("short"), RetryableError);
    CHECK_THROWS_AS(e.embed(""), ValidationError);
    cfg.dimension = 0;
    CHECK_THROWS_AS(HttpEmbedder{cfg}, ConfigError);
}

}
