#include <atomic>

#include "doctest.h"
#include "social/llm.hpp"
#include "test_support.hpp"

using namespace social;
using namespace social::llm;
using nlohmann::json;

namespace {

CompletionRequest request_for(const std::string& user_text, const std::string& purpose = "orchestration") {
    CompletionRequest r;
    r.messages.push_back(make_message(Role::system, "sys"));
    r.messages.push_back(make_message(Role::user, user_text));
    r.purpose = purpose;
    return r;
}

ScriptedRule rule(std::string match, std::string response, bool once = false) {
    ScriptedRule r;
    r.match = std::move(match);
    r.response = std::move(response);
    r.consume_once = once;
    return r;
}

}  // namespace

TEST_SUITE("llm") {

TEST_CASE("messages") {
    const auto m = make_message(Role::assistant, "hi", from_epoch_seconds(5));
    const auto back = message_from_json(to_json(m));
    CHECK(back == m);
    CHECK(role_from_string("tool") == Role::tool);
    CHECK_THROWS_AS(role_from_string("robot"), ValidationError);
    CHECK_THROWS_AS(make_message(Role::user, "").validate(), ValidationError);

    CompletionRequest r;
    CHECK_THROWS_AS(r.validate(), ValidationError);
    r.messages.push_back(make_message(Role::user, "x"));
    CHECK_THROWS_AS(r.validate(), ValidationError);  // must start with system
}

TEST_CASE("scripted: match, fallback, determinism") {
    ScriptedProvider p({rule("weather", "sunny")}, "fallback");
    CHECK(p.complete(request_for("what's the WEATHER?")) == "sunny");
    CHECK(p.complete(request_for("what's the weather?")) == "sunny");
    CHECK(p.complete(request_for("hello")) == "fallback");
    ScriptedProvider empty({});
    CHECK(empty.complete(request_for("x")) == std::string(kDefaultFallback));
}

TEST_CASE("scripted: consume once falls through") {
    ScriptedProvider p({rule("x", "first", true), rule("x", "second")}, "fb");
    CHECK(p.complete(request_for("x")) == "first");
    CHECK(p.consumed_count() == 1);
    CHECK(p.complete(request_for("x")) == "second");
}

TEST_CASE("scripted: rule order decides overlapping matches") {
    ScriptedProvider a({rule("color", "A"), rule("favorite color", "B")});
    ScriptedProvider b({rule("favorite color", "B"), rule("color", "A")});
    CHECK(a.complete(request_for("my favorite color")) == "A");
    CHECK(b.complete(request_for("my favorite color")) == "B");
}

TEST_CASE("scripted: conditions and placeholders") {
    ScriptedRule pat;
    pat.pattern = "^(hello|hi)\\b";
    pat.response = "greeting";
    ScriptedRule obs;
    obs.observation = true;
    obs.response = "saw {{observation}} for {{user}}";
    ScriptedRule ctx;
    ctx.purpose = "contextualize";
    ctx.response = "ctx";
    ScriptedRule pc;
    pc.prompt_contains = "SECRET";
    pc.response = "found";
    ScriptedProvider p({pat, obs, ctx, pc}, "fb");

    CHECK(p.complete(request_for("Hi there")) == "greeting");
    CHECK(p.complete(request_for("this is high")) == "fb");
    CHECK(p.complete(request_for("anything", "contextualize")) == "ctx");

    auto r = request_for("rain?");
    r.messages.push_back(make_message(Role::assistant, "Action: weather_search"));
    r.messages.push_back(make_message(Role::tool, "Observation: 18C"));
    CHECK(p.complete(r) == "saw 18C for rain?");

    auto s = request_for("x");
    s.messages[0].content = "the secret word";
    CHECK(p.complete(s) == "found");
}

TEST_CASE("parse_script") {
    auto p = parse_script(R"({"fallback": "fb", "rules": [{"match": "a", "response": "A"}]})");
    CHECK(p->rules().size() == 1);
    CHECK(p->fallback() == "fb");
    CHECK(parse_script("[]")->rules().empty());

    // syntax error carries the line number
    try {
        parse_script("[\n{\"match\": \"a\",\n \"response\": }\n]");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // unreachable rule: shadowed by an identical permanent condition
    try {
        parse_script("[\n{\"match\": \"a\", \"response\": \"1\"},\n{\"match\": \"a\", \"response\": \"2\"}\n]");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("unreachable") != std::string::npos);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // shadowed by an unconditional rule
    CHECK_THROWS_AS(parse_script(R"([{"response": "x"}, {"match": "b", "response": "y"}])"), ConfigError);
    // a consume-once rule does not shadow
    CHECK_NOTHROW(parse_script(R"([{"match": "a", "response": "1", "consume_once": true}, {"match": "a", "response": "2"}])"));
    CHECK_THROWS_AS(parse_script(R"([{"pattern": "(", "response": "x"}])"), ConfigError);
    CHECK_THROWS_AS(parse_script(R"([{"match": "a"}])"), ConfigError);
    CHECK_THROWS_AS(parse_script("42"), ConfigError);
}

TEST_CASE("fixture script loads") {
    auto p = load_script(testing::fixture_dir() / "scripts" / "scenarios.json");
    CHECK(p->rules().size() > 5);
    CHECK_THROWS_AS(load_script("/nonexistent/rules.json"), ConfigError);
}

TEST_CASE("wire format round trip") {
    CompletionRequest r = request_for("hi");
    r.messages.push_back(make_message(Role::assistant, "Action: wikipedia"));
    auto obs = make_message(Role::tool, "Observation: text");
    obs.name = "wikipedia";
    r.messages.push_back(obs);
    r.stop_markers = {"Observation:"};
    r.temperature = 0.7;
    const json body = serialize_request(r, "m1");
    CHECK(body["model"] == "m1");
    CHECK(body["max_tokens"] == 1024);
    CHECK(body["messages"][3]["role"] == "user");
    CHECK(body["messages"][3]["name"] == "tool-wikipedia");
    CHECK(body["stop"] == json::array({"Observation:"}));
    const auto back = parse_request(body);
    REQUIRE(back.messages.size() == 4);
    CHECK(back.messages[3].role == Role::tool);
    CHECK(back.messages[3].name == std::optional<std::string>("wikipedia"));
    CHECK(back.temperature == 0.7);

    CHECK(parse_completion(json::parse(R"({"choices":[{"message":{"content":"ok"}}]})")) == "ok");
    CHECK_THROWS_AS(parse_completion(json::parse(R"({"choices":[]})")), ProtocolError);
    CHECK_THROWS_AS(parse_completion(json::parse(R"({"choices":[{"message":{"content":3}}]})")), ProtocolError);
}

TEST_CASE("http provider: retries transient failures") {
    testing::StubHttp stub;
    std::atomic<int> calls{0};
    std::string auth;
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        if (calls++ == 0) {
            res.status = 503;
            return;
        }
        const auto body = json::parse(req.body);
        res.set_content(json{{"choices", {{{"message", {{"content", "echo " + body["model"].get<std::string>()}}}}}}}.dump(),
                        "application/json");
    });
    stub.start();
    HttpProviderConfig cfg;
    cfg.endpoint = stub.url("/v1/chat/completions");
    cfg.model = "tiny";
    cfg.api_key = "k";
    cfg.backoff_ms = 1;
    HttpProvider p(cfg);
    CHECK(p.complete(request_for("hi")) == "echo tiny");
    CHECK(calls == 2);
    CHECK(auth == "Bearer k");
}

TEST_CASE("http provider: permanent errors and unreachable hosts") {
    testing::StubHttp stub;
    std::atomic<int> calls{0};
    stub.server().Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
    });
    stub.server().Post("/garbage", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json", "text/plain");
    });
    stub.start();
    HttpProviderConfig cfg;
    cfg.backoff_ms = 1;
    cfg.endpoint = stub.url("/bad");
    CHECK_THROWS_AS(HttpProvider(cfg).complete(request_for("hi")), ProviderUnavailable);
    CHECK(calls == 1);

    cfg.endpoint = stub.url("/garbage");
    CHECK_THROWS_AS(HttpProvider(cfg).complete(request_for("hi")), ProtocolError);

    cfg.endpoint = "http://127.0.0.1:1/v1";
    cfg.timeout_s = 2;
    CHECK_THROWS_AS(HttpProvider(cfg).complete(request_for("hi")), ProviderUnavailable);

    cfg.endpoint = "";
    CHECK_THROWS_AS(HttpProvider{cfg}, ConfigError);
}

}
