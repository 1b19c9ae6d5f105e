#include "doctest.h"
#include "social/config.hpp"
#include "test_support.hpp"

using namespace social;
using nlohmann::json;
using social::testing::config_dir;
using social::testing::TempDir;
using social::testing::write_file;

TEST_SUITE("config") {

TEST_CASE("the example configuration loads") {
    const auto c = Config::load(config_dir() / "example.json");
    CHECK(c.server.host == "127.0.0.1");
    CHECK(c.server.port == 8080);
    CHECK(c.llm.provider == "scripted");
    CHECK(c.llm.script == config_dir() / "scripts" / "demo.json");
    CHECK(c.data_dir == config_dir() / ".." / "data");
    CHECK(c.embedding.dimension == 256);
    CHECK(c.memory.chunk_size == 1000);
    CHECK(c.memory.chunk_overlap == 200);
    CHECK(c.memory.knowledge_top_k == 5);
    CHECK(c.memory.memory_top_k == 5);
    CHECK(c.memory.segment_window == 5);
    CHECK(c.memory.segment_overlap == 1);
    CHECK(c.memory.persona_name == "Nadine");
    CHECK(c.affect.decay_tau == 60.0);
    CHECK(c.personality.extraversion() == 0.6);
    CHECK(c.personality.neuroticism() == -0.2);
    CHECK(c.agent.max_iterations == 5);
    CHECK(c.agent.affect_enabled);
    CHECK(c.persona.history_window == 20);
    CHECK(c.percept_staleness_s == 30.0);
    CHECK(c.tools.observation_budget == 1500);
    CHECK(c.persona.system_template.find("{{name}}") != std::string::npos);
}

TEST_CASE("the live example configuration parses") {
    const auto c = Config::load(config_dir() / "live.example.json");
    CHECK(c.llm.provider == "http");
}

TEST_CASE("the example builds a runtime with four tools") {
    auto c = social::testing::scripted_config();
    const auto rt = build_runtime(c, std::make_shared<ManualClock>());
    CHECK(rt.tools->size() == 4);
    CHECK(rt.store->dimension() == 256);
}

TEST_CASE("relative paths resolve against the config file") {
    TempDir dir;
    write_file(dir / "sub/persona.txt", "I am {{name}}.");
    write_file(dir / "sub/cfg.json", R"({"data_dir": "state", "persona": {"name": "Ada", "system_template_file": "persona.txt"}})");
    const auto c = Config::load(dir / "sub/cfg.json");
    CHECK(c.data_dir == dir / "sub" / "state");
    CHECK(c.persona.system_template == "I am {{name}}.");
    CHECK(c.persona.name == "Ada");
    CHECK(c.memory.persona_name == "Ada");
}

TEST_CASE("defaults apply when sections are missing") {
    const auto c = Config::from_json(json::object(), ".");
    CHECK(c.data_dir.empty());
    CHECK(c.llm.provider == "scripted");
    CHECK(c.embedding.provider == "hashing");
    CHECK(c.agent.max_iterations == 5);
    CHECK(c.persona.system_template == dialogue::PersonaConfig::defaults().system_template);
}

TEST_CASE("affect.enabled toggles the agent") {
    const auto c = Config::from_json({{"affect", {{"enabled", false}}}}, ".");
    CHECK_FALSE(c.agent.affect_enabled);
    const auto d = Config::from_json({{"affect", {{"enabled", false}}}, {"agent", {{"max_iterations", 2}}}}, ".");
    CHECK_FALSE(d.agent.affect_enabled);
    CHECK(d.agent.max_iterations == 2);
}

TEST_CASE("invalid configurations are rejected") {
    const json bad[] = {
        json::array(),
        {{"llm", {{"provider", "magic"}}}},
        {{"embedding", {{"provider", "magic"}}}},
        {{"embedding", {{"dimension", 0}}}},
        {{"server", {{"port", 70000}}}},
        {{"server", {{"port", "eighty"}}}},
        {{"server", {{"sse_buffer", 0}}}},
        {{"memory", {{"chunk_size", 100}, {"chunk_overlap", 100}}}},
        {{"memory", {{"segment_window", 2}, {"segment_overlap", 2}}}},
        {{"memory", {{"top_k", 0}}}},
        {{"agent", {{"max_iterations", 0}}}},
        {{"affect", {{"decay_tau", -1}}}},
        {{"persona", {{"history_window", 0}}}},
        {{"persona", {{"system_template_file", "/nonexistent/persona.txt"}}}},
        {{"perception", {{"staleness_s", 0}}}},
        {{"tools", {{"tools", {{"weather_search", {{"mode", "psychic"}}}}}}}},
        {{"gestures", {{"greeting", "moonwalk"}}}},
    };
    for (const auto& j : bad) {
        CAPTURE(j.dump());
        CHECK_THROWS_AS(Config::from_json(j, "."), ConfigError);
    }
}

TEST_CASE("unreadable or malformed files raise ConfigError") {
    TempDir dir;
    CHECK_THROWS_AS(Config::load(dir / "missing.json"), ConfigError);
    write_file(dir / "broken.json", "{\"server\": ");
    CHECK_THROWS_AS(Config::load(dir / "broken.json"), ConfigError);
}

TEST_CASE("environment overrides") {
    auto c = Config::from_json(json::object(), ".");
    c.apply_env({{"SOCIAL_AGENT_PORT", "9090"},
                 {"SOCIAL_AGENT_HOST", "0.0.0.0"},
                 {"SOCIAL_AGENT_DATA_DIR", "/tmp/agent-data"},
                 {"SOCIAL_AGENT_LLM_PROVIDER", "http"},
                 {"SOCIAL_AGENT_LLM_ENDPOINT", "http://127.0.0.1:1/v1/chat/completions"},
                 {"SOCIAL_AGENT_LLM_API_KEY", "secret"},
                 {"SOCIAL_AGENT_LLM_MODEL", "m"},
                 {"UNRELATED", "x"}});
    CHECK(c.server.port == 9090);
    CHECK(c.server.host == "0.0.0.0");
    CHECK(c.data_dir == "/tmp/agent-data");
    CHECK(c.llm.provider == "http");
    CHECK(c.llm.http.endpoint == "http://127.0.0.1:1/v1/chat/completions");
    CHECK(c.llm.http.api_key == "secret");
    CHECK(c.llm.http.model == "m");

    CHECK_THROWS_AS(c.apply_env({{"SOCIAL_AGENT_PORT", "abc"}}), ConfigError);
    CHECK_THROWS_AS(c.apply_env({{"SOCIAL_AGENT_PORT", "99999"}}), ConfigError);
    CHECK_THROWS_AS(c.apply_env({{"SOCIAL_AGENT_LLM_PROVIDER", "magic"}}), ConfigError);
}

TEST_CASE("http providers need endpoints") {
    auto c = Config::from_json({{"llm", {{"provider", "http"}}}}, ".");
    CHECK_THROWS_AS(build_runtime(c), ConfigError);
    auto d = Config::from_json({{"embedding", {{"provider", "http"}}}}, ".");
    CHECK_THROWS_AS(build_runtime(d), ConfigError);
}

}  // TEST_SUITE
