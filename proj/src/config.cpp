#include "social/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

extern char** environ;

namespace social {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base / path : path;
}

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j[key].is_null()) out = j[key].get<T>();
}

}  // namespace

Config Config::from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    Config c;
    c.base_dir = base_dir;
    try {
        if (j.contains("data_dir")) c.data_dir = resolve(base_dir, j["data_dir"].get<std::string>());
        if (j.contains("server")) {
            const auto& s = j["server"];
            take(s, "host", c.server.host);
            take(s, "port", c.server.port);
            take(s, "sse_buffer", c.server.sse_buffer);
        }
        if (j.contains("llm")) {
            const auto& l = j["llm"];
            take(l, "provider", c.llm.provider);
            if (l.contains("script")) c.llm.script = resolve(base_dir, l["script"].get<std::string>());
            take(l, "endpoint", c.llm.http.endpoint);
            take(l, "api_key", c.llm.http.api_key);
            take(l, "model", c.llm.http.model);
            take(l, "timeout_s", c.llm.http.timeout_s);
            take(l, "max_attempts", c.llm.http.max_attempts);
            take(l, "backoff_ms", c.llm.http.backoff_ms);
        }
        if (j.contains("embedding")) {
            const auto& e = j["embedding"];
            take(e, "provider", c.embedding.provider);
            take(e, "dimension", c.embedding.dimension);
            take(e, "endpoint", c.embedding.http.endpoint);
            take(e, "api_key", c.embedding.http.api_key);
            take(e, "model", c.embedding.http.model);
            take(e, "timeout_s", c.embedding.http.timeout_s);
        }
        if (j.contains("memory")) {
            const auto& m = j["memory"];
            take(m, "chunk_size", c.memory.chunk_size);
            take(m, "chunk_overlap", c.memory.chunk_overlap);
            if (m.contains("top_k")) c.memory.knowledge_top_k = c.memory.memory_top_k = m["top_k"].get<std::size_t>();
            take(m, "knowledge_top_k", c.memory.knowledge_top_k);
            take(m, "memory_top_k", c.memory.memory_top_k);
            take(m, "segment_window", c.memory.segment_window);
            take(m, "segment_overlap", c.memory.segment_overlap);
            take(m, "journal_compaction_threshold", c.journal_compaction_threshold);
        }
        if (j.contains("affect")) {
            c.affect = affect::affect_config_from_json(j["affect"]);
            if (j["affect"].contains("personality")) c.personality = affect::personality_from_json(j["affect"]["personality"]);
            if (j["affect"].contains("enabled")) c.agent.affect_enabled = j["affect"]["enabled"].get<bool>();
        }
        if (j.contains("agent")) {
            const bool affect_enabled = c.agent.affect_enabled;
            c.agent = dialogue::agent_config_from_json(j["agent"]);
            if (!j["agent"].contains("affect_enabled")) c.agent.affect_enabled = affect_enabled;
        }
        if (j.contains("persona")) {
            const auto& p = j["persona"];
            take(p, "name", c.persona.name);
            take(p, "role", c.persona.role);
            take(p, "history_window", c.persona.history_window);
            if (p.contains("system_template_file"))
                c.persona.system_template = read_text_file(resolve(base_dir, p["system_template_file"].get<std::string>()));
            if (p.contains("instructions_template_file"))
                c.persona.instructions_template =
                    read_text_file(resolve(base_dir, p["instructions_template_file"].get<std::string>()));
            if (p.contains("format_rules_file"))
                c.persona.format_rules = read_text_file(resolve(base_dir, p["format_rules_file"].get<std::string>()));
        }
        c.memory.persona_name = c.persona.name;
        c.tools = tools::tools_config_from_json(j.value("tools", json()), base_dir);
        if (j.contains("gestures")) c.gestures = behavior::GestureMap::from_json(j["gestures"]);
        if (j.contains("perception")) take(j["perception"], "staleness_s", c.percept_staleness_s);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    if (c.llm.provider != "scripted" && c.llm.provider != "http")
        throw ConfigError("llm.provider must be \"scripted\" or \"http\"");
    if (c.embedding.provider != "hashing" && c.embedding.provider != "http")
        throw ConfigError("embedding.provider must be \"hashing\" or \"http\"");
    if (c.embedding.dimension == 0) throw ConfigError("embedding.dimension must be positive");
    if (c.server.port < 0 || c.server.port > 65535) throw ConfigError("server.port out of range");
    if (c.server.sse_buffer == 0) throw ConfigError("server.sse_buffer must be positive");
    if (c.percept_staleness_s <= 0) throw ConfigError("perception.staleness_s must be positive");
    if (c.persona.history_window == 0) throw ConfigError("persona.history_window must be positive");
    c.memory.validate();
    c.agent.validate();
    return c;
}

Config Config::load(const std::filesystem::path& file) {
    const std::string text = read_text_file(file);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
    auto base = file.parent_path();
    if (base.empty()) base = ".";
    return from_json(j, base);
}

void Config::apply_env(const std::map<std::string, std::string>& env) {
    auto get = [&](const char* name) -> const std::string* {
        auto it = env.find(name);
        return it == env.end() ? nullptr : &it->second;
    };
    if (auto v = get("SOCIAL_AGENT_DATA_DIR")) data_dir = *v;
    if (auto v = get("SOCIAL_AGENT_HOST")) server.host = *v;
    if (auto v = get("SOCIAL_AGENT_PORT")) {
        try {
            server.port = std::stoi(*v);
        } catch (const std::exception&) {
            throw ConfigError("SOCIAL_AGENT_PORT is not a number");
        }
    }
    if (auto v = get("SOCIAL_AGENT_LLM_PROVIDER")) llm.provider = *v;
    if (auto v = get("SOCIAL_AGENT_LLM_SCRIPT")) llm.script = *v;
    if (auto v = get("SOCIAL_AGENT_LLM_ENDPOINT")) llm.http.endpoint = *v;
    if (auto v = get("SOCIAL_AGENT_LLM_API_KEY")) llm.http.api_key = *v;
    if (auto v = get("SOCIAL_AGENT_LLM_MODEL")) llm.http.model = *v;
    if (auto v = get("SOCIAL_AGENT_EMBEDDING_ENDPOINT")) embedding.http.endpoint = *v;
    if (auto v = get("SOCIAL_AGENT_EMBEDDING_API_KEY")) embedding.http.api_key = *v;
    if (auto v = get("SOCIAL_AGENT_EMBEDDING_MODEL")) embedding.http.model = *v;
    if (llm.provider != "scripted" && llm.provider != "http")
        throw ConfigError("llm.provider must be \"scripted\" or \"http\"");
    if (server.port < 0 || server.port > 65535) throw ConfigError("server.port out of range");
}

void Config::apply_process_env() {
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e) {
        std::string_view kv(*e);
        if (kv.rfind("SOCIAL_AGENT_", 0) != 0) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) continue;
        env.emplace(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
    }
    apply_env(env);
}

Runtime build_runtime(Config config, std::shared_ptr<const Clock> clock, std::shared_ptr<llm::LlmProvider> llm_override,
                      std::shared_ptr<const tools::ToolRegistry> tools_override) {
    Runtime rt;
    rt.clock = clock ? std::move(clock) : std::make_shared<SystemClock>();

    if (llm_override) {
        rt.llm = std::move(llm_override);
    } else if (config.llm.provider == "http") {
        if (config.llm.http.endpoint.empty()) throw ConfigError("llm.endpoint is required for the http provider");
        rt.llm = std::make_shared<llm::HttpProvider>(config.llm.http);
    } else if (!config.llm.script.empty()) {
        rt.llm = llm::load_script(config.llm.script);
    } else {
        rt.llm = std::make_shared<llm::ScriptedProvider>(std::vector<llm::ScriptedRule>{});
    }

    if (config.embedding.provider == "http") {
        if (config.embedding.http.endpoint.empty()) throw ConfigError("embedding.endpoint is required for http");
        auto http = config.embedding.http;
        http.dimension = config.embedding.dimension;
        rt.embedder = std::make_shared<memory::HttpEmbedder>(http);
    } else {
        rt.embedder = std::make_shared<memory::HashingEmbedder>(config.embedding.dimension);
    }

    if (!config.data_dir.empty()) std::filesystem::create_directories(config.data_dir);
    rt.store = std::make_shared<memory::VectorStore>(config.embedding.dimension, config.data_dir,
                                                     config.journal_compaction_threshold);
    rt.memory = std::make_shared<memory::MemorySystem>(config.memory, rt.embedder, rt.store, rt.llm);
    rt.tools = tools_override ? std::move(tools_override)
                              : std::make_shared<const tools::ToolRegistry>(tools::build_registry(config.tools, rt.llm));
    rt.orchestrator = std::make_shared<dialogue::Orchestrator>(config.agent, config.persona, rt.memory, rt.llm, rt.tools,
                                                               config.affect, config.personality, config.gestures,
                                                               rt.clock);
    rt.config = std::move(config);
    return rt;
}

}  // namespace social
