#pragma once

// Service configuration: one JSON file plus SOCIAL_AGENT_* environment
// overrides. Relative paths resolve against the config file's directory.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "social/affect.hpp"
#include "social/behavior.hpp"
#include "social/embedding.hpp"
#include "social/llm.hpp"
#include "social/memory_system.hpp"
#include "social/orchestrator.hpp"
#include "social/prompt.hpp"
#include "social/tools.hpp"

namespace social {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t sse_buffer = 256;  // frames per subscriber before it is dropped
};

struct LlmConfig {
    std::string provider = "scripted";  // "scripted" | "http"
    std::filesystem::path script;       // scripted rules; empty = fallback only
    llm::HttpProviderConfig http;
};

struct EmbeddingConfig {
    std::string provider = "hashing";  // "hashing" | "http"
    std::size_t dimension = 256;
    memory::HttpEmbedderConfig http;
};

struct Config {
    std::filesystem::path base_dir;
    std::filesystem::path data_dir;  // empty = in-memory only
    ServerConfig server;
    LlmConfig llm;
    EmbeddingConfig embedding;
    memory::MemoryConfig memory;
    affect::AffectConfig affect = affect::AffectConfig::defaults();
    affect::PersonalityProfile personality;
    dialogue::AgentConfig agent;
    dialogue::PersonaConfig persona = dialogue::PersonaConfig::defaults();
    tools::ToolsConfig tools;
    behavior::GestureMap gestures;
    double percept_staleness_s = 30.0;
    std::size_t journal_compaction_threshold = 1000;

    // Throws ConfigError.
    static Config from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static Config load(const std::filesystem::path& file);
    // Applies SOCIAL_AGENT_* variables from `env` (name -> value).
    void apply_env(const std::map<std::string, std::string>& env);
    void apply_process_env();
};

std::string read_text_file(const std::filesystem::path& p);

// Runtime components built from a Config.
struct Runtime {
    Config config;
    std::shared_ptr<const Clock> clock;
    std::shared_ptr<llm::LlmProvider> llm;
    std::shared_ptr<memory::EmbeddingProvider> embedder;
    std::shared_ptr<memory::VectorStore> store;
    std::shared_ptr<memory::MemorySystem> memory;
    std::shared_ptr<const tools::ToolRegistry> tools;
    std::shared_ptr<dialogue::Orchestrator> orchestrator;
};

// `llm_override` replaces the configured provider (tests, replay).
Runtime build_runtime(Config config, std::shared_ptr<const Clock> clock = nullptr,
                      std::shared_ptr<llm::LlmProvider> llm_override = nullptr,
                      std::shared_ptr<const tools::ToolRegistry> tools_override = nullptr);

}  // namespace social
