#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "social/common.hpp"
#include "social/llm.hpp"

namespace social::tools {

struct FieldSpec {
    std::string name;
    std::string type;  // "string" | "number" | "integer" | "boolean"
    bool required = true;
    std::string description;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<FieldSpec> input_schema;
};

struct Observation {
    std::string text;
    std::vector<std::string> sources;
    bool truncated = false;
};

struct ToolInvocation {
    std::string tool_name;
    nlohmann::json input = nlohmann::json::object();
    Timestamp started_at{};
    Timestamp finished_at{};
    Observation observation;
    std::optional<std::string> error;  // set when the observation is degraded
};

nlohmann::json to_json(const Observation& o);
nlohmann::json to_json(const ToolInvocation& t);
nlohmann::json to_json(const ToolSpec& s);

inline constexpr std::size_t kDefaultObservationBudget = 1500;

// Clips text to `budget` bytes on a UTF-8 boundary, setting `truncated`.
Observation clip(Observation obs, std::size_t budget);

// nullopt when `input` satisfies the schema, else a reason.
std::optional<std::string> validate_input(const ToolSpec& spec, const nlohmann::json& input);

// Executors may throw; the registry converts exceptions into degraded
// observations.
using Executor = std::function<Observation(const nlohmann::json& input)>;

class ToolRegistry {
public:
    explicit ToolRegistry(std::size_t observation_budget = kDefaultObservationBudget);

    // Throws ConfigError on a duplicate name or empty description.
    void register_tool(ToolSpec spec, Executor executor);

    bool has(const std::string& name) const;
    std::size_t size() const { return entries_.size(); }
    std::vector<ToolSpec> specs() const;
    std::size_t observation_budget() const { return budget_; }

    // Prompt block describing every tool in registration order.
    std::string describe_all() const;

    // Never throws: unknown tools, schema violations and executor failures
    // come back as degraded observations with `error` set.
    ToolInvocation invoke(const std::string& name, const nlohmann::json& input, const Clock& clock) const;
    Observation execute(const std::string& name, const nlohmann::json& input) const;

private:
    struct Entry {
        ToolSpec spec;
        Executor executor;
    };
    std::vector<Entry> entries_;
    std::size_t budget_;
};

inline constexpr const char* kNoToolsSentinel = "No tools available.";

// The four standard tools.
ToolSpec internet_search_spec();
ToolSpec news_search_spec();
ToolSpec weather_search_spec();
ToolSpec wikipedia_spec();
std::vector<ToolSpec> standard_specs();

// Canonical fixture key for an input: compact JSON with sorted keys.
std::string canonical_input(const nlohmann::json& input);

// Fixture table: {"<canonical input>" | "<sole field value>" | "*": text or [snippets]}.
Executor fixture_executor(std::string tool_name, nlohmann::json table);

struct LiveToolConfig {
    std::string endpoint;  // URL template with {query}/{location}/{topic}/{api_key}
    std::string api_key;
    std::string items_pointer;            // JSON pointer to an array of results
    std::vector<std::string> text_fields; // fields (pointers) read from each item / the body
    std::size_t max_items = 5;
    double timeout_s = 15.0;
};

inline constexpr const char* kSummaryTemplate =
    "Summarise the following {kind} data for a conversational robot in at most five short "
    "sentences. Report the essential facts only; never list raw arrays or numbers per hour.";

// `summarizer` is used by news and weather; it may be null, in which case the
// extracted text is returned directly.
Executor live_executor(const std::string& tool_name, LiveToolConfig config,
                       std::shared_ptr<llm::LlmProvider> summarizer);

struct ToolSettings {
    bool enabled = true;
    std::string mode = "fixture";  // "fixture" | "live"
    LiveToolConfig live;
};

struct ToolsConfig {
    std::size_t observation_budget = kDefaultObservationBudget;
    std::filesystem::path fixture_dir;
    std::map<std::string, ToolSettings> tools;  // by tool name
};

ToolsConfig tools_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Registers the enabled standard tools in the standard order.
ToolRegistry build_registry(const ToolsConfig& config, std::shared_ptr<llm::LlmProvider> summarizer);

}  // namespace social::tools
