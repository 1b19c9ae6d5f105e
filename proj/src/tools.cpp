#include "social/tools.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "social/http_client.hpp"

namespace social::tools {

using nlohmann::json;

json to_json(const Observation& o) {
    return {{"text", o.text}, {"sources", o.sources}, {"truncated", o.truncated}};
}

json to_json(const ToolInvocation& t) {
    json j{{"tool", t.tool_name},
           {"input", t.input},
           {"started_at", to_epoch_seconds(t.started_at)},
           {"finished_at", to_epoch_seconds(t.finished_at)},
           {"observation", to_json(t.observation)}};
    j["error"] = t.error ? json(*t.error) : json(nullptr);
    return j;
}

json to_json(const ToolSpec& s) {
    json fields = json::array();
    for (const auto& f : s.input_schema)
        fields.push_back({{"name", f.name}, {"type", f.type}, {"required", f.required}, {"description", f.description}});
    return {{"name", s.name}, {"description", s.description}, {"input_schema", fields}};
}

Observation clip(Observation obs, std::size_t budget) {
    if (obs.text.size() > budget) {
        obs.text = std::string(utf8_prefix(obs.text, budget));
        obs.truncated = true;
    }
    return obs;
}

std::optional<std::string> validate_input(const ToolSpec& spec, const json& input) {
    if (!input.is_object()) return "input must be a JSON object";
    for (const auto& f : spec.input_schema) {
        if (!input.contains(f.name) || input[f.name].is_null()) {
            if (f.required) return "missing required field '" + f.name + "'";
            continue;
        }
        const auto& v = input[f.name];
        bool ok = true;
        if (f.type == "string") ok = v.is_string() && !v.get<std::string>().empty();
        else if (f.type == "number") ok = v.is_number();
        else if (f.type == "integer") ok = v.is_number_integer();
        else if (f.type == "boolean") ok = v.is_boolean();
        if (!ok) return "field '" + f.name + "' must be a non-empty " + f.type;
    }
    return std::nullopt;
}

ToolRegistry::ToolRegistry(std::size_t observation_budget) : budget_(observation_budget) {
    if (budget_ == 0) throw ConfigError("observation budget must be positive");
}

void ToolRegistry::register_tool(ToolSpec spec, Executor executor) {
    if (spec.name.empty()) throw ConfigError("tool name must be non-empty");
    if (spec.description.empty()) throw ConfigError("tool '" + spec.name + "' needs a description");
    if (has(spec.name)) throw ConfigError("duplicate tool name '" + spec.name + "'");
    if (!executor) throw ConfigError("tool '" + spec.name + "' has no executor");
    entries_.push_back({std::move(spec), std::move(executor)});
}

bool ToolRegistry::has(const std::string& name) const {
    for (const auto& e : entries_) {
        if (e.spec.name == name) return true;
    }
    return false;
}

std::vector<ToolSpec> ToolRegistry::specs() const {
    std::vector<ToolSpec> out;
    for (const auto& e : entries_) out.push_back(e.spec);
    return out;
}

std::string ToolRegistry::describe_all() const {
    if (entries_.empty()) return kNoToolsSentinel;
    std::string out;
    for (const auto& e : entries_) {
        if (!out.empty()) out += "\n\n";
        out += "Tool: " + e.spec.name + "\n";
        out += "Description: " + e.spec.description + "\n";
        out += "Input: {";
        bool first = true;
        for (const auto& f : e.spec.input_schema) {
            if (!first) out += ", ";
            first = false;
            out += "\"" + f.name + "\": " + f.type + (f.required ? " (required)" : " (optional)");
            if (!f.description.empty()) out += " - " + f.description;
        }
        out += "}";
    }
    return out;
}

ToolInvocation ToolRegistry::invoke(const std::string& name, const json& input, const Clock& clock) const {
    ToolInvocation inv;
    inv.tool_name = name;
    inv.input = input;
    inv.started_at = clock.now();
    const Entry* entry = nullptr;
    for (const auto& e : entries_) {
        if (e.spec.name == name) entry = &e;
    }
    if (!entry) {
        inv.error = "not_found";
        inv.observation.text = "tool '" + name + "' not available";
    } else if (auto why = validate_input(entry->spec, input)) {
        inv.error = "invalid_input";
        inv.observation.text = "invalid input for tool '" + name + "': " + *why;
    } else {
        try {
            inv.observation = entry->executor(input);
        } catch (const std::exception& e) {
            inv.error = "failed";
            inv.observation = Observation{"tool '" + name + "' failed: " + e.what(), {}, false};
            spdlog::warn("tool {} failed: {}", name, e.what());
        } catch (...) {
            inv.error = "failed";
            inv.observation = Observation{"tool '" + name + "' failed", {}, false};
        }
    }
    inv.observation = clip(std::move(inv.observation), budget_);
    inv.finished_at = clock.now();
    return inv;
}

Observation ToolRegistry::execute(const std::string& name, const json& input) const {
    SystemClock clock;
    return invoke(name, input, clock).observation;
}

ToolSpec internet_search_spec() {
    return {"internet_search",
            "Searches the internet for up-to-date information and returns the top result snippets. "
            "Use it for recent events, trends, or facts you do not know.",
            {{"query", "string", true, "what to search for"}}};
}

ToolSpec news_search_spec() {
    return {"news_search",
            "Finds the latest news articles on a topic and returns a short summary of the headlines.",
            {{"query", "string", true, "news topic"}}};
}

ToolSpec weather_search_spec() {
    return {"weather_search",
            "Looks up current weather conditions and the short-term forecast for a location and "
            "returns a brief summary.",
            {{"location", "string", true, "city or place name"}}};
}

ToolSpec wikipedia_spec() {
    return {"wikipedia",
            "Returns the summary of the Wikipedia page for a topic. Use it for background knowledge "
            "and in-depth explanations.",
            {{"topic", "string", true, "page title or subject"}}};
}

std::vector<ToolSpec> standard_specs() {
    return {internet_search_spec(), news_search_spec(), weather_search_spec(), wikipedia_spec()};
}

std::string canonical_input(const json& input) {
    // nlohmann objects keep keys sorted, so dump() is canonical.
    return input.dump(-1, ' ', false, json::error_handler_t::replace);
}

namespace {

Observation observation_from_fixture(const json& value) {
    Observation obs;
    if (value.is_string()) {
        obs.text = value.get<std::string>();
    } else if (value.is_array()) {
        for (const auto& item : value) {
            if (!obs.text.empty()) obs.text += "\n";
            obs.text += item.is_string() ? item.get<std::string>() : item.dump();
        }
    } else if (value.is_object() && value.contains("text")) {
        obs.text = value["text"].get<std::string>();
        if (value.contains("sources")) obs.sources = value["sources"].get<std::vector<std::string>>();
    } else {
        obs.text = value.dump();
    }
    return obs;
}

}  // namespace

Executor fixture_executor(std::string tool_name, json table) {
    return [tool_name = std::move(tool_name), table = std::move(table)](const json& input) -> Observation {
        const std::string key = canonical_input(input);
        if (table.contains(key)) return observation_from_fixture(table[key]);
        if (input.is_object() && input.size() == 1) {
            const auto& only = input.begin().value();
            if (only.is_string() && table.contains(only.get<std::string>()))
                return observation_from_fixture(table[only.get<std::string>()]);
        }
        if (table.contains("*")) return observation_from_fixture(table["*"]);
        throw std::runtime_error("no fixture result for " + key);
    };
}

namespace {

std::string extract_text(const json& body, const LiveToolConfig& config) {
    auto read_fields = [&](const json& node) {
        std::string out;
        if (config.text_fields.empty()) return node.is_string() ? node.get<std::string>() : node.dump();
        for (const auto& field : config.text_fields) {
            const json::json_pointer ptr(field.empty() || field[0] == '/' ? field : "/" + field);
            if (!node.contains(ptr)) continue;
            const auto& v = node.at(ptr);
            if (!out.empty()) out += " - ";
            out += v.is_string() ? v.get<std::string>() : v.dump();
        }
        return out;
    };
    if (!config.items_pointer.empty()) {
        const json::json_pointer ptr(config.items_pointer);
        if (!body.contains(ptr) || !body.at(ptr).is_array()) throw std::runtime_error("unexpected response shape");
        std::string out;
        std::size_t n = 0;
        for (const auto& item : body.at(ptr)) {
            if (n++ >= config.max_items) break;
            if (!out.empty()) out += "\n";
            out += read_fields(item);
        }
        return out;
    }
    return read_fields(body);
}

}  // namespace

Executor live_executor(const std::string& tool_name, LiveToolConfig config,
                       std::shared_ptr<llm::LlmProvider> summarizer) {
    const bool summarise = tool_name == "news_search" || tool_name == "weather_search";
    const std::string kind = tool_name == "news_search" ? "news" : "weather";
    return [tool_name, config = std::move(config), summarizer, summarise, kind](const json& input) -> Observation {
        std::map<std::string, std::string> values;
        for (const auto& [k, v] : input.items()) values[k] = v.is_string() ? v.get<std::string>() : v.dump();
        values["api_key"] = config.api_key;
        const std::string url = net::expand_template(config.endpoint, values);
        net::Headers headers;
        const auto resp = net::http_get(url, headers, config.timeout_s);
        if (resp.status < 200 || resp.status >= 300)
            throw std::runtime_error("upstream returned HTTP " + std::to_string(resp.status));
        const json body = json::parse(resp.body);
        std::string text = extract_text(body, config);
        Observation obs;
        obs.sources.push_back(net::parse_url(url).host);
        if (summarise && summarizer) {
            llm::CompletionRequest req;
            req.purpose = "summarize";
            req.temperature = 0.0;
            std::string sys = kSummaryTemplate;
            sys.replace(sys.find("{kind}"), 6, kind);
            req.messages = {llm::ChatMessage{llm::Role::system, sys, std::nullopt, {}},
                            llm::ChatMessage{llm::Role::user, text.empty() ? "(no data)" : text, std::nullopt, {}}};
            try {
                obs.text = trim(summarizer->complete(req));
            } catch (const std::exception& e) {
                spdlog::warn("{} summarisation failed ({}); returning raw extract", tool_name, e.what());
                obs.text = text;
            }
        } else {
            obs.text = text;
        }
        return obs;
    };
}

namespace {

json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw ConfigError("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

}  // namespace

ToolsConfig tools_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    ToolsConfig c;
    for (const auto& spec : standard_specs()) c.tools[spec.name] = ToolSettings{};
    if (j.is_null()) return c;
    c.observation_budget = j.value("observation_budget", c.observation_budget);
    if (j.contains("fixture_dir")) {
        std::filesystem::path p = j["fixture_dir"].get<std::string>();
        c.fixture_dir = p.is_relative() ? base_dir / p : p;
    }
    if (j.contains("tools")) {
        for (const auto& [name, t] : j["tools"].items()) {
            ToolSettings s;
            s.enabled = t.value("enabled", true);
            s.mode = t.value("mode", std::string("fixture"));
            if (s.mode != "fixture" && s.mode != "live") throw ConfigError("tool '" + name + "': unknown mode " + s.mode);
            s.live.endpoint = t.value("endpoint", std::string());
            if (t.contains("api_key_env")) {
                if (const char* key = std::getenv(t["api_key_env"].get<std::string>().c_str())) s.live.api_key = key;
            }
            s.live.items_pointer = t.value("items_pointer", std::string());
            if (t.contains("text_fields")) s.live.text_fields = t["text_fields"].get<std::vector<std::string>>();
            s.live.max_items = t.value("max_items", s.live.max_items);
            s.live.timeout_s = t.value("timeout_s", s.live.timeout_s);
            c.tools[name] = s;
        }
    }
    return c;
}

ToolRegistry build_registry(const ToolsConfig& config, std::shared_ptr<llm::LlmProvider> summarizer) {
    ToolRegistry reg(config.observation_budget);
    for (const auto& spec : standard_specs()) {
        auto it = config.tools.find(spec.name);
        const ToolSettings settings = it == config.tools.end() ? ToolSettings{} : it->second;
        if (!settings.enabled) continue;
        if (settings.mode == "live") {
            if (settings.live.endpoint.empty()) throw ConfigError("tool '" + spec.name + "' is live but has no endpoint");
            reg.register_tool(spec, live_executor(spec.name, settings.live, summarizer));
        } else {
            json table = json::object();
            const auto file = config.fixture_dir / (spec.name + ".json");
            if (!config.fixture_dir.empty() && std::filesystem::exists(file)) table = read_json_file(file);
            reg.register_tool(spec, fixture_executor(spec.name, std::move(table)));
        }
    }
    return reg;
}

}  // namespace social::tools
