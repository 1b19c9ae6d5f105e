#include "social/llm.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "social/http_client.hpp"

namespace social::llm {

using nlohmann::json;

std::string_view to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
        case Role::tool: return "tool";
    }
    return "user";
}

Role role_from_string(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    if (s == "tool") return Role::tool;
    throw ValidationError("unknown message role '" + std::string(s) + "'");
}

void ChatMessage::validate() const {
    if ((role == Role::user || role == Role::assistant) && content.empty())
        throw ValidationError(std::string(to_string(role)) + " message content must be non-empty");
}

ChatMessage make_message(Role role, std::string content, Timestamp at) {
    ChatMessage m{role, std::move(content), std::nullopt, at};
    m.validate();
    return m;
}

json to_json(const ChatMessage& m) {
    json j{{"role", to_string(m.role)}, {"content", m.content}, {"timestamp", to_epoch_seconds(m.timestamp)}};
    if (m.name) j["name"] = *m.name;
    return j;
}

ChatMessage message_from_json(const json& j) {
    ChatMessage m;
    m.role = role_from_string(j.at("role").get<std::string>());
    m.content = j.at("content").get<std::string>();
    if (j.contains("name") && !j["name"].is_null()) m.name = j["name"].get<std::string>();
    m.timestamp = from_epoch_seconds(j.value("timestamp", 0.0));
    m.validate();
    return m;
}

void CompletionRequest::validate() const {
    if (messages.empty()) throw ValidationError("completion request has no messages");
    if (messages.front().role != Role::system)
        throw ValidationError("first message of a completion request must be a system message");
    if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
    for (const auto& m : messages) m.validate();
}

// ---------------------------------------------------------------------------
// Scripted provider
// ---------------------------------------------------------------------------

namespace {

const ChatMessage* last_with_role(const CompletionRequest& r, Role role) {
    for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it) {
        if (it->role == role) return &*it;
    }
    return nullptr;
}

std::string observation_text(const ChatMessage& m) {
    constexpr std::string_view kPrefix = "Observation:";
    std::string_view c = m.content;
    if (starts_with_icase(c, kPrefix)) c.remove_prefix(kPrefix.size());
    return trim(c);
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace

ScriptedProvider::ScriptedProvider(std::vector<ScriptedRule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)), consumed_(rules_.size(), false) {}

std::size_t ScriptedProvider::consumed_count() const {
    std::lock_guard lock(mu_);
    return static_cast<std::size_t>(std::count(consumed_.begin(), consumed_.end(), true));
}

bool ScriptedProvider::matches(const ScriptedRule& rule, const CompletionRequest& request) const {
    if (rule.purpose && *rule.purpose != request.purpose) return false;
    const ChatMessage* last_user = last_with_role(request, Role::user);
    const std::string user_text = last_user ? last_user->content : std::string();
    if (rule.match && !contains_icase(user_text, *rule.match)) return false;
    if (rule.pattern) {
        const std::regex re(*rule.pattern, std::regex::ECMAScript | std::regex::icase);
        if (!std::regex_search(user_text, re)) return false;
    }
    if (rule.observation) {
        const bool has_obs = !request.messages.empty() && request.messages.back().role == Role::tool;
        if (has_obs != *rule.observation) return false;
    }
    if (rule.prompt_contains) {
        const bool found = std::any_of(request.messages.begin(), request.messages.end(),
                                       [&](const ChatMessage& m) {
                                           return contains_icase(m.content, *rule.prompt_contains);
                                       });
        if (!found) return false;
    }
    return true;
}

std::string ScriptedProvider::complete(const CompletionRequest& request) {
    request.validate();
    std::string response = fallback_;
    int delay_ms = 0;
    {
        std::lock_guard lock(mu_);
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            if (consumed_[i] || !matches(rules_[i], request)) continue;
            if (rules_[i].consume_once) consumed_[i] = true;
            response = rules_[i].response;
            delay_ms = rules_[i].delay_ms;
            break;
        }
    }
    if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));

    if (response.find("{{") != std::string::npos) {
        const ChatMessage* obs = last_with_role(request, Role::tool);
        const ChatMessage* user = last_with_role(request, Role::user);
        replace_all(response, "{{observation}}", obs ? observation_text(*obs) : std::string());
        replace_all(response, "{{user}}", user ? user->content : std::string());
    }
    return response;
}

json to_json(const ScriptedRule& r) {
    json j{{"response", r.response}};
    if (r.match) j["match"] = *r.match;
    if (r.pattern) j["pattern"] = *r.pattern;
    if (r.observation) j["observation"] = *r.observation;
    if (r.prompt_contains) j["prompt_contains"] = *r.prompt_contains;
    if (r.purpose) j["purpose"] = *r.purpose;
    if (r.consume_once) j["consume_once"] = true;
    if (r.delay_ms > 0) j["delay_ms"] = r.delay_ms;
    return j;
}

namespace {

std::size_t line_of(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Byte offsets of the elements of the rule array: either the top-level array
// or the array under the top-level "rules" key.
std::vector<std::size_t> rule_offsets(std::string_view text) {
    std::vector<std::size_t> out;
    int depth = 0;
    int rules_depth = -1;  // depth of the array whose elements we record
    bool in_string = false;
    bool escape = false;
    bool top_is_array = false;
    bool expect_element = false;
    std::string current_string;
    std::string last_key;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escape) {
                escape = false;
            } else if (c == '\\') {
                escape = true;
            } else if (c == '"') {
                in_string = false;
                if (depth == 1 && !top_is_array) last_key = current_string;
            } else {
                current_string.push_back(c);
            }
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (expect_element && c != ']') {
            out.push_back(i);
            expect_element = false;
        }
        switch (c) {
            case '"':
                in_string = true;
                current_string.clear();
                break;
            case '[':
                ++depth;
                if (depth == 1) top_is_array = true;
                if ((depth == 1 && top_is_array) || (depth == 2 && !top_is_array && last_key == "rules")) {
                    rules_depth = depth;
                    expect_element = true;
                }
                break;
            case '{':
                ++depth;
                break;
            case ']':
            case '}':
                if (depth == rules_depth) rules_depth = -1;
                --depth;
                break;
            case ',':
                if (depth == rules_depth) expect_element = true;
                break;
            default:
                break;
        }
    }
    return out;
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

}  // namespace

std::unique_ptr<ScriptedProvider> parse_script(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("script parse error at line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                          ": " + e.what());
    }
    const json* rules_json = nullptr;
    std::string fallback(kDefaultFallback);
    if (doc.is_array()) {
        rules_json = &doc;
    } else if (doc.is_object()) {
        if (doc.contains("fallback")) fallback = doc["fallback"].get<std::string>();
        if (doc.contains("rules")) rules_json = &doc["rules"];
    } else {
        throw ConfigError("script parse error at line 1: expected an array or object");
    }

    const auto offsets = rule_offsets(text);
    auto rule_line = [&](std::size_t idx) {
        return idx < offsets.size() ? line_of(text, offsets[idx]) : std::size_t{1};
    };

    std::vector<ScriptedRule> rules;
    if (rules_json) {
        if (!rules_json->is_array()) throw ConfigError("script: \"rules\" must be an array");
        for (std::size_t i = 0; i < rules_json->size(); ++i) {
            const json& r = (*rules_json)[i];
            try {
                ScriptedRule rule;
                rule.match = opt_string(r, "match");
                rule.pattern = opt_string(r, "pattern");
                if (r.contains("observation") && !r["observation"].is_null())
                    rule.observation = r["observation"].get<bool>();
                rule.prompt_contains = opt_string(r, "prompt_contains");
                rule.purpose = opt_string(r, "purpose");
                rule.response = r.at("response").get<std::string>();
                rule.consume_once = r.value("consume_once", false);
                rule.delay_ms = r.value("delay_ms", 0);
                if (rule.pattern) std::regex(*rule.pattern, std::regex::ECMAScript | std::regex::icase);
                rules.push_back(std::move(rule));
            } catch (const json::exception& e) {
                throw ConfigError("script rule " + std::to_string(i) + " at line " +
                                  std::to_string(rule_line(i)) + ": " + e.what());
            } catch (const std::regex_error& e) {
                throw ConfigError("script rule " + std::to_string(i) + " at line " +
                                  std::to_string(rule_line(i)) + ": bad pattern: " + e.what());
            }
        }
    }

    // A rule can never fire if an earlier permanent rule has no conditions,
    // or an earlier permanent rule has exactly the same conditions.
    for (std::size_t i = 0; i < rules.size(); ++i) {
        for (std::size_t p = 0; p < i; ++p) {
            if (rules[p].consume_once) continue;
            if (rules[p].unconditional() || rules[p].same_condition(rules[i])) {
                throw ConfigError("script rule " + std::to_string(i) + " at line " +
                                  std::to_string(rule_line(i)) + " is unreachable (shadowed by rule " +
                                  std::to_string(p) + " at line " + std::to_string(rule_line(p)) + ")");
            }
        }
    }
    return std::make_unique<ScriptedProvider>(std::move(rules), std::move(fallback));
}

std::unique_ptr<ScriptedProvider> load_script(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open script file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_script(ss.str());
}

// ---------------------------------------------------------------------------
// Live provider
// ---------------------------------------------------------------------------

namespace {
constexpr std::string_view kToolNamePrefix = "tool-";
}

json serialize_request(const CompletionRequest& request, const std::string& model) {
    json messages = json::array();
    for (const auto& m : request.messages) {
        json wire;
        if (m.role == Role::tool) {
            wire["role"] = "user";
            wire["name"] = std::string(kToolNamePrefix) + m.name.value_or("");
        } else {
            wire["role"] = to_string(m.role);
            if (m.name) wire["name"] = *m.name;
        }
        wire["content"] = m.content;
        messages.push_back(std::move(wire));
    }
    json body{{"model", model},
              {"messages", std::move(messages)},
              {"temperature", request.temperature},
              {"max_tokens", request.max_output}};
    if (!request.stop_markers.empty()) body["stop"] = request.stop_markers;
    return body;
}

CompletionRequest parse_request(const json& body) {
    CompletionRequest r;
    try {
        for (const auto& wire : body.at("messages")) {
            ChatMessage m;
            m.role = role_from_string(wire.at("role").get<std::string>());
            m.content = wire.at("content").get<std::string>();
            if (wire.contains("name")) {
                std::string name = wire["name"].get<std::string>();
                if (m.role == Role::user && name.rfind(kToolNamePrefix, 0) == 0) {
                    m.role = Role::tool;
                    name.erase(0, kToolNamePrefix.size());
                    if (!name.empty()) m.name = name;
                } else {
                    m.name = name;
                }
            }
            r.messages.push_back(std::move(m));
        }
        r.temperature = body.value("temperature", r.temperature);
        r.max_output = body.value("max_tokens", r.max_output);
        if (body.contains("stop")) r.stop_markers = body["stop"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed completion request: ") + e.what());
    }
    return r;
}

std::string parse_completion(const json& body) {
    try {
        const auto& content = body.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw ProtocolError("completion content is not a string");
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed completion payload: ") + e.what());
    }
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ConfigError("LLM endpoint is not configured");
    net::parse_url(config_.endpoint);
    if (config_.max_attempts < 1) config_.max_attempts = 1;
}

std::string HttpProvider::complete(const CompletionRequest& request) {
    request.validate();
    const std::string body = serialize_request(request, config_.model).dump(-1, ' ', false, json::error_handler_t::replace);
    net::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            const int wait = config_.backoff_ms * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(wait));
        }
        try {
            const auto resp = net::http_post_json(config_.endpoint, body, headers, config_.timeout_s);
            if (resp.status >= 200 && resp.status < 300) {
                json parsed;
                try {
                    parsed = json::parse(resp.body);
                } catch (const json::parse_error& e) {
                    throw ProtocolError(std::string("completion body is not JSON: ") + e.what());
                }
                return parse_completion(parsed);
            }
            last_error = "HTTP " + std::to_string(resp.status);
            if (!net::is_transient_status(resp.status)) break;
        } catch (const RetryableError& e) {
            last_error = e.what();
        }
        spdlog::warn("LLM attempt {}/{} failed: {}", attempt + 1, config_.max_attempts, last_error);
    }
    throw ProviderUnavailable("LLM provider unavailable: " + last_error);
}

}  // namespace social::llm
