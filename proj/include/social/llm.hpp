#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "social/common.hpp"

namespace social::llm {

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role r);
// Throws ValidationError for anything but the four roles.
Role role_from_string(std::string_view s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;
    std::optional<std::string> name;
    Timestamp timestamp{};

    // Throws ValidationError when a user/assistant message is empty.
    void validate() const;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

ChatMessage make_message(Role role, std::string content, Timestamp at = {});

nlohmann::json to_json(const ChatMessage& m);
ChatMessage message_from_json(const nlohmann::json& j);

struct CompletionRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.2;
    int max_output = 1024;
    std::vector<std::string> stop_markers;
    // What the call is for: "orchestration", "contextualize", "summarize".
    // Not sent on the wire; scripted rules may key on it.
    std::string purpose = "orchestration";

    void validate() const;
};

class LlmProvider {
public:
    virtual ~LlmProvider() = default;
    // Throws ProviderUnavailable or ProtocolError.
    virtual std::string complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Scripted provider: deterministic rule table for offline runs and tests.
// ---------------------------------------------------------------------------

struct ScriptedRule {
    // Case-insensitive substring over the last user message.
    std::optional<std::string> match;
    // ECMAScript regex (case-insensitive) over the last user message.
    std::optional<std::string> pattern;
    // true: last message must be a tool observation; false: must not be.
    std::optional<bool> observation;
    // Case-insensitive substring that must occur somewhere in the request.
    std::optional<std::string> prompt_contains;
    std::optional<std::string> purpose;
    // May contain {{observation}} and {{user}} placeholders.
    std::string response;
    bool consume_once = false;
    int delay_ms = 0;

    bool unconditional() const {
        return !match && !pattern && !observation && !prompt_contains && !purpose;
    }
    bool same_condition(const ScriptedRule& other) const {
        return match == other.match && pattern == other.pattern &&
               observation == other.observation && prompt_contains == other.prompt_contains &&
               purpose == other.purpose;
    }
};

inline constexpr std::string_view kDefaultFallback =
    "Answer: I'm sorry, I don't have an answer for that right now.\n"
    "Emotion: neutral\nIntensity: 0\nCause: none\nCategory: other";

class ScriptedProvider final : public LlmProvider {
public:
    explicit ScriptedProvider(std::vector<ScriptedRule> rules,
                              std::string fallback = std::string(kDefaultFallback));

    std::string complete(const CompletionRequest& request) override;

    const std::vector<ScriptedRule>& rules() const { return rules_; }
    const std::string& fallback() const { return fallback_; }
    // Number of consume-once rules already used.
    std::size_t consumed_count() const;

private:
    bool matches(const ScriptedRule& rule, const CompletionRequest& request) const;

    std::vector<ScriptedRule> rules_;
    std::string fallback_;
    std::vector<bool> consumed_;
    mutable std::mutex mu_;
};

// Script text is either a JSON array of rules or {"fallback": ..., "rules": [...]}.
// Throws ConfigError (message carries the line number) on syntax errors and
// on rules that can never fire.
std::unique_ptr<ScriptedProvider> parse_script(std::string_view text);
std::unique_ptr<ScriptedProvider> load_script(const std::filesystem::path& path);

nlohmann::json to_json(const ScriptedRule& r);

// ---------------------------------------------------------------------------
// Live provider: chat-completion JSON over HTTP.
// ---------------------------------------------------------------------------

struct HttpProviderConfig {
    std::string endpoint;  // full URL of the chat-completions route
    std::string api_key;
    std::string model;
    double timeout_s = 30.0;
    int max_attempts = 3;
    int backoff_ms = 250;
};

// Wire body: {"model", "messages":[{"role","content"[,"name"]}], "temperature",
// "max_tokens"[, "stop"]}. Tool observations travel as role "user" with a
// name of the form "tool-<tool name>".
nlohmann::json serialize_request(const CompletionRequest& request, const std::string& model);
CompletionRequest parse_request(const nlohmann::json& body);
// Extracts choices[0].message.content; throws ProtocolError otherwise.
std::string parse_completion(const nlohmann::json& body);

class HttpProvider final : public LlmProvider {
public:
    explicit HttpProvider(HttpProviderConfig config);
    std::string complete(const CompletionRequest& request) override;

private:
    HttpProviderConfig config_;
};

}  // namespace social::llm
