#pragma once

// Structured LLM output for one agent step, using a line-tag grammar:
//
//   Thought: <reasoning>
//   Action: <tool name>
//   Action Input: <JSON object>
//
// or
//
//   Thought: <reasoning>            (optional)
//   Answer: <text, may continue on following lines>
//   Emotion: <happiness|sadness|anger|fear|disgust|surprise|neutral>
//   Intensity: <0..1>
//   Cause: <user|self|third-party|none>
//   Category: <greeting|insult|compliment|question|statement|farewell|other>
//
// Keys are case-insensitive, the first occurrence of a key wins and unknown
// lines are ignored.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "social/affect.hpp"
#include "social/memory.hpp"
#include "social/tools.hpp"

namespace social::dialogue {

enum class InteractionCategory { greeting, insult, compliment, question, statement, farewell, other };

inline constexpr std::array<InteractionCategory, 7> kAllCategories = {
    InteractionCategory::greeting, InteractionCategory::insult,    InteractionCategory::compliment,
    InteractionCategory::question, InteractionCategory::statement, InteractionCategory::farewell,
    InteractionCategory::other};

std::string_view to_string(InteractionCategory c);
std::optional<InteractionCategory> parse_category(std::string_view s);

struct ToolRequest {
    std::string thought;
    std::string tool_name;
    nlohmann::json tool_input = nlohmann::json::object();

    friend bool operator==(const ToolRequest&, const ToolRequest&) = default;
};

struct FinalResponse {
    std::optional<std::string> thought;
    std::string answer;
    affect::EmotionCategory emotion = affect::EmotionCategory::neutral;
    double intensity = 0.0;
    affect::Cause cause = affect::Cause::none;
    InteractionCategory category = InteractionCategory::other;

    friend bool operator==(const FinalResponse&, const FinalResponse&) = default;
};

using AgentDirective = std::variant<ToolRequest, FinalResponse>;

// Total: never throws. Text with an Action line is a ToolRequest; anything
// else becomes a FinalResponse, falling back to the raw text with neutral
// emotion, zero intensity, no cause and category "other".
AgentDirective parse_directive(std::string_view raw);

std::string render_directive(const AgentDirective& d);

nlohmann::json to_json(const AgentDirective& d);

struct AgentResponse {
    std::string turn_id;
    std::string answer;
    affect::EmotionCategory emotion = affect::EmotionCategory::neutral;
    double base_intensity = 0.0;
    double intensity = 0.0;  // effective, after mood balancing
    affect::Cause cause = affect::Cause::none;
    InteractionCategory category = InteractionCategory::other;
    std::vector<tools::ToolInvocation> tool_trace;
    std::vector<memory::RetrievedPassage> knowledge;
    std::vector<memory::RetrievedPassage> memories;
    std::size_t completions = 0;
    bool iteration_limit_reached = false;
    double latency_ms = 0.0;
};

nlohmann::json to_json(const AgentResponse& r);

}  // namespace social::dialogue
