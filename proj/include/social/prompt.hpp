#pragma once

#include <optional>
#include <string>
#include <vector>

#include "social/llm.hpp"
#include "social/memory.hpp"
#include "social/perception.hpp"

namespace social::dialogue {

struct UserData {
    std::string user_id;
    std::optional<std::string> display_name;
    std::optional<perception::DetectedEmotion> detected_emotion;
    std::optional<perception::Point3> location;
};

// Everything gathered for one turn before the first completion.
struct TurnContext {
    std::string session_id;
    std::string user_id;
    std::string turn_id;
    std::string user_text;
    std::string contextualized_query;
    std::vector<memory::RetrievedPassage> retrieved_knowledge;
    std::vector<memory::RetrievedPassage> retrieved_memories;
    std::vector<llm::ChatMessage> chat_history;
    UserData user_data;
    std::string tool_block;
};

// Templates use {{name}} placeholders. The system template sees {{name}} and
// {{role}}; the instructions template sees {{knowledge}}, {{memories}},
// {{user_data}}, {{tools}} and {{format_rules}}.
struct PersonaConfig {
    std::string name = "Nadine";
    std::string role = "a social humanoid robot who greets visitors and chats with them";
    std::string system_template;
    std::string instructions_template;
    std::string format_rules;
    std::size_t history_window = 20;

    static PersonaConfig defaults();
};

extern const char* const kDefaultSystemTemplate;
extern const char* const kDefaultInstructionsTemplate;
extern const char* const kDefaultFormatRules;
inline constexpr const char* kEmptySection = "(none)";

// [0] system persona, [1] instructions, [2..] chat history window, [last]
// current user message.
struct PromptBundle {
    std::vector<llm::ChatMessage> messages;

    // Text form used for golden files and traces.
    std::string render() const;
};

std::string render_knowledge(const std::vector<memory::RetrievedPassage>& passages);
std::string render_memories(const std::vector<memory::RetrievedPassage>& passages);
std::string render_user_data(const UserData& data);

// Replaces {{key}} occurrences; unknown placeholders are left as is.
std::string fill_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values);

PromptBundle build_prompt(const TurnContext& ctx, const PersonaConfig& persona);

}  // namespace social::dialogue
