#include "social/prompt.hpp"

namespace social::dialogue {

const char* const kDefaultSystemTemplate =
    "You are {{name}}, {{role}}. You have your own personality and emotions, you remember the "
    "people you talk to, and you speak naturally and briefly, as in a face-to-face conversation.";

const char* const kDefaultInstructionsTemplate =
    "Use the information below when it is relevant to the user's message.\n"
    "\n"
    "## Knowledge\n"
    "{{knowledge}}\n"
    "\n"
    "## Long-term memories with this user\n"
    "{{memories}}\n"
    "\n"
    "## Current user data\n"
    "{{user_data}}\n"
    "\n"
    "## Tools\n"
    "{{tools}}\n"
    "\n"
    "## Response format\n"
    "{{format_rules}}";

const char* const kDefaultFormatRules =
    "If you need a tool, reply with exactly these lines and nothing else:\n"
    "Thought: <your reasoning>\n"
    "Action: <tool name>\n"
    "Action Input: <JSON object with the tool input>\n"
    "You will then receive an Observation with the tool result.\n"
    "\n"
    "When you can answer, reply with exactly these lines:\n"
    "Thought: <your reasoning>\n"
    "Answer: <what you say to the user>\n"
    "Emotion: <one of happiness, sadness, anger, fear, disgust, surprise, neutral>\n"
    "Intensity: <number between 0 and 1>\n"
    "Cause: <one of user, self, third-party, none>\n"
    "Category: <one of greeting, insult, compliment, question, statement, farewell, other>";

PersonaConfig PersonaConfig::defaults() {
    PersonaConfig p;
    p.system_template = kDefaultSystemTemplate;
    p.instructions_template = kDefaultInstructionsTemplate;
    p.format_rules = kDefaultFormatRules;
    return p;
}

std::string fill_template(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl.compare(i, 2, "{{") == 0) {
            const auto close = tmpl.find("}}", i + 2);
            if (close != std::string_view::npos) {
                const auto key = tmpl.substr(i + 2, close - i - 2);
                bool replaced = false;
                for (const auto& [k, v] : values) {
                    if (k == key) {
                        out += v;
                        replaced = true;
                        break;
                    }
                }
                if (replaced) {
                    i = close + 2;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::string render_knowledge(const std::vector<memory::RetrievedPassage>& passages) {
    if (passages.empty()) return kEmptySection;
    std::string out;
    for (const auto& p : passages) {
        if (!out.empty()) out += "\n\n";
        out += "[" + std::to_string(p.rank) + "]";
        const auto source = p.chunk.metadata.value("source", std::string());
        if (!source.empty()) out += " (source: " + source + ")";
        out += "\n" + p.chunk.text;
    }
    return out;
}

std::string render_memories(const std::vector<memory::RetrievedPassage>& passages) {
    if (passages.empty()) return kEmptySection;
    std::string out;
    for (const auto& p : passages) {
        if (!out.empty()) out += "\n\n";
        out += "[" + std::to_string(p.rank) + "] (earlier conversation, interactions " +
               std::to_string(p.chunk.span.begin) + "-" + std::to_string(p.chunk.span.end) + ")\n" + p.chunk.text;
    }
    return out;
}

std::string render_user_data(const UserData& data) {
    std::string out = "User ID: " + (data.user_id.empty() ? std::string("unknown") : data.user_id);
    if (data.display_name) out += "\nUser name: " + *data.display_name;
    out += "\nDetected user emotion: ";
    if (data.detected_emotion) {
        out += std::string(affect::to_string(data.detected_emotion->category)) + " (confidence " +
               format_fixed(data.detected_emotion->confidence, 2) + ")";
    } else {
        out += "unknown";
    }
    if (data.location) {
        out += "\nUser location: (" + format_fixed(data.location->x, 2) + ", " + format_fixed(data.location->y, 2) +
               ", " + format_fixed(data.location->z, 2) + ") m";
    }
    return out;
}

namespace {
std::string or_none(std::string s) { return trim(s).empty() ? std::string(kEmptySection) : s; }
}  // namespace

std::string PromptBundle::render() const {
    std::string out;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto& m = messages[i];
        out += "--- [" + std::to_string(i) + "] " + std::string(llm::to_string(m.role));
        if (m.name) out += " (" + *m.name + ")";
        out += " ---\n" + m.content + "\n";
    }
    return out;
}

PromptBundle build_prompt(const TurnContext& ctx, const PersonaConfig& persona) {
    PromptBundle b;
    const std::string system = fill_template(persona.system_template, {{"name", persona.name}, {"role", persona.role}});
    const std::string instructions = fill_template(
        persona.instructions_template,
        {{"knowledge", render_knowledge(ctx.retrieved_knowledge)},
         {"memories", render_memories(ctx.retrieved_memories)},
         {"user_data", or_none(render_user_data(ctx.user_data))},
         {"tools", or_none(ctx.tool_block)},
         {"format_rules", or_none(persona.format_rules)}});
    b.messages.push_back(llm::ChatMessage{llm::Role::system, system, std::nullopt, {}});
    b.messages.push_back(llm::ChatMessage{llm::Role::system, instructions, std::nullopt, {}});

    const auto& h = ctx.chat_history;
    const std::size_t start = h.size() > persona.history_window ? h.size() - persona.history_window : 0;
    for (std::size_t i = start; i < h.size(); ++i) {
        llm::ChatMessage m = h[i];
        m.timestamp = {};
        b.messages.push_back(std::move(m));
    }
    b.messages.push_back(llm::ChatMessage{llm::Role::user, ctx.user_text, std::nullopt, {}});
    return b;
}

}  // namespace social::dialogue
