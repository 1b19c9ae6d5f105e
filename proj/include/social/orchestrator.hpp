#pragma once

// One conversational turn: gather context, prompt, reason/act with tools,
// parse the structured answer, then update memory and affect.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "social/affect.hpp"
#include "social/behavior.hpp"
#include "social/directive.hpp"
#include "social/memory_system.hpp"
#include "social/perception.hpp"
#include "social/prompt.hpp"
#include "social/tools.hpp"

namespace social::dialogue {

enum class TurnStage {
    received,
    contextualized,
    retrieved,
    prompt_built,
    tool_called,
    completed,
    affect_updated,
    behavior_emitted
};

std::string_view to_string(TurnStage s);
std::optional<TurnStage> parse_stage(std::string_view s);

struct TurnEvent {
    std::string session_id;
    std::string turn_id;
    TurnStage stage = TurnStage::received;
    nlohmann::json payload = nlohmann::json::object();
    Timestamp timestamp{};
};

nlohmann::json to_json(const TurnEvent& e);
TurnEvent turn_event_from_json(const nlohmann::json& j);

using EventSink = std::function<void(const TurnEvent&)>;

struct AgentConfig {
    std::size_t max_iterations = 5;
    bool affect_enabled = true;
    double temperature = 0.2;
    int max_output = 1024;

    void validate() const;
};

AgentConfig agent_config_from_json(const nlohmann::json& j);

enum class SessionStatus { active, closed };

// Mutable per-session state. The owner serialises access; run_turn only
// reads it.
struct SessionState {
    SessionState(std::string id, std::string user, Timestamp created, const memory::MemoryConfig& mem,
                 affect::AffectState initial_affect, double percept_staleness_s = 30.0);

    std::string session_id;
    std::string user_id;
    std::optional<std::string> display_name;
    Timestamp created_at{};
    SessionStatus status = SessionStatus::active;
    std::vector<llm::ChatMessage> history;
    memory::EpisodicSegmenter segmenter;
    affect::AffectState affect;
    perception::PerceptTracker percepts;
    std::size_t turn_counter = 0;  // completed turns
    std::size_t attempts = 0;      // turn ids handed out
};

inline constexpr const char* kIterationLimitAnswer =
    "I'm sorry, I could not finish looking that up: I reached my limit of tool steps for one answer.";

class Orchestrator {
public:
    Orchestrator(AgentConfig agent, PersonaConfig persona, std::shared_ptr<memory::MemorySystem> memory,
                 std::shared_ptr<llm::LlmProvider> llm, std::shared_ptr<const tools::ToolRegistry> tools,
                 affect::AffectConfig affect_config, affect::PersonalityProfile personality,
                 behavior::GestureMap gestures, std::shared_ptr<const Clock> clock);

    const AgentConfig& agent_config() const { return agent_; }
    const PersonaConfig& persona() const { return persona_; }
    const affect::AffectConfig& affect_config() const { return affect_config_; }
    const affect::PersonalityProfile& personality() const { return personality_; }
    const behavior::GestureMap& gestures() const { return gestures_; }
    const tools::ToolRegistry& tools() const { return *tools_; }
    memory::MemorySystem& memory() { return *memory_; }
    const Clock& clock() const { return *clock_; }

    SessionState new_session(std::string session_id, std::string user_id) const;

    // Next turn id for the session ("turn-0001", ...).
    static std::string next_turn_id(SessionState& session);

    // Each failing source degrades to an empty block.
    TurnContext gather_context(const SessionState& session, const std::string& user_text,
                               const std::string& turn_id, const EventSink& sink) const;

    // Does not modify the session. Throws ProviderUnavailable when the LLM
    // cannot be reached.
    AgentResponse run_turn(const SessionState& session, const std::string& user_text, const std::string& turn_id,
                           const EventSink& sink) const;

    // History, episodic memory, affect, behavior.
    behavior::BehaviorScript post_turn(SessionState& session, const std::string& user_text,
                                       const AgentResponse& response, const EventSink& sink) const;

    // Flushes the trailing episodic segment, if any, into memory.
    std::optional<memory::EpisodicSegment> flush_episode(SessionState& session) const;
    std::optional<memory::EpisodicSegment> close_session(SessionState& session) const;

private:
    std::string complete(const llm::CompletionRequest& request) const;

    AgentConfig agent_;
    PersonaConfig persona_;
    std::shared_ptr<memory::MemorySystem> memory_;
    std::shared_ptr<llm::LlmProvider> llm_;
    std::shared_ptr<const tools::ToolRegistry> tools_;
    affect::AffectConfig affect_config_;
    affect::PersonalityProfile personality_;
    behavior::GestureMap gestures_;
    std::shared_ptr<const Clock> clock_;
};

}  // namespace social::dialogue
