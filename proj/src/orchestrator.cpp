#include "social/orchestrator.hpp"

#include <array>
#include <chrono>
#include <cstdio>

#include <spdlog/spdlog.h>

namespace social::dialogue {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 8> kStageNames = {
    "received",  "contextualized", "retrieved",      "prompt_built",
    "tool_called", "completed",    "affect_updated", "behavior_emitted"};

json passages_json(const std::vector<memory::RetrievedPassage>& ps) {
    json arr = json::array();
    for (const auto& p : ps) arr.push_back(memory::to_json(p));
    return arr;
}

void emit(const EventSink& sink, const TurnContext& ctx, TurnStage stage, json payload, Timestamp at) {
    if (!sink) return;
    sink(TurnEvent{ctx.session_id, ctx.turn_id, stage, std::move(payload), at});
}

}  // namespace

std::string_view to_string(TurnStage s) { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<TurnStage> parse_stage(std::string_view s) {
    for (std::size_t i = 0; i < kStageNames.size(); ++i) {
        if (s == kStageNames[i]) return static_cast<TurnStage>(i);
    }
    return std::nullopt;
}

json to_json(const TurnEvent& e) {
    return {{"session_id", e.session_id},
            {"turn_id", e.turn_id},
            {"stage", to_string(e.stage)},
            {"payload", e.payload},
            {"timestamp", to_epoch_seconds(e.timestamp)}};
}

TurnEvent turn_event_from_json(const json& j) {
    TurnEvent e;
    e.session_id = j.at("session_id").get<std::string>();
    e.turn_id = j.at("turn_id").get<std::string>();
    const auto stage = parse_stage(j.at("stage").get<std::string>());
    if (!stage) throw ValidationError("unknown turn stage '" + j.at("stage").get<std::string>() + "'");
    e.stage = *stage;
    e.payload = j.value("payload", json::object());
    e.timestamp = from_epoch_seconds(j.at("timestamp").get<double>());
    return e;
}

void AgentConfig::validate() const {
    if (max_iterations < 1) throw ConfigError("agent.max_iterations must be >= 1");
    if (temperature < 0.0 || temperature > 2.0) throw ConfigError("agent.temperature must be in [0, 2]");
    if (max_output < 1) throw ConfigError("agent.max_output must be >= 1");
}

AgentConfig agent_config_from_json(const json& j) {
    AgentConfig c;
    if (j.is_null()) return c;
    try {
        c.max_iterations = j.value("max_iterations", c.max_iterations);
        c.affect_enabled = j.value("affect_enabled", c.affect_enabled);
        c.temperature = j.value("temperature", c.temperature);
        c.max_output = j.value("max_output", c.max_output);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("agent: ") + e.what());
    }
    c.validate();
    return c;
}

SessionState::SessionState(std::string id, std::string user, Timestamp created, const memory::MemoryConfig& mem,
                           affect::AffectState initial_affect, double percept_staleness_s)
    : session_id(std::move(id)),
      user_id(std::move(user)),
      created_at(created),
      segmenter(user_id, session_id, mem.segment_window, mem.segment_overlap),
      affect(std::move(initial_affect)),
      percepts(percept_staleness_s) {}

Orchestrator::Orchestrator(AgentConfig agent, PersonaConfig persona, std::shared_ptr<memory::MemorySystem> memory,
                           std::shared_ptr<llm::LlmProvider> llm, std::shared_ptr<const tools::ToolRegistry> tools,
                           affect::AffectConfig affect_config, affect::PersonalityProfile personality,
                           behavior::GestureMap gestures, std::shared_ptr<const Clock> clock)
    : agent_(agent),
      persona_(std::move(persona)),
      memory_(std::move(memory)),
      llm_(std::move(llm)),
      tools_(std::move(tools)),
      affect_config_(std::move(affect_config)),
      personality_(personality),
      gestures_(std::move(gestures)),
      clock_(std::move(clock)) {
    agent_.validate();
    affect_config_.validate();
    if (!memory_ || !llm_ || !tools_ || !clock_) throw ConfigError("orchestrator: missing component");
}

SessionState Orchestrator::new_session(std::string session_id, std::string user_id) const {
    const auto now = clock_->now();
    return SessionState(std::move(session_id), std::move(user_id), now, memory_->config(),
                        affect::AffectState::initial(personality_, affect_config_, now));
}

std::string Orchestrator::next_turn_id(SessionState& session) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "turn-%04zu", ++session.attempts);
    return buf;
}

TurnContext Orchestrator::gather_context(const SessionState& session, const std::string& user_text,
                                         const std::string& turn_id, const EventSink& sink) const {
    TurnContext ctx;
    ctx.session_id = session.session_id;
    ctx.user_id = session.user_id;
    ctx.turn_id = turn_id;
    ctx.user_text = user_text;

    const auto& h = session.history;
    const std::size_t window = persona_.history_window;
    ctx.chat_history.assign(h.size() > window ? h.end() - static_cast<std::ptrdiff_t>(window) : h.begin(), h.end());

    const auto cq = memory_->contextualize(user_text, ctx.chat_history);
    ctx.contextualized_query = cq.text;
    json cpayload{{"query", cq.text}, {"used_llm", cq.used_llm}, {"fell_back", cq.fell_back}};
    cpayload["llm_output"] = cq.llm_output ? json(*cq.llm_output) : json(nullptr);
    if (!cq.error.empty()) cpayload["error"] = cq.error;
    emit(sink, ctx, TurnStage::contextualized, std::move(cpayload), clock_->now());

    json errors = json::object();
    try {
        ctx.retrieved_knowledge = memory_->retrieve_knowledge(ctx.contextualized_query);
    } catch (const std::exception& e) {
        spdlog::warn("session {}: knowledge retrieval failed: {}", ctx.session_id, e.what());
        errors["knowledge"] = e.what();
    }
    try {
        ctx.retrieved_memories = memory_->retrieve_memories(ctx.user_id, ctx.contextualized_query);
    } catch (const std::exception& e) {
        spdlog::warn("session {}: memory retrieval failed: {}", ctx.session_id, e.what());
        errors["memories"] = e.what();
    }

    const auto percepts = session.percepts.snapshot(clock_->now());
    ctx.user_data.user_id = session.user_id;
    ctx.user_data.display_name = session.display_name;
    ctx.user_data.detected_emotion = percepts.emotion;
    ctx.user_data.location = percepts.location;
    ctx.tool_block = tools_->describe_all();

    json rpayload{{"knowledge", passages_json(ctx.retrieved_knowledge)},
                  {"memories", passages_json(ctx.retrieved_memories)},
                  {"percepts", perception::to_json(percepts)}};
    if (!errors.empty()) rpayload["errors"] = errors;
    emit(sink, ctx, TurnStage::retrieved, std::move(rpayload), clock_->now());
    return ctx;
}

std::string Orchestrator::complete(const llm::CompletionRequest& request) const {
    try {
        return llm_->complete(request);
    } catch (const ProviderUnavailable&) {
        throw;
    } catch (const std::exception& e) {
        throw ProviderUnavailable(std::string("language model call failed: ") + e.what());
    }
}

AgentResponse Orchestrator::run_turn(const SessionState& session, const std::string& user_text,
                                     const std::string& turn_id, const EventSink& sink) const {
    if (session.status != SessionStatus::active) throw ValidationError("session is closed");
    if (trim(user_text).empty()) throw ValidationError("utterance text must not be empty");
    const auto started = std::chrono::steady_clock::now();
    const Timestamp turn_time = clock_->now();

    TurnContext probe;
    probe.session_id = session.session_id;
    probe.turn_id = turn_id;
    emit(sink, probe, TurnStage::received, json{{"text", user_text}, {"user_id", session.user_id}}, turn_time);

    const TurnContext ctx = gather_context(session, user_text, turn_id, sink);
    PromptBundle bundle = build_prompt(ctx, persona_);
    {
        json msgs = json::array();
        for (const auto& m : bundle.messages) msgs.push_back(llm::to_json(m));
        emit(sink, ctx, TurnStage::prompt_built, json{{"messages", msgs}}, clock_->now());
    }

    AgentResponse resp;
    resp.turn_id = turn_id;
    resp.knowledge = ctx.retrieved_knowledge;
    resp.memories = ctx.retrieved_memories;

    llm::CompletionRequest req;
    req.messages = std::move(bundle.messages);
    req.temperature = agent_.temperature;
    req.max_output = agent_.max_output;
    req.purpose = "orchestration";

    std::optional<FinalResponse> final;
    std::string final_raw;
    while (true) {
        std::string raw = complete(req);
        ++resp.completions;
        auto directive = parse_directive(raw);
        if (auto* fin = std::get_if<FinalResponse>(&directive)) {
            final = std::move(*fin);
            final_raw = std::move(raw);
            break;
        }
        const auto& tr = std::get<ToolRequest>(directive);
        if (resp.tool_trace.size() >= agent_.max_iterations) {
            spdlog::warn("session {} {}: tool iteration limit ({}) reached", ctx.session_id, turn_id,
                         agent_.max_iterations);
            resp.iteration_limit_reached = true;
            final_raw = std::move(raw);
            break;
        }
        auto inv = tools_->invoke(tr.tool_name, tr.tool_input, *clock_);
        json payload = tools::to_json(inv);
        payload["completion"] = raw;
        payload["thought"] = tr.thought;
        payload["round"] = resp.tool_trace.size() + 1;
        req.messages.push_back(llm::ChatMessage{llm::Role::assistant, raw, std::nullopt, {}});
        req.messages.push_back(
            llm::ChatMessage{llm::Role::tool, "Observation: " + inv.observation.text, tr.tool_name, {}});
        resp.tool_trace.push_back(std::move(inv));
        emit(sink, ctx, TurnStage::tool_called, std::move(payload), clock_->now());
    }

    if (final) {
        resp.answer = final->answer;
        resp.emotion = final->emotion;
        resp.base_intensity = final->intensity;
        resp.cause = final->cause;
        resp.category = final->category;
    } else {
        resp.answer = kIterationLimitAnswer;
    }

    if (agent_.affect_enabled) {
        affect::AffectState now_state = session.affect;
        now_state.advance_to(turn_time, affect_config_);
        resp.intensity = affect::effective_intensity(resp.base_intensity, affect_config_.pad_of(resp.emotion),
                                                     now_state.mood.current, affect_config_);
    } else {
        resp.emotion = affect::EmotionCategory::neutral;
        resp.base_intensity = 0.0;
        resp.intensity = 0.0;
    }
    resp.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    json payload{{"completion", final_raw}, {"response", to_json(resp)}};
    if (final) payload["directive"] = to_json(AgentDirective{*final});
    emit(sink, ctx, TurnStage::completed, std::move(payload), clock_->now());
    return resp;
}

behavior::BehaviorScript Orchestrator::post_turn(SessionState& session, const std::string& user_text,
                                                 const AgentResponse& response, const EventSink& sink) const {
    const Timestamp now = clock_->now();
    TurnContext ctx;
    ctx.session_id = session.session_id;
    ctx.turn_id = response.turn_id;

    auto user_msg = llm::make_message(llm::Role::user, user_text, now);
    auto assistant_msg = llm::make_message(llm::Role::assistant, response.answer, now);
    session.history.push_back(user_msg);
    session.history.push_back(assistant_msg);
    ++session.turn_counter;

    memory_->retry_pending();
    if (auto seg = session.segmenter.append(std::move(user_msg), std::move(assistant_msg), now)) {
        if (!memory_->store_segment(*seg)) {
            spdlog::warn("session {}: segment {} queued for retry", session.session_id, seg->chunk_id());
        }
    }

    session.affect.advance_to(now, affect_config_);
    if (agent_.affect_enabled && response.emotion != affect::EmotionCategory::neutral) {
        session.affect.active.push_back(
            affect::appraise(response.emotion, response.base_intensity, response.cause, now, affect_config_));
    }
    emit(sink, ctx, TurnStage::affect_updated, json{{"state", affect::to_json(session.affect)}}, now);

    auto script = behavior::realize(response, session.percepts.snapshot(now), gestures_, now);
    emit(sink, ctx, TurnStage::behavior_emitted, json{{"behavior_script", behavior::to_json(script)}}, now);
    return script;
}

std::optional<memory::EpisodicSegment> Orchestrator::flush_episode(SessionState& session) const {
    auto seg = session.segmenter.flush(clock_->now());
    if (seg && !memory_->store_segment(*seg)) {
        spdlog::warn("session {}: segment {} queued for retry", session.session_id, seg->chunk_id());
    }
    return seg;
}

std::optional<memory::EpisodicSegment> Orchestrator::close_session(SessionState& session) const {
    if (session.status == SessionStatus::closed) return std::nullopt;
    auto seg = flush_episode(session);
    session.status = SessionStatus::closed;
    return seg;
}

}  // namespace social::dialogue
