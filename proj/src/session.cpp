#include "social/session.hpp"

#include <atomic>
#include <random>

#include <spdlog/spdlog.h>

namespace social::service {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

// ---------------------------------------------------------------------------
// Event fan-out
// ---------------------------------------------------------------------------

std::string SseFrame::encode() const {
    return "id: " + std::to_string(id) + "\nevent: " + event + "\ndata: " + data + "\n\n";
}

std::optional<SseFrame> Subscription::next(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    auto f = std::move(queue_.front());
    queue_.pop_front();
    return f;
}

bool Subscription::closed() const {
    std::lock_guard lock(mu_);
    return closed_ && queue_.empty();
}

void Subscription::push(const SseFrame& frame) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        if (queue_.size() >= capacity_) {
            // Slow consumer: cut it off with a gap marker.
            dropped_ = true;
            closed_ = true;
            queue_.push_back(SseFrame{frame.id, "gap", dump(json{{"dropped_from", frame.id}})});
        } else {
            queue_.push_back(frame);
        }
    }
    cv_.notify_all();
}

void Subscription::close() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
}

std::shared_ptr<Subscription> EventHub::subscribe() {
    auto sub = std::make_shared<Subscription>(capacity_);
    std::lock_guard lock(mu_);
    subs_.push_back(sub);
    return sub;
}

void EventHub::publish(const std::string& event, const json& data) {
    std::vector<std::shared_ptr<Subscription>> live;
    SseFrame frame;
    {
        std::lock_guard lock(mu_);
        frame = SseFrame{next_id_++, event, dump(data)};
        std::erase_if(subs_, [](const auto& w) { return w.expired(); });
        for (const auto& w : subs_) {
            if (auto s = w.lock()) live.push_back(std::move(s));
        }
        // Pushing under the hub lock keeps frame order identical for every
        // subscriber; push never blocks.
        for (const auto& s : live) s->push(frame);
    }
}

void EventHub::close_all() {
    std::lock_guard lock(mu_);
    for (const auto& w : subs_) {
        if (auto s = w.lock()) s->close();
    }
    subs_.clear();
}

std::size_t EventHub::subscriber_count() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& w : subs_) n += !w.expired();
    return n;
}

// ---------------------------------------------------------------------------
// Sessions
// ---------------------------------------------------------------------------

json to_json(const TurnResult& r) {
    json j{{"turn_id", r.response.turn_id},
           {"answer", r.response.answer},
           {"emotion", affect::to_string(r.response.emotion)},
           {"intensity", r.response.intensity},
           {"base_intensity", r.response.base_intensity},
           {"cause", affect::to_string(r.response.cause)},
           {"category", dialogue::to_string(r.response.category)},
           {"behavior_script", behavior::to_json(r.script)},
           {"tool_calls", r.response.tool_trace.size()},
           {"iteration_limit_reached", r.response.iteration_limit_reached},
           {"latency_ms", r.response.latency_ms}};
    return j;
}

json session_header(const Runtime& rt, const dialogue::SessionState& s) {
    const auto& c = rt.config;
    json tool_names = json::array();
    for (const auto& spec : rt.tools->specs()) tool_names.push_back(spec.name);
    const auto& p = rt.orchestrator->personality();
    return {{"type", "session"},
            {"session_id", s.session_id},
            {"user_id", s.user_id},
            {"created_at", to_epoch_seconds(s.created_at)},
            {"config",
             {{"affect_enabled", c.agent.affect_enabled},
              {"max_iterations", c.agent.max_iterations},
              {"temperature", c.agent.temperature},
              {"affect", affect::to_json(rt.orchestrator->affect_config())},
              {"personality",
               {{"openness", p.openness()},
                {"conscientiousness", p.conscientiousness()},
                {"extraversion", p.extraversion()},
                {"agreeableness", p.agreeableness()},
                {"neuroticism", p.neuroticism()}}},
              {"gestures", rt.orchestrator->gestures().to_json()},
              {"tools", tool_names},
              {"observation_budget", rt.tools->observation_budget()},
              {"persona_name", c.persona.name},
              {"history_window", c.persona.history_window},
              {"segment_window", c.memory.segment_window},
              {"segment_overlap", c.memory.segment_overlap},
              {"percept_staleness_s", c.percept_staleness_s}}}};
}

struct SessionManager::Session {
    Session(dialogue::SessionState st, std::size_t capacity) : state(std::move(st)), hub(capacity) {}

    std::mutex mu;  // state
    dialogue::SessionState state;
    std::atomic<bool> in_flight{false};

    std::mutex trace_mu;
    std::map<std::string, std::vector<json>> traces;
    std::vector<std::string> turn_order;

    std::mutex log_mu;
    std::ofstream log;

    EventHub hub;

    std::mutex q_mu;
    std::condition_variable q_cv;
    std::deque<std::string> queue;
    bool busy = false;
    bool stop = false;
    std::thread worker;
};

SessionManager::SessionManager(std::shared_ptr<Runtime> runtime)
    : runtime_(std::move(runtime)),
      users_(runtime_->config.data_dir.empty() ? std::filesystem::path()
                                               : runtime_->config.data_dir / "users.json") {
    if (!runtime_->config.data_dir.empty()) {
        log_dir_ = runtime_->config.data_dir / "logs";
        std::filesystem::create_directories(log_dir_);
    }
}

SessionManager::~SessionManager() { shutdown(); }

std::filesystem::path SessionManager::log_path(const std::string& session_id) const {
    if (log_dir_.empty()) return {};
    return log_dir_ / (memory::safe_path_component(session_id) + ".jsonl");
}

std::string SessionManager::fresh_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[32];
    std::snprintf(buf, sizeof buf, "sess-%012llx", static_cast<unsigned long long>(rng() & 0xffffffffffffULL));
    return buf;
}

std::pair<std::string, std::string> SessionManager::create_session(const CreateSessionRequest& req) {
    auto& orch = *runtime_->orchestrator;
    if (req.user_id && trim(*req.user_id).empty()) throw ValidationError("user_id must be non-empty");
    const auto user_id = users_.identify_or_register(req.face_ref, req.user_id, orch.clock().now(), req.display_name);

    std::shared_ptr<Session> s;
    {
        std::lock_guard lock(mu_);
        if (shut_down_) throw ValidationError("service is shutting down");
        std::string id;
        do {
            id = fresh_session_id();
        } while (sessions_.count(id));
        auto state = orch.new_session(id, user_id);
        state.percepts = perception::PerceptTracker(runtime_->config.percept_staleness_s);
        if (auto rec = users_.get(user_id)) state.display_name = rec->display_name;
        s = std::make_shared<Session>(std::move(state), runtime_->config.server.sse_buffer);
        sessions_.emplace(id, s);
    }
    if (!log_dir_.empty()) {
        s->log.open(log_path(s->state.session_id), std::ios::app);
        if (!s->log) spdlog::warn("cannot open session log {}", log_path(s->state.session_id).string());
    }
    log_record(*s, session_header(*runtime_, s->state));
    spdlog::info("session {} opened for user {}", s->state.session_id, user_id);
    return {s->state.session_id, user_id};
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& session_id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
    return it->second;
}

std::shared_ptr<SessionManager::Session> SessionManager::find_active(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    if (s->state.status != dialogue::SessionStatus::active)
        throw ValidationError("session '" + session_id + "' is closed");
    return s;
}

void SessionManager::log_record(Session& s, const json& record) {
    std::lock_guard lock(s.log_mu);
    if (!s.log.is_open()) return;
    s.log << dump(record) << '\n';
    s.log.flush();
}

TurnResult SessionManager::run_locked_turn(Session& s, const std::string& text) {
    auto& orch = *runtime_->orchestrator;
    std::string turn_id;
    std::optional<dialogue::SessionState> snapshot;
    {
        std::lock_guard lock(s.mu);
        if (s.state.status != dialogue::SessionStatus::active)
            throw ValidationError("session '" + s.state.session_id + "' is closed");
        turn_id = dialogue::Orchestrator::next_turn_id(s.state);
        snapshot.emplace(s.state);
    }
    {
        std::lock_guard lock(s.trace_mu);
        s.traces[turn_id];
        s.turn_order.push_back(turn_id);
    }
    const dialogue::EventSink sink = [&](const dialogue::TurnEvent& e) {
        json j = dialogue::to_json(e);
        {
            std::lock_guard lock(s.trace_mu);
            s.traces[e.turn_id].push_back(j);
        }
        json rec = j;
        rec["type"] = "event";
        log_record(s, rec);
        s.hub.publish("turn_event", j);
    };

    TurnResult result;
    try {
        result.response = orch.run_turn(*snapshot, text, turn_id, sink);
    } catch (const std::exception& e) {
        json failure{{"type", "turn_failed"},
                     {"session_id", s.state.session_id},
                     {"turn_id", turn_id},
                     {"error", e.what()},
                     {"timestamp", to_epoch_seconds(orch.clock().now())}};
        log_record(s, failure);
        s.hub.publish("turn_failed", failure);
        spdlog::warn("session {} {} failed: {}", s.state.session_id, turn_id, e.what());
        throw;
    }
    {
        std::lock_guard lock(s.mu);
        result.script = orch.post_turn(s.state, text, result.response, sink);
    }
    s.hub.publish("behavior_script", behavior::to_json(result.script));
    return result;
}

TurnResult SessionManager::utterance(const std::string& session_id, const std::string& text) {
    auto s = find_active(session_id);
    if (trim(text).empty()) throw ValidationError("text must be a non-empty string");
    if (s->in_flight.exchange(true)) throw TurnInFlight("a turn is already in flight for session '" + session_id + "'");
    try {
        auto r = run_locked_turn(*s, text);
        s->in_flight = false;
        return r;
    } catch (...) {
        s->in_flight = false;
        throw;
    }
}

void SessionManager::worker_loop(std::shared_ptr<Session> s) {
    while (true) {
        std::string text;
        {
            std::unique_lock lock(s->q_mu);
            s->q_cv.wait(lock, [&] { return s->stop || !s->queue.empty(); });
            if (s->queue.empty()) return;
            text = std::move(s->queue.front());
            s->queue.pop_front();
            s->busy = true;
        }
        // Wait for any HTTP-driven turn to finish; turns stay serial.
        while (s->in_flight.exchange(true)) std::this_thread::sleep_for(std::chrono::milliseconds(5));
        try {
            run_locked_turn(*s, text);
        } catch (const std::exception& e) {
            spdlog::warn("session {}: queued utterance failed: {}", s->state.session_id, e.what());
        }
        s->in_flight = false;
        {
            std::lock_guard lock(s->q_mu);
            s->busy = false;
        }
        s->q_cv.notify_all();
    }
}

perception::IngestOutcome SessionManager::percept(const std::string& session_id, const json& body) {
    auto s = find_active(session_id);
    auto& orch = *runtime_->orchestrator;
    if (!body.is_object()) throw ValidationError("percept event must be a JSON object");
    perception::PerceptEvent ev;
    try {
        ev = perception::event_from_json(body, orch.clock().now());
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid percept event: ") + e.what());
    }
    if (!ev.session_id.empty() && ev.session_id != session_id)
        throw ValidationError("percept session_id does not match the URL");
    ev.session_id = session_id;

    perception::IngestOutcome outcome;
    std::optional<memory::EpisodicSegment> flushed;
    {
        std::lock_guard lock(s->mu);
        outcome = s->state.percepts.ingest(ev);
        if (outcome == perception::IngestOutcome::accepted && ev.kind == perception::PerceptKind::user_leave)
            flushed = orch.flush_episode(s->state);
    }
    json rec{{"type", "percept"},
             {"event", perception::to_json(ev)},
             {"outcome", outcome == perception::IngestOutcome::accepted ? "accepted" : "stale_ignored"},
             {"timestamp", to_epoch_seconds(orch.clock().now())}};
    if (flushed) rec["flushed_segment"] = {{"begin", flushed->span().begin}, {"end", flushed->span().end}};
    log_record(*s, rec);

    if (outcome == perception::IngestOutcome::accepted && ev.kind == perception::PerceptKind::utterance) {
        std::lock_guard lock(s->q_mu);
        if (!s->worker.joinable()) s->worker = std::thread([this, s] { worker_loop(s); });
        s->queue.push_back(ev.text);
        s->q_cv.notify_all();
    }
    return outcome;
}

void SessionManager::drain(const std::string& session_id) {
    auto s = find(session_id);
    std::unique_lock lock(s->q_mu);
    s->q_cv.wait(lock, [&] { return s->queue.empty() && !s->busy; });
}

json SessionManager::state(const std::string& session_id) {
    auto s = find(session_id);
    auto& orch = *runtime_->orchestrator;
    const auto now = orch.clock().now();
    std::lock_guard lock(s->mu);
    auto affect = s->state.affect;
    affect.advance_to(now, orch.affect_config());
    json j = affect::to_json(affect);
    j["session_id"] = s->state.session_id;
    j["user_id"] = s->state.user_id;
    j["status"] = s->state.status == dialogue::SessionStatus::active ? "active" : "closed";
    j["created_at"] = to_epoch_seconds(s->state.created_at);
    j["history_length"] = s->state.history.size();
    j["turn_counter"] = s->state.turn_counter;
    j["affect_enabled"] = orch.agent_config().affect_enabled;
    j["percepts"] = perception::to_json(s->state.percepts.snapshot(now));
    j["timestamp"] = to_epoch_seconds(now);
    return j;
}

json SessionManager::trace(const std::string& session_id, const std::string& turn_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->trace_mu);
    auto it = s->traces.find(turn_id);
    if (it == s->traces.end()) throw NotFoundError("unknown turn '" + turn_id + "'");
    return {{"session_id", session_id}, {"turn_id", turn_id}, {"events", it->second}};
}

std::vector<std::string> SessionManager::turn_ids(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->trace_mu);
    return s->turn_order;
}

std::size_t SessionManager::ingest(const std::vector<memory::KnowledgeDoc>& docs) {
    std::size_t n = 0;
    for (const auto& d : docs) n += runtime_->memory->ingest(d);
    return n;
}

std::vector<memory::Chunk> SessionManager::segments(const std::string& user_id) {
    return runtime_->memory->segments(user_id);
}

json SessionManager::close_session(const std::string& session_id) {
    auto s = find(session_id);
    if (s->in_flight.exchange(true)) throw TurnInFlight("a turn is in flight for session '" + session_id + "'");
    std::optional<memory::EpisodicSegment> seg;
    bool was_active = false;
    {
        std::lock_guard lock(s->mu);
        was_active = s->state.status == dialogue::SessionStatus::active;
        if (was_active) seg = runtime_->orchestrator->close_session(s->state);
    }
    s->in_flight = false;
    {
        std::lock_guard lock(s->q_mu);
        s->stop = true;
        s->queue.clear();
    }
    s->q_cv.notify_all();
    if (s->worker.joinable() && s->worker.get_id() != std::this_thread::get_id()) s->worker.join();

    json body{{"session_id", session_id}, {"status", "closed"}};
    body["flushed_segment"] = seg ? json{{"chunk_id", seg->chunk_id()},
                                         {"span", {{"begin", seg->span().begin}, {"end", seg->span().end}}}}
                                  : json(nullptr);
    if (was_active) {
        json rec = body;
        rec["type"] = "closed";
        rec["timestamp"] = to_epoch_seconds(runtime_->orchestrator->clock().now());
        log_record(*s, rec);
        s->hub.publish("session_closed", body);
        s->hub.close_all();
        spdlog::info("session {} closed", session_id);
    }
    return body;
}

std::shared_ptr<Subscription> SessionManager::subscribe(const std::string& session_id) {
    return find(session_id)->hub.subscribe();
}

void SessionManager::shutdown() {
    std::vector<std::string> ids;
    {
        std::lock_guard lock(mu_);
        if (shut_down_) return;
        shut_down_ = true;
        for (const auto& [id, s] : sessions_) ids.push_back(id);
    }
    for (const auto& id : ids) {
        auto s = find(id);
        {
            std::lock_guard lock(s->q_mu);
            s->stop = true;
        }
        s->q_cv.notify_all();
        if (s->worker.joinable()) s->worker.join();
        while (s->in_flight.load()) std::this_thread::sleep_for(std::chrono::milliseconds(5));
        try {
            close_session(id);
        } catch (const std::exception& e) {
            spdlog::warn("closing session {} at shutdown: {}", id, e.what());
        }
    }
    try {
        runtime_->store->checkpoint();
    } catch (const std::exception& e) {
        spdlog::warn("checkpoint at shutdown failed: {}", e.what());
    }
}

}  // namespace social::service
