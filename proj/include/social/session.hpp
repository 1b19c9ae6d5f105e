#pragma once

// Session lifecycle on top of the orchestrator: per-session turn
// serialisation, traces, JSON-lines session logs and event fan-out. Used by
// the HTTP service and the terminal REPL.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "social/config.hpp"
#include "social/orchestrator.hpp"
#include "social/perception.hpp"

namespace social::service {

// A turn is already running on the session.
class TurnInFlight : public Error {
public:
    using Error::Error;
};

struct SseFrame {
    std::uint64_t id = 0;
    std::string event;  // turn_event | behavior_script | turn_failed | session_closed | gap
    std::string data;   // compact JSON

    std::string encode() const;  // "id: ..\nevent: ..\ndata: ..\n\n"
};

// One consumer of a session's event stream. Bounded: when the consumer
// falls behind by more than `capacity` frames it is cut off, and the last
// frame it receives is a gap marker.
class Subscription {
public:
    explicit Subscription(std::size_t capacity) : capacity_(capacity) {}

    // Blocks up to `timeout`. nullopt on timeout or once closed and drained.
    std::optional<SseFrame> next(std::chrono::milliseconds timeout);
    bool closed() const;

    void push(const SseFrame& frame);  // never blocks
    void close();

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<SseFrame> queue_;
    bool closed_ = false;
    bool dropped_ = false;
};

class EventHub {
public:
    explicit EventHub(std::size_t capacity) : capacity_(capacity) {}
    std::shared_ptr<Subscription> subscribe();
    void publish(const std::string& event, const nlohmann::json& data);
    void close_all();
    std::size_t subscriber_count() const;

private:
    std::size_t capacity_;
    mutable std::mutex mu_;
    std::uint64_t next_id_ = 1;
    std::vector<std::weak_ptr<Subscription>> subs_;
};

struct CreateSessionRequest {
    std::optional<std::string> user_id;
    std::optional<std::string> face_ref;
    std::optional<std::string> display_name;
};

struct TurnResult {
    dialogue::AgentResponse response;
    behavior::BehaviorScript script;
};

// Utterance reply body: {answer, emotion, intensity, cause, category,
// behavior_script, turn_id, ...}.
nlohmann::json to_json(const TurnResult& r);

class SessionManager {
public:
    // Loads the user registry from <data_dir>/users.json and writes session
    // logs to <data_dir>/logs/ when a data directory is configured.
    explicit SessionManager(std::shared_ptr<Runtime> runtime);
    ~SessionManager();

    SessionManager(const SessionManager&) = delete;
    SessionManager& operator=(const SessionManager&) = delete;

    Runtime& runtime() { return *runtime_; }

    // Returns {session_id, user_id}. Throws AmbiguityError when face_ref and
    // user_id identify different users.
    std::pair<std::string, std::string> create_session(const CreateSessionRequest& req);

    // Throws NotFoundError, TurnInFlight, ValidationError, ProviderUnavailable.
    TurnResult utterance(const std::string& session_id, const std::string& text);

    // Applies one percept event. Utterance percepts are queued and run in
    // the background; user_leave flushes the episode. Throws NotFoundError
    // and ValidationError.
    perception::IngestOutcome percept(const std::string& session_id, const nlohmann::json& event);

    nlohmann::json state(const std::string& session_id);
    // Ordered TurnEvents of one turn. Throws NotFoundError.
    nlohmann::json trace(const std::string& session_id, const std::string& turn_id);
    std::vector<std::string> turn_ids(const std::string& session_id);

    std::size_t ingest(const std::vector<memory::KnowledgeDoc>& docs);
    std::vector<memory::Chunk> segments(const std::string& user_id);

    // Flushes the episode and closes. Throws NotFoundError or TurnInFlight.
    nlohmann::json close_session(const std::string& session_id);

    std::shared_ptr<Subscription> subscribe(const std::string& session_id);

    // Waits for queued background turns of one session (tests).
    void drain(const std::string& session_id);

    // Closes every active session and checkpoints the store.
    void shutdown();

    std::filesystem::path log_path(const std::string& session_id) const;

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& session_id);
    std::shared_ptr<Session> find_active(const std::string& session_id);
    TurnResult run_locked_turn(Session& s, const std::string& text);
    void log_record(Session& s, const nlohmann::json& record);
    void worker_loop(std::shared_ptr<Session> s);
    std::string fresh_session_id();

    std::shared_ptr<Runtime> runtime_;
    perception::UserRegistry users_;
    std::filesystem::path log_dir_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t session_seq_ = 0;
    bool shut_down_ = false;
};

// Header record written as the first line of every session log.
nlohmann::json session_header(const Runtime& rt, const dialogue::SessionState& s);

}  // namespace social::service
