#pragma once

// HTTP + SSE front end over SessionManager.
//
//   POST   /v1/sessions                              -> 201 {session_id, user_id}
//   POST   /v1/sessions/{id}/utterance               -> 200 turn result | 404 | 409
//   POST   /v1/sessions/{id}/percepts                -> 202 {outcome}
//   GET    /v1/sessions/{id}/state                   -> affect + session counters
//   GET    /v1/sessions/{id}/turns                   -> turn ids
//   GET    /v1/sessions/{id}/turns/{turn_id}/trace   -> ordered turn events
//   GET    /v1/sessions/{id}/events                  -> text/event-stream
//   DELETE /v1/sessions/{id}                         -> closes (episodic flush)
//   POST   /v1/knowledge/ingest                      -> {chunks_stored}
//   GET    /v1/users/{id}/memory/segments            -> stored segments
//   GET    /v1/health
//
// Errors: {code, message} with codes unknown_session, unknown_turn,
// turn_in_flight, validation_failed, provider_unavailable, internal_error.

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "social/session.hpp"

namespace httplib {
class Server;
}

namespace social::service {

class HttpService {
public:
    explicit HttpService(std::shared_ptr<SessionManager> sessions);
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    // Binds; port 0 picks a free port. Returns the bound port. Throws
    // ConfigError when binding fails.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void run();
    // Runs in a background thread.
    void start();
    void stop();
    int port() const { return port_; }

    SessionManager& sessions() { return *sessions_; }

private:
    void install_routes();

    std::shared_ptr<SessionManager> sessions_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::atomic<bool> stopping_{false};
    int port_ = -1;
};

}  // namespace social::service
