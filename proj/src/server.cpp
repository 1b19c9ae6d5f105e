#include "social/server.hpp"

#include <spdlog/spdlog.h>

#include "social/httplib.hpp"

namespace social::service {

using nlohmann::json;

namespace {

void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    reply(res, status, json{{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
    }
}

std::optional<std::string> opt_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw ValidationError(std::string(key) + " must be a string");
    return j[key].get<std::string>();
}

class UnknownTurn : public Error {
public:
    using Error::Error;
};

// Runs a handler and maps the error taxonomy onto status codes.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const UnknownTurn& e) {
        fail(res, 404, "unknown_turn", e.what());
    } catch (const NotFoundError& e) {
        fail(res, 404, "unknown_session", e.what());
    } catch (const TurnInFlight& e) {
        fail(res, 409, "turn_in_flight", e.what());
    } catch (const ValidationError& e) {
        fail(res, 400, "validation_failed", e.what());
    } catch (const AmbiguityError& e) {
        fail(res, 400, "validation_failed", e.what());
    } catch (const json::exception& e) {
        fail(res, 400, "validation_failed", e.what());
    } catch (const ProviderUnavailable& e) {
        fail(res, 503, "provider_unavailable", e.what());
    } catch (const RetryableError& e) {
        fail(res, 503, "provider_unavailable", e.what());
    } catch (const std::exception& e) {
        spdlog::error("internal error: {}", e.what());
        fail(res, 500, "internal_error", e.what());
    }
}

}  // namespace

HttpService::HttpService(std::shared_ptr<SessionManager> sessions)
    : sessions_(std::move(sessions)), server_(std::make_unique<httplib::Server>()) {
    // SSE streams each hold a worker for their lifetime.
    server_->new_task_queue = [] { return new httplib::ThreadPool(32); };
    install_routes();
}

HttpService::~HttpService() { stop(); }

void HttpService::install_routes() {
    auto& srv = *server_;
    auto sessions = sessions_;

    srv.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Headers", "Content-Type"},
                             {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
    srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, json{{"status", "ok"}});
    });

    srv.Post("/v1/sessions", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            if (!body.is_object()) throw ValidationError("body must be a JSON object");
            CreateSessionRequest r{opt_string(body, "user_id"), opt_string(body, "face_ref"),
                                   opt_string(body, "display_name")};
            const auto [sid, uid] = sessions->create_session(r);
            reply(res, 201, json{{"session_id", sid}, {"user_id", uid}});
        });
    });

    srv.Post(R"(/v1/sessions/([^/]+)/utterance)", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string sid = req.matches[1];
            const json body = parse_body(req);
            if (!body.is_object() || !body.contains("text") || !body["text"].is_string())
                throw ValidationError("body must be {\"text\": string}");
            const auto result = sessions->utterance(sid, body["text"].get<std::string>());
            reply(res, 200, to_json(result));
        });
    });

    srv.Post(R"(/v1/sessions/([^/]+)/percepts)", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string sid = req.matches[1];
            const auto outcome = sessions->percept(sid, parse_body(req));
            reply(res, 202,
                  json{{"accepted", true},
                       {"outcome", outcome == perception::IngestOutcome::accepted ? "accepted" : "stale_ignored"}});
        });
    });

    srv.Get(R"(/v1/sessions/([^/]+)/state)", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply(res, 200, sessions->state(req.matches[1])); });
    });

    srv.Get(R"(/v1/sessions/([^/]+)/turns)", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string sid = req.matches[1];
            reply(res, 200, json{{"session_id", sid}, {"turns", sessions->turn_ids(sid)}});
        });
    });

    srv.Get(R"(/v1/sessions/([^/]+)/turns/([^/]+)/trace)",
            [sessions](const httplib::Request& req, httplib::Response& res) {
                guarded(res, [&] {
                    const std::string sid = req.matches[1];
                    const std::string tid = req.matches[2];
                    auto ids = sessions->turn_ids(sid);  // 404 for unknown sessions first
                    if (std::find(ids.begin(), ids.end(), tid) == ids.end())
                        throw UnknownTurn("unknown turn '" + tid + "'");
                    reply(res, 200, sessions->trace(sid, tid));
                });
            });

    srv.Get(R"(/v1/sessions/([^/]+)/events)", [this, sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto sub = sessions->subscribe(req.matches[1]);
            res.status = 200;
            res.set_header("Cache-Control", "no-cache");
            res.set_header("X-Accel-Buffering", "no");
            auto sent_hello = std::make_shared<bool>(false);
            res.set_chunked_content_provider(
                "text/event-stream", [this, sub, sent_hello](std::size_t, httplib::DataSink& sink) {
                    if (!*sent_hello) {
                        *sent_hello = true;
                        const std::string hello = ": connected\n\n";
                        return sink.write(hello.data(), hello.size());
                    }
                    while (!stopping_) {
                        if (auto frame = sub->next(std::chrono::milliseconds(250))) {
                            const auto text = frame->encode();
                            return sink.write(text.data(), text.size());
                        }
                        if (sub->closed()) break;
                        if (!sink.is_writable()) return false;
                    }
                    sink.done();
                    return true;
                },
                [sub](bool) { sub->close(); });
        });
    });

    srv.Delete(R"(/v1/sessions/([^/]+))", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { reply(res, 200, sessions->close_session(req.matches[1])); });
    });

    srv.Post("/v1/knowledge/ingest", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const json body = parse_body(req);
            if (!body.is_object() || !body.contains("documents") || !body["documents"].is_array())
                throw ValidationError("body must be {\"documents\": [KnowledgeDoc]}");
            std::vector<memory::KnowledgeDoc> docs;
            for (const auto& d : body["documents"]) docs.push_back(memory::doc_from_json(d));
            json per_doc = json::array();
            std::size_t total = 0;
            for (const auto& d : docs) {
                const auto n = sessions->ingest({d});
                per_doc.push_back({{"doc_id", d.doc_id}, {"chunks", n}});
                total += n;
            }
            reply(res, 200, json{{"chunks_stored", total}, {"documents", per_doc}});
        });
    });

    srv.Get(R"(/v1/users/([^/]+)/memory/segments)", [sessions](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string uid = req.matches[1];
            json segs = json::array();
            for (const auto& c : sessions->segments(uid)) segs.push_back(memory::to_json(c, false));
            reply(res, 200, json{{"user_id", uid}, {"segments", segs}});
        });
    });
}

int HttpService::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
    } else {
        port_ = server_->bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    return port_;
}

void HttpService::run() {
    if (port_ < 0) throw ConfigError("service is not bound");
    spdlog::info("listening on port {}", port_);
    server_->listen_after_bind();
}

void HttpService::start() {
    if (port_ < 0) throw ConfigError("service is not bound");
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void HttpService::stop() {
    stopping_ = true;
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace social::service
