// social-agent: operator entry points.
//
// Exit codes: 0 ok, 1 usage, 2 config, 3 divergence or provider failure.

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "social/affect_sim.hpp"
#include "social/config.hpp"
#include "social/replay.hpp"
#include "social/server.hpp"
#include "social/session.hpp"

namespace {

using nlohmann::json;
using namespace social;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kConfig = 2;
constexpr int kFailure = 3;

Config load_config(const std::string& path) {
    Config c = path.empty() ? Config{} : Config::load(path);
    c.apply_process_env();
    return c;
}

std::vector<memory::KnowledgeDoc> read_documents(const std::filesystem::path& file) {
    const std::string text = read_text_file(file);
    if (file.extension() == ".json") {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ValidationError(file.string() + ": " + e.what());
        }
        std::vector<memory::KnowledgeDoc> docs;
        const json& list = j.is_object() && j.contains("documents") ? j["documents"] : j;
        if (list.is_array()) {
            for (const auto& d : list) docs.push_back(memory::doc_from_json(d));
        } else {
            docs.push_back(memory::doc_from_json(list));
        }
        return docs;
    }
    memory::KnowledgeDoc doc;
    doc.doc_id = file.stem().string();
    doc.source = file.string();
    doc.text = text;
    return {doc};
}

std::string plural(std::size_t n, const char* word) {
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

int cmd_serve(const std::string& config_path, std::optional<int> port, std::optional<std::string> host) {
    // Block termination signals before any thread starts; one thread waits for them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    Config cfg = load_config(config_path);
    if (port) cfg.server.port = *port;
    if (host) cfg.server.host = *host;
    auto rt = std::make_shared<Runtime>(build_runtime(cfg));
    auto sessions = std::make_shared<service::SessionManager>(rt);
    service::HttpService http(sessions);
    const int bound = http.bind(rt->config.server.host, rt->config.server.port);
    std::cout << "listening on " << rt->config.server.host << ":" << bound << std::endl;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        spdlog::info("signal {} received, shutting down", sig);
        http.stop();
    });
    http.run();
    sessions->shutdown();
    if (waiter.joinable()) {
        // run() may also end without a signal; wake the waiter.
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
    }
    return kOk;
}

int cmd_ingest(const std::string& config_path, const std::vector<std::string>& files) {
    Config cfg = load_config(config_path);
    Runtime rt = build_runtime(cfg);
    for (const auto& f : files) {
        std::vector<memory::KnowledgeDoc> docs;
        try {
            docs = read_documents(f);
        } catch (const ConfigError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kUsage;
        }
        std::size_t n = 0;
        for (const auto& d : docs) n += rt.memory->ingest(d);
        std::cout << f << ": " << plural(n, "chunk") << std::endl;
    }
    rt.store->checkpoint();
    return kOk;
}

int cmd_chat(const std::string& config_path, const std::optional<std::string>& user,
             const std::optional<std::string>& scripted) {
    Config cfg = load_config(config_path);
    if (scripted) {
        cfg.llm.provider = "scripted";
        cfg.llm.script = *scripted;
    }
    auto rt = std::make_shared<Runtime>(build_runtime(cfg));
    service::SessionManager sessions(rt);
    service::CreateSessionRequest req;
    req.user_id = user;
    const auto [sid, uid] = sessions.create_session(req);
    std::cout << "session " << sid << " (user " << uid << "). Type /quit to leave.\n";

    bool provider_failed = false;
    std::string line;
    while (true) {
        std::cout << "> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        const auto text = trim(line);
        if (text.empty()) continue;
        if (text == "/quit" || text == "/exit") break;
        try {
            const auto r = sessions.utterance(sid, text);
            const auto& resp = r.response;
            std::cout << rt->config.persona.name << ": " << resp.answer << "\n";
            std::cout << "  emotion: " << affect::to_string(resp.emotion) << " (" << format_fixed(resp.intensity, 2)
                      << ")  gesture: " << behavior::to_string(r.script.gesture)
                      << "  tools: " << resp.tool_trace.size() << "\n";
            auto show = [](const char* label, const std::vector<memory::RetrievedPassage>& ps) {
                for (std::size_t i = 0; i < ps.size() && i < 3; ++i) {
                    auto snippet = std::string(utf8_prefix(ps[i].chunk.text, 80));
                    for (auto& c : snippet) {
                        if (c == '\n') c = ' ';
                    }
                    std::cout << "  " << label << " #" << ps[i].rank << " " << format_fixed(ps[i].score, 3) << " "
                              << ps[i].chunk.chunk_id << ": " << snippet << "\n";
                }
            };
            show("knowledge", resp.knowledge);
            show("memory", resp.memories);
        } catch (const ProviderUnavailable& e) {
            provider_failed = true;
            std::cout << "  [provider unavailable: " << e.what() << "]\n";
        } catch (const Error& e) {
            std::cout << "  [error: " << e.what() << "]\n";
        }
    }
    sessions.close_session(sid);
    sessions.shutdown();
    return provider_failed ? kFailure : kOk;
}

int cmd_replay(const std::string& transcript) {
    const auto report = replay::replay_file(transcript);
    for (const auto& out : report.outputs) {
        std::cout << out["turn_id"].get<std::string>() << ": " << out["response"]["answer"].get<std::string>() << "\n";
    }
    for (const auto& d : report.divergences) std::cout << "DIVERGENCE " << d << "\n";
    std::cout << (report.ok() ? "replay ok" : "replay diverged") << " (" << plural(report.turns, "turn") << ")\n";
    return report.ok() ? kOk : kFailure;
}

int cmd_affect_sim(const std::string& scenario_path, const std::string& out_path) {
    json j;
    try {
        j = json::parse(read_text_file(scenario_path));
    } catch (const json::parse_error& e) {
        throw ConfigError(scenario_path + ": " + e.what());
    }
    affect::Scenario scenario;
    try {
        scenario = affect::scenario_from_json(j);
    } catch (const ValidationError& e) {
        throw ConfigError(e.what());
    }
    const auto rows = affect::simulate(scenario);
    if (out_path.empty() || out_path == "-") {
        affect::write_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("cannot write " + out_path);
        affect::write_csv(out, rows);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social agent runtime: session service, knowledge ingestion, chat, replay, affect simulation"};
    app.require_subcommand(1);
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

    std::string config_path;
    std::optional<int> port;
    std::optional<std::string> host;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    serve->add_option("--port", port, "Override the listening port (0 = any)");
    serve->add_option("--host", host, "Override the listening address");

    std::vector<std::string> files;
    auto* ingest = app.add_subcommand("ingest", "Chunk, embed and store knowledge documents");
    ingest->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    ingest->add_option("files", files, "Text or JSON documents")->required()->check(CLI::ExistingFile);

    std::optional<std::string> user;
    std::optional<std::string> scripted;
    auto* chat = app.add_subcommand("chat", "Interactive terminal conversation");
    chat->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    chat->add_option("--user", user, "User id");
    chat->add_option("--scripted", scripted, "Scripted rules file (overrides the configured provider)")
        ->check(CLI::ExistingFile);

    std::string transcript;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a recorded session log and compare outputs");
    replay_cmd->add_option("transcript", transcript, "Session log (.jsonl)")->required()->check(CLI::ExistingFile);

    std::string scenario;
    std::string out;
    auto* sim = app.add_subcommand("affect-sim", "Step the affect engine over a stimulus timeline");
    sim->add_option("--scenario", scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out, "CSV output path ('-' for stdout)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("social-agent"));
    spdlog::set_level(spdlog::level::from_str(log_level));
    try {
        if (*serve) return cmd_serve(config_path, port, host);
        if (*ingest) return cmd_ingest(config_path, files);
        if (*chat) return cmd_chat(config_path, user, scripted);
        if (*replay_cmd) return cmd_replay(transcript);
        if (*sim) return cmd_affect_sim(scenario, out);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfig;
    } catch (const ProviderUnavailable& e) {
        std::cerr << "provider unavailable: " << e.what() << "\n";
        return kFailure;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
