#pragma once

// Shared helpers for unit and acceptance tests.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <random>

#include "json.hpp"
#include "social/config.hpp"
#include "social/directive.hpp"
#include "social/prompt.hpp"
#include "social/httplib.hpp"
#include "social/server.hpp"
#include "social/session.hpp"

namespace social::testing {

std::filesystem::path fixture_dir();
std::filesystem::path golden_dir();
std::filesystem::path schema_dir();
std::filesystem::path config_dir();
std::filesystem::path cli_path();

std::string slurp(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& text);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// The example configuration with the test rule script and fixture tools.
// `data_dir` empty keeps everything in memory.
nlohmann::json scripted_config_json(const std::filesystem::path& data_dir = {});
Config scripted_config(const std::filesystem::path& data_dir = {});

// scripted_config_json written to `dir`/config.json with every path absolute,
// for CLI children.
std::filesystem::path write_scripted_config(const std::filesystem::path& dir, const std::filesystem::path& data_dir);

std::shared_ptr<Runtime> make_runtime(const Config& cfg, std::shared_ptr<ManualClock> clock = nullptr);

// Validates `instance` against schemas/<name>.schema.json. Supports the
// subset the published schemas use: type, properties, required,
// additionalProperties (bool), items, enum, const, minimum, maximum,
// minItems, maxItems, minLength, anyOf and local "$ref": "#/$defs/...". Empty result = valid.
std::vector<std::string> schema_errors(const nlohmann::json& instance, const std::string& schema_name);
// Keywords in the schema the validator above does not understand.
std::vector<std::string> unsupported_schema_keywords(const std::string& schema_name);

// Service on an ephemeral loopback port.
class TestServer {
public:
    explicit TestServer(const Config& cfg, std::shared_ptr<ManualClock> clock = nullptr);
    ~TestServer();

    int port() const { return http_->port(); }
    httplib::Client client() const;
    service::SessionManager& sessions() { return *sessions_; }
    Runtime& runtime() { return *runtime_; }

    // Convenience wrappers returning {status, parsed body (null if not JSON)}.
    std::pair<int, nlohmann::json> post(const std::string& path, const nlohmann::json& body) const;
    std::pair<int, nlohmann::json> get(const std::string& path) const;
    std::pair<int, nlohmann::json> del(const std::string& path) const;

private:
    std::shared_ptr<Runtime> runtime_;
    std::shared_ptr<service::SessionManager> sessions_;
    std::unique_ptr<service::HttpService> http_;
};

// Bare httplib server on an ephemeral port for provider stubs. Register
// handlers on server() before start().
class StubHttp {
public:
    StubHttp() = default;
    ~StubHttp();
    httplib::Server& server() { return server_; }
    void start();
    int port() const { return port_; }
    std::string url(const std::string& path) const;

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = -1;
};

// The three fixture contexts behind tests/golden/prompt_<name>.txt.
std::vector<std::pair<std::string, dialogue::TurnContext>> golden_prompt_contexts();
std::filesystem::path golden_prompt_path(const std::string& name);

// A random directive inside the grammar's round-trip domain: single-line
// thoughts, answers whose lines never start with a tag, lowercase tool names.
dialogue::AgentDirective random_directive(std::mt19937_64& rng);
// Arbitrary bytes, biased towards tag-like fragments.
std::string random_bytes(std::mt19937_64& rng, std::size_t max_len);

// Records a scripted session (greeting, weather tool, compliment, insult,
// percepts, six turns so a segment is stored, close) with a manual clock
// under `data_dir` and returns the session log path.
std::filesystem::path record_demo_session(const std::filesystem::path& data_dir);
std::filesystem::path golden_transcript_path();

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the built CLI to completion.
CliResult run_cli(const std::vector<std::string>& args, const std::string& stdin_text = {});

// A CLI child left running (serve).
class ChildProcess {
public:
    ChildProcess(const std::vector<std::string>& args, const std::filesystem::path& stdout_file);
    ~ChildProcess();
    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    // Polls the stdout file for "listening on host:port"; returns the port or -1.
    int wait_for_port(double timeout_s) const;
    void signal(int sig);
    int wait();  // exit status, or 128+signal

private:
    int pid_ = -1;
    std::filesystem::path out_;
    bool reaped_ = false;
};

// Reads SSE frames from a raw event-stream body.
struct ParsedFrame {
    std::uint64_t id = 0;
    std::string event;
    nlohmann::json data;
};
std::vector<ParsedFrame> parse_sse(const std::string& body);

}  // namespace social::testing
