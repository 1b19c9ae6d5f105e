#include "social/replay.hpp"

#include <deque>
#include <fstream>
#include <map>
#include <set>

#include "social/config.hpp"

namespace social::replay {

using nlohmann::json;

namespace {

// Delegates to the script of the turn being replayed.
class TurnScriptProvider final : public llm::LlmProvider {
public:
    void set(std::shared_ptr<llm::ScriptedProvider> p) {
        std::lock_guard lock(mu_);
        current_ = std::move(p);
    }
    std::string complete(const llm::CompletionRequest& request) override {
        std::shared_ptr<llm::ScriptedProvider> p;
        {
            std::lock_guard lock(mu_);
            p = current_;
        }
        if (!p) throw ProviderUnavailable("no recorded completion");
        return p->complete(request);
    }

private:
    std::mutex mu_;
    std::shared_ptr<llm::ScriptedProvider> current_;
};

struct RecordedObservation {
    json observation;
    json error;
};

// Recorded observations keyed by tool and canonical input.
struct ObservationTable {
    std::mutex mu;
    std::map<std::pair<std::string, std::string>, std::deque<RecordedObservation>> entries;
};

tools::Executor recorded_executor(const std::string& tool, std::shared_ptr<ObservationTable> table) {
    return [tool, table](const json& input) -> tools::Observation {
        RecordedObservation rec;
        {
            std::lock_guard lock(table->mu);
            auto it = table->entries.find({tool, tools::canonical_input(input)});
            if (it == table->entries.end() || it->second.empty())
                throw std::runtime_error("no recorded observation for this input");
            rec = std::move(it->second.front());
            it->second.pop_front();
        }
        const std::string text = rec.observation.value("text", std::string());
        if (rec.error.is_string() && rec.error.get<std::string>() == "failed") {
            const std::string prefix = "tool '" + tool + "' failed: ";
            throw std::runtime_error(text.rfind(prefix, 0) == 0 ? text.substr(prefix.size()) : text);
        }
        tools::Observation obs;
        obs.text = text;
        obs.sources = rec.observation.value("sources", std::vector<std::string>{});
        return obs;
    };
}

json comparable_response(const json& r) {
    json trace = json::array();
    for (const auto& t : r.value("tool_trace", json::array())) {
        trace.push_back({{"tool", t.value("tool", "")},
                         {"input", t.value("input", json::object())},
                         {"observation", t.contains("observation") ? t["observation"].value("text", "") : ""},
                         {"error", t.value("error", json())}});
    }
    return {{"answer", r.value("answer", "")},
            {"emotion", r.value("emotion", "")},
            {"base_intensity", r.value("base_intensity", 0.0)},
            {"intensity", r.value("intensity", 0.0)},
            {"cause", r.value("cause", "")},
            {"category", r.value("category", "")},
            {"completions", r.value("completions", 0)},
            {"iteration_limit_reached", r.value("iteration_limit_reached", false)},
            {"tool_trace", trace}};
}

std::string describe_diff(const json& expected, const json& actual) {
    for (const auto& [k, v] : expected.items()) {
        if (!actual.contains(k) || actual[k] != v) {
            return k + ": recorded " + v.dump() + ", replayed " + (actual.contains(k) ? actual[k].dump() : "missing");
        }
    }
    return "outputs differ";
}

struct TurnRecording {
    std::vector<std::string> contextualize;
    std::vector<std::string> completions;
    std::vector<std::pair<std::string, RecordedObservation>> observations;  // (tool, observation)
    std::vector<std::string> input_keys;  // canonical tool inputs, parallel to observations
    std::optional<json> response;
    std::optional<json> affect_state;
    std::optional<json> behavior;
    bool failed = false;
};

}  // namespace

std::vector<json> read_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open transcript " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    if (out.empty() || out.front().value("type", "") != "session")
        throw ValidationError(path.string() + ": first record must be the session header");
    return out;
}

Report replay(const std::vector<json>& records) {
    if (records.empty() || records.front().value("type", "") != "session")
        throw ValidationError("transcript must start with a session header");
    const json& header = records.front();
    const json& hc = header.at("config");

    // Collect per-turn recordings.
    std::map<std::string, TurnRecording> turns;
    for (const auto& r : records) {
        const auto type = r.value("type", "");
        if (type == "turn_failed") {
            turns[r.at("turn_id").get<std::string>()].failed = true;
            continue;
        }
        if (type != "event") continue;
        auto& t = turns[r.at("turn_id").get<std::string>()];
        const auto stage = r.at("stage").get<std::string>();
        const auto& p = r.at("payload");
        if (stage == "contextualized") {
            if (p.value("used_llm", false) && p.contains("llm_output") && p["llm_output"].is_string())
                t.contextualize.push_back(p["llm_output"].get<std::string>());
        } else if (stage == "tool_called") {
            t.completions.push_back(p.at("completion").get<std::string>());
            RecordedObservation obs{p.value("observation", json::object()), p.value("error", json())};
            t.observations.emplace_back(p.value("tool", ""), obs);
            t.input_keys.push_back(tools::canonical_input(p.value("input", json::object())));
        } else if (stage == "completed") {
            t.completions.push_back(p.at("completion").get<std::string>());
            t.response = p.at("response");
        } else if (stage == "affect_updated") {
            t.affect_state = p.at("state");
        } else if (stage == "behavior_emitted") {
            t.behavior = p.at("behavior_script");
        }
    }

    // Runtime mirroring the recorded configuration.
    Config cfg;
    cfg.agent.affect_enabled = hc.value("affect_enabled", true);
    cfg.agent.max_iterations = hc.value("max_iterations", cfg.agent.max_iterations);
    cfg.agent.temperature = hc.value("temperature", cfg.agent.temperature);
    if (hc.contains("affect")) cfg.affect = affect::affect_config_from_json(hc["affect"]);
    if (hc.contains("personality")) cfg.personality = affect::personality_from_json(hc["personality"]);
    if (hc.contains("gestures")) cfg.gestures = behavior::GestureMap::from_json(hc["gestures"]);
    cfg.persona.name = hc.value("persona_name", cfg.persona.name);
    cfg.persona.history_window = hc.value("history_window", cfg.persona.history_window);
    cfg.memory.persona_name = cfg.persona.name;
    cfg.memory.segment_window = hc.value("segment_window", cfg.memory.segment_window);
    cfg.memory.segment_overlap = hc.value("segment_overlap", cfg.memory.segment_overlap);
    cfg.percept_staleness_s = hc.value("percept_staleness_s", cfg.percept_staleness_s);

    auto table = std::make_shared<ObservationTable>();
    auto registry = std::make_shared<tools::ToolRegistry>(hc.value("observation_budget", tools::kDefaultObservationBudget));
    const auto recorded_tools = hc.value("tools", std::vector<std::string>{});
    for (const auto& spec : tools::standard_specs()) {
        if (std::find(recorded_tools.begin(), recorded_tools.end(), spec.name) == recorded_tools.end()) continue;
        registry->register_tool(spec, recorded_executor(spec.name, table));
    }

    auto clock = std::make_shared<ManualClock>(header.at("created_at").get<double>());
    auto provider = std::make_shared<TurnScriptProvider>();
    Runtime rt = build_runtime(cfg, clock, provider, registry);
    auto& orch = *rt.orchestrator;

    dialogue::SessionState session =
        orch.new_session(header.at("session_id").get<std::string>(), header.at("user_id").get<std::string>());

    Report report;
    std::optional<dialogue::AgentResponse> pending;
    std::string pending_text;
    std::string pending_turn;

    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        const auto type = r.value("type", "");
        if (type == "percept") {
            clock->set(from_epoch_seconds(r.at("timestamp").get<double>()));
            const auto ev = perception::event_from_json(r.at("event"), clock->now());
            if (session.percepts.ingest(ev) == perception::IngestOutcome::accepted &&
                ev.kind == perception::PerceptKind::user_leave) {
                orch.flush_episode(session);
            }
        } else if (type == "closed") {
            clock->set(from_epoch_seconds(r.at("timestamp").get<double>()));
            orch.close_session(session);
        } else if (type == "event") {
            const auto stage = r.at("stage").get<std::string>();
            const auto turn_id = r.at("turn_id").get<std::string>();
            auto& t = turns[turn_id];
            if (t.failed) continue;
            if (stage == "received") {
                clock->set(from_epoch_seconds(r.at("timestamp").get<double>()));
                std::vector<llm::ScriptedRule> rules;
                for (const auto& c : t.contextualize) {
                    llm::ScriptedRule rule;
                    rule.purpose = "contextualize";
                    rule.response = c;
                    rule.consume_once = true;
                    rules.push_back(rule);
                }
                for (const auto& c : t.completions) {
                    llm::ScriptedRule rule;
                    rule.purpose = "orchestration";
                    rule.response = c;
                    rule.consume_once = true;
                    rules.push_back(rule);
                }
                provider->set(std::make_shared<llm::ScriptedProvider>(std::move(rules)));
                {
                    std::lock_guard lock(table->mu);
                    table->entries.clear();
                    for (std::size_t k = 0; k < t.observations.size(); ++k)
                        table->entries[{t.observations[k].first, t.input_keys[k]}].push_back(t.observations[k].second);
                }
                pending_text = r.at("payload").value("text", "");
                pending_turn = turn_id;
                try {
                    pending = orch.run_turn(session, pending_text, turn_id, nullptr);
                } catch (const std::exception& e) {
                    report.divergences.push_back(turn_id + ": replay failed: " + e.what());
                    pending.reset();
                }
            } else if (stage == "affect_updated" && pending && pending_turn == turn_id) {
                clock->set(from_epoch_seconds(r.at("timestamp").get<double>()));
                std::optional<json> replay_state;
                const dialogue::EventSink sink = [&](const dialogue::TurnEvent& e) {
                    if (e.stage == dialogue::TurnStage::affect_updated) replay_state = e.payload.at("state");
                };
                const auto script = orch.post_turn(session, pending_text, *pending, sink);
                ++report.turns;
                const json resp = dialogue::to_json(*pending);
                const json bs = behavior::to_json(script);
                report.outputs.push_back({{"turn_id", turn_id}, {"response", resp}, {"behavior_script", bs}});

                if (t.response) {
                    const auto want = comparable_response(*t.response);
                    const auto got = comparable_response(resp);
                    if (want != got) report.divergences.push_back(turn_id + ": response " + describe_diff(want, got));
                } else {
                    report.divergences.push_back(turn_id + ": no recorded response");
                }
                if (t.affect_state && replay_state && *t.affect_state != *replay_state)
                    report.divergences.push_back(turn_id + ": affect state " + describe_diff(*t.affect_state, *replay_state));
                if (t.behavior && *t.behavior != bs)
                    report.divergences.push_back(turn_id + ": behavior script " + describe_diff(*t.behavior, bs));
                pending.reset();
            }
        }
    }
    if (pending) report.divergences.push_back(pending_turn + ": recording ends mid-turn");
    return report;
}

Report replay_file(const std::filesystem::path& path) { return replay(read_log(path)); }

}  // namespace social::replay
