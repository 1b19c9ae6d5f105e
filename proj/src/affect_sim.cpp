#include "social/affect_sim.hpp"

#include <algorithm>
#include <cmath>

namespace social::affect {

using nlohmann::json;

Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("scenario must be a JSON object");
    Scenario s;
    try {
        s.duration_s = j.value("duration_s", s.duration_s);
        s.dt = j.value("dt", s.dt);
        if (j.contains("personality")) s.personality = personality_from_json(j["personality"]);
        if (j.contains("affect")) s.config = affect_config_from_json(j["affect"]);
        if (j.contains("initial_mood")) s.initial_mood = pad_from_json(j["initial_mood"]);
        for (const auto& st : j.value("stimuli", json::array())) {
            Stimulus x;
            x.t = st.at("t").get<double>();
            x.emotion = emotion_from_string(st.at("emotion").get<std::string>());
            x.intensity = st.at("intensity").get<double>();
            if (st.contains("cause")) {
                const auto c = parse_cause(st["cause"].get<std::string>());
                if (!c) throw ValidationError("unknown cause '" + st["cause"].get<std::string>() + "'");
                x.cause = *c;
            }
            s.stimuli.push_back(x);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("scenario: ") + e.what());
    }
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ValidationError("scenario: dt must be positive");
    if (!(s.duration_s >= 0.0) || !std::isfinite(s.duration_s)) throw ValidationError("scenario: duration_s must be >= 0");
    if (s.duration_s / s.dt > 1e7) throw ValidationError("scenario: too many steps");
    for (const auto& x : s.stimuli) {
        if (x.t < 0.0 || x.t > s.duration_s) throw ValidationError("scenario: stimulus time outside [0, duration_s]");
    }
    std::stable_sort(s.stimuli.begin(), s.stimuli.end(), [](const Stimulus& a, const Stimulus& b) { return a.t < b.t; });
    return s;
}

std::vector<SimRow> simulate(const Scenario& s) {
    const Timestamp t0 = from_epoch_seconds(0.0);
    AffectState state = AffectState::initial(s.personality, s.config, t0);
    if (s.initial_mood) state.mood.current = s.initial_mood->clamped();

    std::vector<SimRow> rows;
    std::size_t next = 0;
    const auto steps = static_cast<std::size_t>(std::floor(s.duration_s / s.dt + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) * s.dt;
        while (next < s.stimuli.size() && s.stimuli[next].t <= t + 1e-12) {
            const auto& st = s.stimuli[next++];
            const Timestamp at = from_epoch_seconds(st.t);
            state.advance_to(at, s.config);
            if (st.emotion != EmotionCategory::neutral)
                state.active.push_back(appraise(st.emotion, st.intensity, st.cause, at, s.config));
        }
        state.advance_to(from_epoch_seconds(t), s.config);
        SimRow row;
        row.t = t;
        row.mood = state.mood.current;
        if (const auto* d = state.dominant()) {
            row.active = d->category;
            row.intensity = d->intensity;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_csv(std::ostream& out, const std::vector<SimRow>& rows) {
    out << "t,P,A,D,active_emotion,intensity\n";
    for (const auto& r : rows) {
        out << format_fixed(r.t, 6) << ',' << format_fixed(r.mood.pleasure, 6) << ','
            << format_fixed(r.mood.arousal, 6) << ',' << format_fixed(r.mood.dominance, 6) << ','
            << (r.active ? std::string(to_string(*r.active)) : std::string("none")) << ','
            << format_fixed(r.intensity, 6) << '\n';
    }
}

}  // namespace social::affect
