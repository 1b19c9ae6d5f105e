#pragma once

// Offline affect simulation over a scripted stimulus timeline.
//
// Scenario file:
//   {"duration_s": 600, "dt": 1.0,
//    "personality": {...}, "affect": {...overrides},
//    "initial_mood": {"P": .., "A": .., "D": ..},      (optional, default mood otherwise)
//    "stimuli": [{"t": 10, "emotion": "happiness", "intensity": 0.8, "cause": "user"}]}

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "social/affect.hpp"

namespace social::affect {

struct Stimulus {
    double t = 0.0;
    EmotionCategory emotion = EmotionCategory::neutral;
    double intensity = 0.0;
    Cause cause = Cause::none;
};

struct Scenario {
    double duration_s = 600.0;
    double dt = 1.0;
    PersonalityProfile personality;
    AffectConfig config = AffectConfig::defaults();
    std::optional<PadVector> initial_mood;
    std::vector<Stimulus> stimuli;  // sorted by t
};

// Throws ValidationError.
Scenario scenario_from_json(const nlohmann::json& j);

struct SimRow {
    double t = 0.0;
    PadVector mood;
    std::optional<EmotionCategory> active;  // dominant live emotion
    double intensity = 0.0;
};

// One row at t = 0, dt, 2dt, ... up to duration. Stimuli with t <= row time
// are appraised at their own timestamps before the row is sampled.
std::vector<SimRow> simulate(const Scenario& s);

// Header "t,P,A,D,active_emotion,intensity"; numbers with six decimals.
void write_csv(std::ostream& out, const std::vector<SimRow>& rows);

}  // namespace social::affect
