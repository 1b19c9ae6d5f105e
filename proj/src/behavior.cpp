#include "social/behavior.hpp"

namespace social::behavior {

using nlohmann::json;

namespace {
constexpr std::array<std::string_view, 8> kGestureNames = {
    "greet", "offended", "appreciative", "explain", "affirm", "negate", "farewell", "idle"};
}

std::string_view to_string(GestureTag g) { return kGestureNames[static_cast<std::size_t>(g)]; }

std::optional<GestureTag> parse_gesture(std::string_view s) {
    for (std::size_t i = 0; i < kGestureNames.size(); ++i) {
        if (s == kGestureNames[i]) return static_cast<GestureTag>(i);
    }
    return std::nullopt;
}

std::string_view to_string(GazeMode g) {
    switch (g) {
        case GazeMode::look_at_user: return "look_at_user";
        case GazeMode::look_away: return "look_away";
        case GazeMode::idle: return "idle";
    }
    return "idle";
}

json to_json(const BehaviorScript& s) {
    json gaze{{"mode", to_string(s.gaze.mode)}};
    gaze["target"] = s.gaze.target ? perception::to_json(*s.gaze.target) : json(nullptr);
    return {{"turn_id", s.turn_id},
            {"utterance", s.utterance},
            {"facial_expression",
             {{"emotion", affect::to_string(s.facial_expression.emotion)},
              {"intensity", s.facial_expression.intensity}}},
            {"gesture", to_string(s.gesture)},
            {"gaze", gaze},
            {"issued_at", to_epoch_seconds(s.issued_at)}};
}

GestureMap::GestureMap()
    : table_{GestureTag::greet,   GestureTag::offended, GestureTag::appreciative, GestureTag::explain,
             GestureTag::explain, GestureTag::farewell, GestureTag::idle} {}

GestureMap GestureMap::from_json(const json& j) {
    GestureMap m;
    if (j.is_null()) return m;
    for (const auto& [category, gesture] : j.items()) {
        const auto c = dialogue::parse_category(category);
        if (!c) throw ConfigError("gesture map: unknown interaction category '" + category + "'");
        const auto g = parse_gesture(gesture.get<std::string>());
        if (!g) throw ConfigError("gesture map: unknown gesture '" + gesture.get<std::string>() + "'");
        m.table_[static_cast<std::size_t>(*c)] = *g;
    }
    return m;
}

json GestureMap::to_json() const {
    json j = json::object();
    for (auto c : dialogue::kAllCategories) j[std::string(dialogue::to_string(c))] = behavior::to_string((*this)[c]);
    return j;
}

BehaviorScript realize(const dialogue::AgentResponse& response, const perception::PerceptSnapshot& percepts,
                       const GestureMap& gestures, Timestamp now) {
    BehaviorScript s;
    s.turn_id = response.turn_id;
    s.utterance = response.answer;
    s.facial_expression = {response.emotion, std::clamp(response.intensity, 0.0, 1.0)};
    s.gesture = gestures[response.category];
    if (percepts.location) {
        s.gaze = {GazeMode::look_at_user, percepts.location};
    } else {
        s.gaze = {GazeMode::idle, std::nullopt};
    }
    s.issued_at = now;
    return s;
}

}  // namespace social::behavior
