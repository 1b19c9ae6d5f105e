#pragma once

// Outbound contract toward a robot or avatar control stack. No actuation
// happens here; scripts are logged and streamed.

#include <array>
#include <optional>
#include <string>

#include "json.hpp"
#include "social/directive.hpp"
#include "social/perception.hpp"

namespace social::behavior {

enum class GestureTag { greet, offended, appreciative, explain, affirm, negate, farewell, idle };

std::string_view to_string(GestureTag g);
std::optional<GestureTag> parse_gesture(std::string_view s);

enum class GazeMode { look_at_user, look_away, idle };

std::string_view to_string(GazeMode g);

struct FacialExpression {
    affect::EmotionCategory emotion = affect::EmotionCategory::neutral;
    double intensity = 0.0;
};

struct Gaze {
    GazeMode mode = GazeMode::idle;
    std::optional<perception::Point3> target;  // present iff mode == look_at_user
};

struct BehaviorScript {
    std::string turn_id;
    std::string utterance;
    FacialExpression facial_expression;
    GestureTag gesture = GestureTag::idle;
    Gaze gaze;
    Timestamp issued_at{};
};

nlohmann::json to_json(const BehaviorScript& s);

// Interaction category -> gesture.
class GestureMap {
public:
    GestureMap();  // greeting->greet, insult->offended, compliment->appreciative,
                   // question/statement->explain, farewell->farewell, other->idle
    static GestureMap from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    GestureTag operator[](dialogue::InteractionCategory c) const {
        return table_[static_cast<std::size_t>(c)];
    }

private:
    std::array<GestureTag, 7> table_;
};

BehaviorScript realize(const dialogue::AgentResponse& response, const perception::PerceptSnapshot& percepts,
                       const GestureMap& gestures, Timestamp now);

}  // namespace social::behavior
