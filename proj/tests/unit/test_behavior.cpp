#include "doctest.h"
#include "social/behavior.hpp"

using namespace social;
using namespace social::behavior;
using dialogue::InteractionCategory;
using nlohmann::json;

TEST_SUITE("behavior") {

TEST_CASE("default gesture map") {
    GestureMap g;
    CHECK(g[InteractionCategory::greeting] == GestureTag::greet);
    CHECK(g[InteractionCategory::insult] == GestureTag::offended);
    CHECK(g[InteractionCategory::compliment] == GestureTag::appreciative);
    CHECK(g[InteractionCategory::question] == GestureTag::explain);
    CHECK(g[InteractionCategory::statement] == GestureTag::explain);
    CHECK(g[InteractionCategory::farewell] == GestureTag::farewell);
    CHECK(g[InteractionCategory::other] == GestureTag::idle);
    const auto back = GestureMap::from_json(g.to_json());
    for (auto c : dialogue::kAllCategories) CHECK(back[c] == g[c]);
}

TEST_CASE("gesture map overrides") {
    const auto g = GestureMap::from_json({{"question", "affirm"}});
    CHECK(g[InteractionCategory::question] == GestureTag::affirm);
    CHECK(g[InteractionCategory::greeting] == GestureTag::greet);
    CHECK_THROWS_AS(GestureMap::from_json({{"question", "dance"}}), ConfigError);
    CHECK_THROWS_AS(GestureMap::from_json({{"chitchat", "idle"}}), ConfigError);
}

TEST_CASE("realize") {
    dialogue::AgentResponse r;
    r.turn_id = "turn-0001";
    r.answer = "Hello!";
    r.emotion = affect::EmotionCategory::neutral;
    r.intensity = 0;
    r.category = InteractionCategory::greeting;
    const auto s = realize(r, {}, GestureMap{}, from_epoch_seconds(9));
    CHECK(s.gesture == GestureTag::greet);
    CHECK(s.gaze.mode == GazeMode::idle);
    CHECK_FALSE(s.gaze.target.has_value());
    CHECK(s.facial_expression.emotion == affect::EmotionCategory::neutral);
    CHECK(s.facial_expression.intensity == 0);
    const auto j = to_json(s);
    CHECK(j["utterance"] == "Hello!");
    CHECK(j["gaze"]["target"].is_null());

    perception::PerceptSnapshot p;
    p.location = perception::Point3{1, 2, 3};
    const auto s2 = realize(r, p, GestureMap{}, from_epoch_seconds(9));
    CHECK(s2.gaze.mode == GazeMode::look_at_user);
    CHECK(s2.gaze.target == perception::Point3{1, 2, 3});
}

TEST_CASE("totality over the enumeration cross product") {
    std::size_t n = 0;
    for (auto cat : dialogue::kAllCategories) {
        for (auto emo : affect::kAllEmotions) {
            for (double intensity : {0.0, 0.5, 1.0}) {
                for (int loc = 0; loc < 2; ++loc) {
                    for (int emo_seen = 0; emo_seen < 2; ++emo_seen) {
                        dialogue::AgentResponse r;
                        r.category = cat;
                        r.emotion = emo;
                        r.intensity = intensity;
                        perception::PerceptSnapshot p;
                        if (loc) p.location = perception::Point3{0, 0, 1};
                        if (emo_seen) p.emotion = perception::DetectedEmotion{emo, 0.5, {}};
                        const auto s = realize(r, p, GestureMap{}, {});
                        CHECK(parse_gesture(to_string(s.gesture)).has_value());
                        CHECK((s.gaze.mode == GazeMode::look_at_user) == s.gaze.target.has_value());
                        CHECK(s.facial_expression.intensity >= 0.0);
                        CHECK(s.facial_expression.intensity <= 1.0);
                        ++n;
                    }
                }
            }
        }
    }
    CHECK(n == 7 * 7 * 3 * 2 * 2);
}

}
