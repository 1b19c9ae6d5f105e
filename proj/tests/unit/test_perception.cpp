#include "doctest.h"
#include "social/perception.hpp"
#include "test_support.hpp"

using namespace social;
using namespace social::perception;
using nlohmann::json;

namespace {

const Timestamp kNow = from_epoch_seconds(5000);

PerceptEvent emotion_at(double t, affect::EmotionCategory c = affect::EmotionCategory::happiness) {
    PerceptEvent e;
    e.kind = PerceptKind::user_emotion;
    e.emotion = c;
    e.confidence = 0.9;
    e.timestamp = from_epoch_seconds(t);
    return e;
}

}  // namespace

TEST_SUITE("perception") {

TEST_CASE("user registry") {
    UserRegistry reg;
    const auto a = reg.identify_or_register(std::string("face-1"), std::nullopt, kNow);
    CHECK(reg.size() == 1);
    CHECK(reg.identify_or_register(std::string("face-1"), std::nullopt, kNow) == a);
    CHECK(reg.size() == 1);
    const auto b = reg.identify_or_register(std::nullopt, std::string("bob"), kNow, std::string("Bob"));
    CHECK(b == "bob");
    CHECK(reg.get("bob")->display_name == std::optional<std::string>("Bob"));
    CHECK(reg.identify_or_register(std::nullopt, std::string("bob"), kNow) == "bob");
    CHECK_THROWS_AS(reg.identify_or_register(std::string("face-1"), std::string("bob"), kNow), AmbiguityError);
    const auto c = reg.identify_or_register(std::nullopt, std::nullopt, kNow);
    CHECK(c != a);
    CHECK(reg.size() == 3);
    // an existing face with its own id claimed is consistent
    CHECK(reg.identify_or_register(std::string("face-1"), a, kNow) == a);
}

TEST_CASE("user registry persists") {
    testing::TempDir dir;
    std::string id;
    {
        UserRegistry reg(dir / "users.json");
        id = reg.identify_or_register(std::string("face-9"), std::nullopt, kNow);
    }
    UserRegistry again(dir / "users.json");
    CHECK(again.size() == 1);
    CHECK(again.identify_or_register(std::string("face-9"), std::nullopt, kNow) == id);
    testing::write_file(dir / "bad.json", "{not json");
    CHECK_THROWS_AS(UserRegistry(dir / "bad.json"), ConfigError);
}

TEST_CASE("event parsing") {
    auto e = event_from_json(json::parse(R"({"kind":"user_emotion","payload":{"emotion":"happy","confidence":0.9}})"), kNow);
    CHECK(e.kind == PerceptKind::user_emotion);
    CHECK(e.emotion == affect::EmotionCategory::happiness);
    CHECK(e.timestamp == kNow);
    e = event_from_json(json::parse(R"({"kind":"user_location","payload":{"location":[1,2,3]},"timestamp":7})"), kNow);
    CHECK(e.location == Point3{1, 2, 3});
    CHECK(to_epoch_seconds(e.timestamp) == 7);
    e = event_from_json(json::parse(R"({"kind":"user_location","payload":{"location":{"x":1,"y":0,"z":2}}})"), kNow);
    CHECK(e.location == Point3{1, 0, 2});
    e = event_from_json(json::parse(R"({"kind":"utterance","payload":{"text":"hi"}})"), kNow);
    CHECK(e.text == "hi");
    CHECK(event_from_json(to_json(e), kNow).text == "hi");

    for (const char* bad : {R"({"kind":"smell"})", R"({"kind":"utterance","payload":{"text":" "}})",
                            R"({"kind":"user_emotion","payload":{"emotion":"happy","confidence":2}})",
                            R"({"kind":"user_emotion","payload":{"emotion":"bored","confidence":0.5}})",
                            R"({"kind":"user_location","payload":{"location":[1,2]}})",
                            R"({"payload":{}})", R"([1])"}) {
        CHECK_THROWS_AS(event_from_json(json::parse(bad), kNow), ValidationError);
    }
}

TEST_CASE("tracker: latest wins and staleness") {
    PerceptTracker t(30.0);
    CHECK(t.ingest(emotion_at(100, affect::EmotionCategory::sadness)) == IngestOutcome::accepted);
    CHECK(t.ingest(emotion_at(101)) == IngestOutcome::accepted);
    auto s = t.snapshot(from_epoch_seconds(101));
    REQUIRE(s.emotion);
    CHECK(s.emotion->category == affect::EmotionCategory::happiness);
    CHECK(t.snapshot(from_epoch_seconds(131)).emotion.has_value());
    CHECK_FALSE(t.snapshot(from_epoch_seconds(132)).emotion.has_value());
    // out-of-order event is ignored
    CHECK(t.ingest(emotion_at(50, affect::EmotionCategory::anger)) == IngestOutcome::stale_ignored);
    CHECK(t.snapshot(from_epoch_seconds(101)).emotion->category == affect::EmotionCategory::happiness);
}

TEST_CASE("tracker: presence and leave") {
    PerceptTracker t;
    PerceptEvent enter;
    enter.kind = PerceptKind::user_enter;
    enter.timestamp = from_epoch_seconds(1);
    t.ingest(enter);
    PerceptEvent loc;
    loc.kind = PerceptKind::user_location;
    loc.location = {0.5, 0, 1.2};
    loc.timestamp = from_epoch_seconds(2);
    t.ingest(loc);
    auto s = t.snapshot(from_epoch_seconds(3));
    CHECK(s.user_present);
    CHECK(s.location == Point3{0.5, 0, 1.2});
    const auto j = to_json(s);
    CHECK(j["detected_emotion"].is_null());
    CHECK(j["location"] == json::array({0.5, 0, 1.2}));
    PerceptEvent leave;
    leave.kind = PerceptKind::user_leave;
    leave.timestamp = from_epoch_seconds(4);
    t.ingest(leave);
    s = t.snapshot(from_epoch_seconds(4));
    CHECK_FALSE(s.user_present);
    CHECK_FALSE(s.location.has_value());
}

}
