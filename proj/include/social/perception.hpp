#pragma once

// Typed stand-in for the hardware perception pipeline: who is present, how
// they appear to feel, where they stand, and what they said.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"
#include "social/affect.hpp"
#include "social/common.hpp"

namespace social::perception {

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    friend bool operator==(const Point3&, const Point3&) = default;
};

nlohmann::json to_json(const Point3& p);

struct UserRecord {
    std::string user_id;
    std::optional<std::string> display_name;
    std::optional<std::string> face_ref;
    Timestamp first_seen{};
    Timestamp last_seen{};
};

nlohmann::json to_json(const UserRecord& u);

// Users keyed by id, persisted as one JSON file when a path is given.
class UserRegistry {
public:
    explicit UserRegistry(std::filesystem::path file = {});

    // Matches on face_ref or claimed id (updating last_seen); otherwise
    // registers a new user under the claimed id, or a fresh id when none is
    // claimed. Throws AmbiguityError when the two identify different users.
    std::string identify_or_register(const std::optional<std::string>& face_ref,
                                     const std::optional<std::string>& claimed_user_id, Timestamp now,
                                     const std::optional<std::string>& display_name = std::nullopt);

    std::optional<UserRecord> get(const std::string& user_id) const;
    std::size_t size() const;

private:
    void save_locked() const;
    std::string fresh_id_locked() const;

    std::filesystem::path file_;
    mutable std::mutex mu_;
    std::map<std::string, UserRecord> users_;
};

enum class PerceptKind { utterance, user_emotion, user_location, user_enter, user_leave };

std::string_view to_string(PerceptKind k);

struct PerceptEvent {
    std::string session_id;
    PerceptKind kind = PerceptKind::utterance;
    std::string text;                                    // utterance
    affect::EmotionCategory emotion = affect::EmotionCategory::neutral;  // user_emotion
    double confidence = 0.0;                             // user_emotion
    Point3 location;                                     // user_location, meters
    Timestamp timestamp{};
};

// Parses {"session_id"?, "kind", "payload": {...}, "timestamp"?}. Missing
// timestamps take `now`. Throws ValidationError when the payload does not
// match the kind.
PerceptEvent event_from_json(const nlohmann::json& j, Timestamp now);
nlohmann::json to_json(const PerceptEvent& e);

struct DetectedEmotion {
    affect::EmotionCategory category = affect::EmotionCategory::neutral;
    double confidence = 0.0;
    Timestamp observed_at{};
};

struct PerceptSnapshot {
    std::optional<DetectedEmotion> emotion;
    std::optional<Point3> location;
    bool user_present = false;
};

nlohmann::json to_json(const PerceptSnapshot& s);

enum class IngestOutcome { accepted, stale_ignored };

// Latest-value-wins tracker with a staleness horizon. Not internally
// synchronised; the owning session serialises access.
class PerceptTracker {
public:
    explicit PerceptTracker(double staleness_s = 30.0) : staleness_s_(staleness_s) {}

    IngestOutcome ingest(const PerceptEvent& event);
    PerceptSnapshot snapshot(Timestamp now) const;
    std::optional<Timestamp> last_event() const { return last_event_; }

private:
    double staleness_s_;
    std::optional<DetectedEmotion> emotion_;
    std::optional<std::pair<Point3, Timestamp>> location_;
    bool present_ = false;
    std::optional<Timestamp> last_event_;
};

}  // namespace social::perception
