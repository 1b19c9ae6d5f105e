#pragma once

// PAD-space affect dynamics: emotions decay, pull the mood toward their
// center, and the mood relaxes back to a personality-derived default.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "social/common.hpp"

namespace social::affect {

struct PadVector {
    double pleasure = 0.0;
    double arousal = 0.0;
    double dominance = 0.0;

    PadVector clamped() const;
    double norm() const;

    friend PadVector operator+(PadVector a, PadVector b) {
        return {a.pleasure + b.pleasure, a.arousal + b.arousal, a.dominance + b.dominance};
    }
    friend PadVector operator-(PadVector a, PadVector b) {
        return {a.pleasure - b.pleasure, a.arousal - b.arousal, a.dominance - b.dominance};
    }
    friend PadVector operator*(double s, PadVector v) {
        return {s * v.pleasure, s * v.arousal, s * v.dominance};
    }
    friend bool operator==(const PadVector&, const PadVector&) = default;
};

double dot(PadVector a, PadVector b);
double distance(PadVector a, PadVector b);
// 0 when either vector has zero norm.
double cosine(PadVector a, PadVector b);

enum class EmotionCategory { happiness, sadness, anger, fear, disgust, surprise, neutral };

inline constexpr std::array<EmotionCategory, 7> kAllEmotions = {
    EmotionCategory::happiness, EmotionCategory::sadness,  EmotionCategory::anger,
    EmotionCategory::fear,      EmotionCategory::disgust,  EmotionCategory::surprise,
    EmotionCategory::neutral};

std::string_view to_string(EmotionCategory c);
// Accepts the category names plus common adjectival forms ("happy", "angry").
std::optional<EmotionCategory> parse_emotion(std::string_view s);
// Throws ValidationError on unknown names.
EmotionCategory emotion_from_string(std::string_view s);

// Who caused an emotion.
enum class Cause { user, self, third_party, none };

std::string_view to_string(Cause c);
std::optional<Cause> parse_cause(std::string_view s);

class PersonalityProfile {
public:
    PersonalityProfile() = default;
    // Throws ValidationError if any trait lies outside [-1,1].
    PersonalityProfile(double openness, double conscientiousness, double extraversion,
                       double agreeableness, double neuroticism);

    double openness() const { return traits_[0]; }
    double conscientiousness() const { return traits_[1]; }
    double extraversion() const { return traits_[2]; }
    double agreeableness() const { return traits_[3]; }
    double neuroticism() const { return traits_[4]; }
    const std::array<double, 5>& traits() const { return traits_; }

private:
    std::array<double, 5> traits_{};
};

struct EmotionInstance {
    EmotionCategory category = EmotionCategory::neutral;
    double base_intensity = 0.0;
    double intensity = 0.0;  // current, as of the owning mood's last_update
    Cause cause = Cause::none;
    Timestamp created_at{};
    PadVector pad;  // category point scaled by current intensity
};

struct MoodState {
    PadVector current;
    PadVector default_mood;
    Timestamp last_update{};
};

struct AffectConfig {
    std::array<PadVector, 7> emotion_pad_map;  // indexed by EmotionCategory
    double decay_tau = 60.0;                   // seconds
    double expiry_threshold = 0.05;
    double pull_rate = 0.1;     // per second
    double return_rate = 0.02;  // per second
    double balance_gain = 0.5;
    // Rows P, A, D; columns O, C, E, A, N.
    std::array<std::array<double, 5>, 3> personality_to_pad{};

    static AffectConfig defaults();
    // Throws ValidationError when an invariant is violated.
    void validate() const;

    const PadVector& pad_of(EmotionCategory c) const {
        return emotion_pad_map[static_cast<std::size_t>(c)];
    }
};

PadVector default_mood(const PersonalityProfile& personality, const AffectConfig& config);

EmotionInstance appraise(EmotionCategory category, double intensity, Cause cause, Timestamp now,
                         const AffectConfig& config);

// Intensity-weighted mean of live non-neutral instances.
std::optional<PadVector> emotion_center(const std::vector<EmotionInstance>& active);

struct TickResult {
    MoodState mood;
    std::vector<EmotionInstance> active;
};

// Requires dt > 0 (ValidationError otherwise).
TickResult tick(const MoodState& mood, const std::vector<EmotionInstance>& active, double dt,
                const AffectConfig& config);

double effective_intensity(double base, PadVector emotion_pad, PadVector mood,
                           const AffectConfig& config);

// One agent's complete affective state, as owned by a session.
struct AffectState {
    MoodState mood;
    std::vector<EmotionInstance> active;

    static AffectState initial(const PersonalityProfile& personality, const AffectConfig& config,
                               Timestamp now);
    // Ticks forward to `now`; no-op when `now` is not after last_update.
    void advance_to(Timestamp now, const AffectConfig& config);
    // Strongest live instance, if any.
    const EmotionInstance* dominant() const;
};

nlohmann::json to_json(const PadVector& v);
PadVector pad_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AffectState& s);
nlohmann::json to_json(const AffectConfig& c);
// Starts from defaults and overrides any keys present.
AffectConfig affect_config_from_json(const nlohmann::json& j);
PersonalityProfile personality_from_json(const nlohmann::json& j);

}  // namespace social::affect
