#include "social/affect.hpp"

#include <algorithm>
#include <cmath>

namespace social::affect {

namespace {

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

bool in_unit_cube(PadVector v) {
    auto ok = [](double x) { return std::isfinite(x) && x >= -1.0 && x <= 1.0; };
    return ok(v.pleasure) && ok(v.arousal) && ok(v.dominance);
}

constexpr std::array<std::string_view, 7> kEmotionNames = {
    "happiness", "sadness", "anger", "fear", "disgust", "surprise", "neutral"};

constexpr std::array<std::string_view, 5> kTraitNames = {
    "openness", "conscientiousness", "extraversion", "agreeableness", "neuroticism"};

}  // namespace

PadVector PadVector::clamped() const {
    return {clamp_unit(pleasure), clamp_unit(arousal), clamp_unit(dominance)};
}

double PadVector::norm() const { return std::sqrt(dot(*this, *this)); }

double dot(PadVector a, PadVector b) {
    return a.pleasure * b.pleasure + a.arousal * b.arousal + a.dominance * b.dominance;
}

double distance(PadVector a, PadVector b) { return (a - b).norm(); }

double cosine(PadVector a, PadVector b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

std::string_view to_string(EmotionCategory c) {
    return kEmotionNames[static_cast<std::size_t>(c)];
}

std::optional<EmotionCategory> parse_emotion(std::string_view s) {
    const std::string key = to_lower(trim(s));
    for (std::size_t i = 0; i < kEmotionNames.size(); ++i) {
        if (key == kEmotionNames[i]) return kAllEmotions[i];
    }
    struct Alias {
        std::string_view name;
        EmotionCategory category;
    };
    static constexpr Alias kAliases[] = {
        {"happy", EmotionCategory::happiness},   {"joy", EmotionCategory::happiness},
        {"sad", EmotionCategory::sadness},       {"angry", EmotionCategory::anger},
        {"afraid", EmotionCategory::fear},       {"scared", EmotionCategory::fear},
        {"disgusted", EmotionCategory::disgust}, {"surprised", EmotionCategory::surprise},
        {"none", EmotionCategory::neutral},
    };
    for (const auto& a : kAliases) {
        if (key == a.name) return a.category;
    }
    return std::nullopt;
}

EmotionCategory emotion_from_string(std::string_view s) {
    if (auto c = parse_emotion(s)) return *c;
    throw ValidationError("unknown emotion category '" + std::string(s) + "'");
}

std::string_view to_string(Cause c) {
    switch (c) {
        case Cause::user: return "user";
        case Cause::self: return "self";
        case Cause::third_party: return "third-party";
        case Cause::none: return "none";
    }
    return "none";
}

std::optional<Cause> parse_cause(std::string_view s) {
    std::string key = to_lower(trim(s));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "user") return Cause::user;
    if (key == "self") return Cause::self;
    if (key == "third-party" || key == "thirdparty" || key == "third party") return Cause::third_party;
    if (key == "none") return Cause::none;
    return std::nullopt;
}

PersonalityProfile::PersonalityProfile(double openness, double conscientiousness,
                                       double extraversion, double agreeableness,
                                       double neuroticism)
    : traits_{openness, conscientiousness, extraversion, agreeableness, neuroticism} {
    for (std::size_t i = 0; i < traits_.size(); ++i) {
        if (!std::isfinite(traits_[i]) || traits_[i] < -1.0 || traits_[i] > 1.0) {
            throw ValidationError("personality trait " + std::string(kTraitNames[i]) +
                                  " must lie in [-1,1]");
        }
    }
}

AffectConfig AffectConfig::defaults() {
    AffectConfig c;
    c.emotion_pad_map = {{
        {0.50, 0.30, 0.20},    // happiness
        {-0.50, -0.30, -0.40}, // sadness
        {-0.60, 0.60, 0.30},   // anger
        {-0.60, 0.60, -0.50},  // fear
        {-0.40, 0.20, 0.10},   // disgust
        {0.20, 0.70, 0.00},    // surprise
        {0.0, 0.0, 0.0},       // neutral
    }};
    c.personality_to_pad = {{
        {0.00, 0.00, 0.21, 0.59, 0.19},
        {0.15, 0.00, 0.00, 0.30, -0.57},
        {0.25, 0.17, 0.60, -0.32, 0.00},
    }};
    return c;
}

void AffectConfig::validate() const {
    if (!(decay_tau > 0.0)) throw ValidationError("decay_tau must be > 0");
    if (!(expiry_threshold > 0.0 && expiry_threshold < 1.0))
        throw ValidationError("expiry_threshold must lie in (0,1)");
    if (!(pull_rate > 0.0 && pull_rate <= 1.0)) throw ValidationError("pull_rate must lie in (0,1]");
    if (!(return_rate > 0.0 && return_rate <= 1.0))
        throw ValidationError("return_rate must lie in (0,1]");
    if (!(balance_gain >= 0.0) || !std::isfinite(balance_gain))
        throw ValidationError("balance_gain must be >= 0");
    for (std::size_t i = 0; i < emotion_pad_map.size(); ++i) {
        if (!in_unit_cube(emotion_pad_map[i]))
            throw ValidationError("emotion_pad_map entry for " + std::string(kEmotionNames[i]) +
                                  " lies outside [-1,1]^3");
    }
    if (emotion_pad_map[static_cast<std::size_t>(EmotionCategory::neutral)] != PadVector{})
        throw ValidationError("neutral must map to the PAD origin");
    for (const auto& row : personality_to_pad) {
        for (double v : row) {
            if (!std::isfinite(v)) throw ValidationError("personality_to_pad must be finite");
        }
    }
}

PadVector default_mood(const PersonalityProfile& personality, const AffectConfig& config) {
    std::array<double, 3> out{};
    for (std::size_t r = 0; r < 3; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < 5; ++c) acc += config.personality_to_pad[r][c] * personality.traits()[c];
        out[r] = acc;
    }
    return PadVector{out[0], out[1], out[2]}.clamped();
}

EmotionInstance appraise(EmotionCategory category, double intensity, Cause cause, Timestamp now,
                         const AffectConfig& config) {
    const auto idx = static_cast<std::size_t>(category);
    if (idx >= kAllEmotions.size()) throw ValidationError("unknown emotion category");
    if (!std::isfinite(intensity) || intensity < 0.0 || intensity > 1.0)
        throw ValidationError("emotion intensity must lie in [0,1]");
    EmotionInstance e;
    e.category = category;
    e.base_intensity = intensity;
    e.intensity = intensity;
    e.cause = cause;
    e.created_at = now;
    e.pad = category == EmotionCategory::neutral ? PadVector{}
                                                 : intensity * config.pad_of(category);
    return e;
}

std::optional<PadVector> emotion_center(const std::vector<EmotionInstance>& active) {
    PadVector sum;
    double weight = 0.0;
    for (const auto& e : active) {
        if (e.category == EmotionCategory::neutral || !(e.intensity > 0.0)) continue;
        sum = sum + e.intensity * e.pad;
        weight += e.intensity;
    }
    if (weight <= 0.0) return std::nullopt;
    return (1.0 / weight) * sum;
}

TickResult tick(const MoodState& mood, const std::vector<EmotionInstance>& active, double dt,
                const AffectConfig& config) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("tick requires dt > 0");

    TickResult out;
    out.mood = mood;
    out.mood.last_update = mood.last_update + Seconds{dt};

    const double decay = std::exp(-dt / config.decay_tau);
    out.active.reserve(active.size());
    for (const auto& e : active) {
        EmotionInstance next = e;
        next.intensity = e.intensity * decay;
        if (next.intensity < config.expiry_threshold) continue;
        next.pad = next.category == EmotionCategory::neutral
                       ? PadVector{}
                       : next.intensity * config.pad_of(next.category);
        out.active.push_back(next);
    }

    const PadVector current = mood.current;
    if (auto center = emotion_center(out.active)) {
        double total = 0.0;
        for (const auto& e : out.active) {
            if (e.category != EmotionCategory::neutral) total += e.intensity;
        }
        const double step = std::min(1.0, config.pull_rate * dt * total);
        out.mood.current = current + step * (*center - current);
    } else {
        const double step = std::min(1.0, config.return_rate * dt);
        out.mood.current = current + step * (mood.default_mood - current);
    }
    out.mood.current = out.mood.current.clamped();
    return out;
}

double effective_intensity(double base, PadVector emotion_pad, PadVector mood,
                           const AffectConfig& config) {
    const double align = cosine(emotion_pad, mood);
    return std::clamp(base * (1.0 + config.balance_gain * align), 0.0, 1.0);
}

AffectState AffectState::initial(const PersonalityProfile& personality, const AffectConfig& config,
                                 Timestamp now) {
    AffectState s;
    s.mood.default_mood = default_mood(personality, config);
    s.mood.current = s.mood.default_mood;
    s.mood.last_update = now;
    return s;
}

void AffectState::advance_to(Timestamp now, const AffectConfig& config) {
    const double dt = (now - mood.last_update).count();
    if (!(dt > 0.0)) return;
    auto next = tick(mood, active, dt, config);
    mood = next.mood;
    mood.last_update = now;
    active = std::move(next.active);
}

const EmotionInstance* AffectState::dominant() const {
    const EmotionInstance* best = nullptr;
    for (const auto& e : active) {
        if (!best || e.intensity > best->intensity) best = &e;
    }
    return best;
}

nlohmann::json to_json(const PadVector& v) {
    return nlohmann::json{{"P", v.pleasure}, {"A", v.arousal}, {"D", v.dominance}};
}

PadVector pad_from_json(const nlohmann::json& j) {
    if (j.is_array()) {
        if (j.size() != 3) throw ValidationError("PAD vector must have 3 components");
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }
    return {j.at("P").get<double>(), j.at("A").get<double>(), j.at("D").get<double>()};
}

nlohmann::json to_json(const AffectState& s) {
    nlohmann::json active = nlohmann::json::array();
    for (const auto& e : s.active) {
        active.push_back({{"emotion", to_string(e.category)},
                          {"base_intensity", e.base_intensity},
                          {"intensity", e.intensity},
                          {"cause", to_string(e.cause)},
                          {"created_at", to_epoch_seconds(e.created_at)},
                          {"pad", to_json(e.pad)}});
    }
    return {{"mood", to_json(s.mood.current)},
            {"default_mood", to_json(s.mood.default_mood)},
            {"last_update", to_epoch_seconds(s.mood.last_update)},
            {"active_emotions", active}};
}

nlohmann::json to_json(const AffectConfig& c) {
    nlohmann::json map = nlohmann::json::object();
    for (auto e : kAllEmotions) map[std::string(to_string(e))] = to_json(c.pad_of(e));
    return {{"emotion_pad_map", map},
            {"decay_tau", c.decay_tau},
            {"expiry_threshold", c.expiry_threshold},
            {"pull_rate", c.pull_rate},
            {"return_rate", c.return_rate},
            {"balance_gain", c.balance_gain},
            {"personality_to_pad", c.personality_to_pad}};
}

AffectConfig affect_config_from_json(const nlohmann::json& j) {
    AffectConfig c = AffectConfig::defaults();
    if (j.is_null()) return c;
    try {
        if (j.contains("emotion_pad_map")) {
            for (const auto& [name, v] : j.at("emotion_pad_map").items()) {
                const auto cat = emotion_from_string(name);
                c.emotion_pad_map[static_cast<std::size_t>(cat)] = pad_from_json(v);
            }
        }
        c.decay_tau = j.value("decay_tau", c.decay_tau);
        c.expiry_threshold = j.value("expiry_threshold", c.expiry_threshold);
        c.pull_rate = j.value("pull_rate", c.pull_rate);
        c.return_rate = j.value("return_rate", c.return_rate);
        c.balance_gain = j.value("balance_gain", c.balance_gain);
        if (j.contains("personality_to_pad"))
            c.personality_to_pad = j.at("personality_to_pad").get<std::array<std::array<double, 5>, 3>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("affect config: ") + e.what());
    }
    c.validate();
    return c;
}

PersonalityProfile personality_from_json(const nlohmann::json& j) {
    if (j.is_null()) return {};
    try {
        return PersonalityProfile(j.value("openness", 0.0), j.value("conscientiousness", 0.0),
                                  j.value("extraversion", 0.0), j.value("agreeableness", 0.0),
                                  j.value("neuroticism", 0.0));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("personality: ") + e.what());
    }
}

}  // namespace social::affect
