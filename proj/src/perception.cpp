#include "social/perception.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <spdlog/spdlog.h>

namespace social::perception {

using nlohmann::json;

json to_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

json to_json(const UserRecord& u) {
    json j{{"user_id", u.user_id},
           {"first_seen", to_epoch_seconds(u.first_seen)},
           {"last_seen", to_epoch_seconds(u.last_seen)}};
    j["display_name"] = u.display_name ? json(*u.display_name) : json(nullptr);
    j["face_ref"] = u.face_ref ? json(*u.face_ref) : json(nullptr);
    return j;
}

UserRegistry::UserRegistry(std::filesystem::path file) : file_(std::move(file)) {
    if (file_.empty() || !std::filesystem::exists(file_)) return;
    std::ifstream in(file_);
    json doc;
    try {
        doc = json::parse(in);
        for (const auto& [id, r] : doc.at("users").items()) {
            UserRecord u;
            u.user_id = id;
            if (r.contains("display_name") && r["display_name"].is_string()) u.display_name = r["display_name"];
            if (r.contains("face_ref") && r["face_ref"].is_string()) u.face_ref = r["face_ref"];
            u.first_seen = from_epoch_seconds(r.value("first_seen", 0.0));
            u.last_seen = from_epoch_seconds(r.value("last_seen", 0.0));
            users_.emplace(id, std::move(u));
        }
    } catch (const json::exception& e) {
        throw ConfigError(file_.string() + ": " + e.what());
    }
}

void UserRegistry::save_locked() const {
    if (file_.empty()) return;
    json users = json::object();
    for (const auto& [id, u] : users_) {
        auto j = to_json(u);
        j.erase("user_id");
        users[id] = j;
    }
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    const auto tmp = file_.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << json{{"users", users}}.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, file_);
}

std::string UserRegistry::fresh_id_locked() const {
    for (std::size_t n = users_.size() + 1;; ++n) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "user-%04zu", n);
        if (!users_.count(buf)) return buf;
    }
}

std::string UserRegistry::identify_or_register(const std::optional<std::string>& face_ref,
                                               const std::optional<std::string>& claimed_user_id, Timestamp now,
                                               const std::optional<std::string>& display_name) {
    std::lock_guard lock(mu_);
    std::optional<std::string> by_face;
    if (face_ref) {
        for (const auto& [id, u] : users_) {
            if (u.face_ref == face_ref) by_face = id;
        }
    }
    const bool claim_known = claimed_user_id && users_.count(*claimed_user_id);
    if (by_face && claimed_user_id && *by_face != *claimed_user_id)
        throw AmbiguityError("face_ref identifies user '" + *by_face + "' but user '" + *claimed_user_id + "' was claimed");

    std::string id;
    if (by_face) {
        id = *by_face;
    } else if (claim_known) {
        id = *claimed_user_id;
        if (face_ref && !users_[id].face_ref) users_[id].face_ref = face_ref;
    } else {
        id = claimed_user_id ? *claimed_user_id : fresh_id_locked();
        if (id.empty()) throw ValidationError("user_id must be non-empty");
        UserRecord u;
        u.user_id = id;
        u.face_ref = face_ref;
        u.display_name = display_name;
        u.first_seen = now;
        u.last_seen = now;
        users_.emplace(id, std::move(u));
        save_locked();
        return id;
    }
    auto& u = users_[id];
    if (now > u.last_seen) u.last_seen = now;
    if (display_name && !u.display_name) u.display_name = display_name;
    save_locked();
    return id;
}

std::optional<UserRecord> UserRegistry::get(const std::string& user_id) const {
    std::lock_guard lock(mu_);
    auto it = users_.find(user_id);
    if (it == users_.end()) return std::nullopt;
    return it->second;
}

std::size_t UserRegistry::size() const {
    std::lock_guard lock(mu_);
    return users_.size();
}

std::string_view to_string(PerceptKind k) {
    switch (k) {
        case PerceptKind::utterance: return "utterance";
        case PerceptKind::user_emotion: return "user_emotion";
        case PerceptKind::user_location: return "user_location";
        case PerceptKind::user_enter: return "user_enter";
        case PerceptKind::user_leave: return "user_leave";
    }
    return "utterance";
}

namespace {

PerceptKind kind_from_string(const std::string& s) {
    for (auto k : {PerceptKind::utterance, PerceptKind::user_emotion, PerceptKind::user_location,
                   PerceptKind::user_enter, PerceptKind::user_leave}) {
        if (s == to_string(k)) return k;
    }
    throw ValidationError("unknown percept kind '" + s + "'");
}

}  // namespace

PerceptEvent event_from_json(const json& j, Timestamp now) {
    if (!j.is_object()) throw ValidationError("percept event must be a JSON object");
    PerceptEvent e;
    try {
        e.session_id = j.value("session_id", std::string());
        e.kind = kind_from_string(j.at("kind").get<std::string>());
        e.timestamp = j.contains("timestamp") && !j["timestamp"].is_null()
                          ? from_epoch_seconds(j["timestamp"].get<double>())
                          : now;
        const json payload = j.value("payload", json::object());
        if (!payload.is_object()) throw ValidationError("payload must be an object");
        switch (e.kind) {
            case PerceptKind::utterance:
                e.text = payload.at("text").get<std::string>();
                if (trim(e.text).empty()) throw ValidationError("utterance text must be non-empty");
                break;
            case PerceptKind::user_emotion:
                e.emotion = affect::emotion_from_string(payload.at("emotion").get<std::string>());
                e.confidence = payload.at("confidence").get<double>();
                if (!(e.confidence >= 0.0 && e.confidence <= 1.0))
                    throw ValidationError("confidence must lie in [0,1]");
                break;
            case PerceptKind::user_location: {
                const auto& loc = payload.at("location");
                if (loc.is_array()) {
                    if (loc.size() != 3) throw ValidationError("location must have 3 coordinates");
                    e.location = {loc[0].get<double>(), loc[1].get<double>(), loc[2].get<double>()};
                } else {
                    e.location = {loc.at("x").get<double>(), loc.at("y").get<double>(), loc.at("z").get<double>()};
                }
                if (!std::isfinite(e.location.x) || !std::isfinite(e.location.y) || !std::isfinite(e.location.z))
                    throw ValidationError("location must be finite");
                break;
            }
            case PerceptKind::user_enter:
            case PerceptKind::user_leave:
                break;
        }
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("percept event: ") + ex.what());
    }
    return e;
}

json to_json(const PerceptEvent& e) {
    json payload = json::object();
    switch (e.kind) {
        case PerceptKind::utterance: payload["text"] = e.text; break;
        case PerceptKind::user_emotion:
            payload["emotion"] = affect::to_string(e.emotion);
            payload["confidence"] = e.confidence;
            break;
        case PerceptKind::user_location: payload["location"] = to_json(e.location); break;
        default: break;
    }
    return {{"session_id", e.session_id},
            {"kind", to_string(e.kind)},
            {"payload", payload},
            {"timestamp", to_epoch_seconds(e.timestamp)}};
}

json to_json(const PerceptSnapshot& s) {
    json j{{"user_present", s.user_present}};
    if (s.emotion) {
        j["detected_emotion"] = {{"emotion", affect::to_string(s.emotion->category)},
                                 {"confidence", s.emotion->confidence},
                                 {"observed_at", to_epoch_seconds(s.emotion->observed_at)}};
    } else {
        j["detected_emotion"] = nullptr;
    }
    j["location"] = s.location ? to_json(*s.location) : json(nullptr);
    return j;
}

IngestOutcome PerceptTracker::ingest(const PerceptEvent& event) {
    if (last_event_ && event.timestamp < *last_event_) {
        spdlog::warn("ignoring stale {} percept for session {}", to_string(event.kind), event.session_id);
        return IngestOutcome::stale_ignored;
    }
    last_event_ = event.timestamp;
    switch (event.kind) {
        case PerceptKind::user_emotion:
            emotion_ = DetectedEmotion{event.emotion, event.confidence, event.timestamp};
            break;
        case PerceptKind::user_location: location_ = std::make_pair(event.location, event.timestamp); break;
        case PerceptKind::user_enter: present_ = true; break;
        case PerceptKind::user_leave:
            present_ = false;
            emotion_.reset();
            location_.reset();
            break;
        case PerceptKind::utterance: present_ = true; break;
    }
    return IngestOutcome::accepted;
}

PerceptSnapshot PerceptTracker::snapshot(Timestamp now) const {
    PerceptSnapshot s;
    s.user_present = present_;
    if (emotion_ && (now - emotion_->observed_at).count() <= staleness_s_) s.emotion = emotion_;
    if (location_ && (now - location_->second).count() <= staleness_s_) s.location = location_->first;
    return s;
}

}  // namespace social::perception
