#pragma once

// Re-runs a recorded session log against a scripted provider built from the
// log's own completions and tool observations, then compares outputs.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace social::replay {

struct Report {
    std::size_t turns = 0;
    std::vector<std::string> divergences;
    // Replayed output per turn: {turn_id, response, behavior_script}.
    std::vector<nlohmann::json> outputs;

    bool ok() const { return divergences.empty(); }
};

// Throws ValidationError when the log cannot be read or has no header.
std::vector<nlohmann::json> read_log(const std::filesystem::path& path);
Report replay(const std::vector<nlohmann::json>& records);
Report replay_file(const std::filesystem::path& path);

}  // namespace social::replay
