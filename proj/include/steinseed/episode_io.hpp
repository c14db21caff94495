#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "steinseed/simulator.hpp"

namespace steinseed {

// One JSON object per episode. Wall time is left out so that records of
// identical runs are byte-identical. Per-agent state arrays hold one
// [x, y, heading, speed] entry per frame.
nlohmann::json episode_to_json(const EpisodeResult& result);
EpisodeResult episode_from_json(const nlohmann::json& record);

nlohmann::json violations_to_json(const std::vector<ViolationRecord>& violations);
std::vector<ViolationRecord> violations_from_json(const nlohmann::json& value);

std::string episode_to_line(const EpisodeResult& result);
EpisodeResult episode_from_line(std::string_view line);

}  // namespace steinseed
