#pragma once

#include "json.hpp"
#include "steinseed/scenario.hpp"

namespace steinseed {

nlohmann::json to_json_value(const Chromosome& chromosome);
Chromosome chromosome_from_json(const nlohmann::json& j);

}  // namespace steinseed
