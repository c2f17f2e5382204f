#pragma once

#include <json.hpp>

#include "crowdnav/model.hpp"
#include "crowdnav/simulation.hpp"
#include "crowdnav/traces.hpp"

namespace crowdnav {

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const NetworkModel& model);
NetworkModel network_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlatformState& state);
nlohmann::json to_json(const TrajectoryRecord& trajectory);
nlohmann::json to_json(const ExperimentReport& report);
nlohmann::json to_json(const BoundCheck& check);
nlohmann::json to_json(const FittedChain& chain);

}  // namespace crowdnav
