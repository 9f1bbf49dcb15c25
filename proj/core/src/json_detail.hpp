#pragma once

// Shared nlohmann-typed codecs for io.cpp and harness.cpp; never installed.

#include <string>

#include <json.hpp>

#include "rewardlab/mdp.hpp"
#include "rewardlab/modal.hpp"
#include "rewardlab/objectives.hpp"
#include "rewardlab/risk.hpp"

namespace rewardlab::detail {

/// nlohmann parse with ParseError wrapping (line/column preserved).
nlohmann::json parse_text(const std::string& text);

/// Field access with key-naming ParseError messages.
const nlohmann::json& require(const nlohmann::json& value, const char* key);

Momdp momdp_from_value(const nlohmann::json& value);
nlohmann::json momdp_to_value(const Momdp& momdp);

ObjectiveSpec objective_from_value(const nlohmann::json& value);
nlohmann::json objective_to_value(const ObjectiveSpec& spec);

AffordanceMdp affordance_from_value(const nlohmann::json& value);
nlohmann::json affordance_to_value(const AffordanceMdp& amdp);

UtilityTransform transform_from_value(const nlohmann::json& value);
nlohmann::json transform_to_value(const UtilityTransform& transform);

} // namespace rewardlab::detail
