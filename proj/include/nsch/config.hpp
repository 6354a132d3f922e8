#pragma once

#include <string>

#include "nsch/scenarios.hpp"

namespace nsch {

/// Parses a JSON scenario file. The "scenario" key selects the preset
/// whose defaults are then overridden section by section. Unknown keys,
/// wrong value types and out-of-range values throw ConfigError; with
/// `for_solver` set, non-neutral wetting is rejected as well.
ScenarioConfig parse_config(const std::string& text, bool for_solver = true);
ScenarioConfig load_config(const std::string& path, bool for_solver = true);

/// Full JSON dump of every setting; parse_config(serialize_config(c))
/// reproduces c.
std::string serialize_config(const ScenarioConfig& c);

/// Range and consistency checks shared by the parser and programmatic
/// configs.
void validate_config(const ScenarioConfig& c, bool for_solver = true);

}  // namespace nsch
