#pragma once

#include "matchfield/scenario.hpp"

#include <filesystem>
#include <string>

namespace matchfield {

/// Parses the JSON scenario format documented in README.md. Unknown keys,
/// missing required keys and ill-shaped tables raise ParseError. Semantic
/// checks (normalization, symmetry) are left to ScenarioConfig::validate.
ScenarioConfig parse_scenario(const std::string &text);
ScenarioConfig load_scenario(const std::filesystem::path &path);

/// Inverse of parse_scenario; doubles are written in shortest round-trip form.
std::string serialize_scenario(const ScenarioConfig &scenario);

} // namespace matchfield
