#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evasion/types.hpp"

namespace evasion {

/// Everything a scenario file describes.
struct ScenarioConfig {
  VehicleParams vehicle{};
  Scenario scenario{};

  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses the sectioned key=value format documented in docs/scenario-format.md.
/// Unknown keys and sections are errors; unspecified keys keep their defaults.
/// Weights that do not sum to one are renormalized and a note is appended to `warnings`.
ScenarioConfig parse_scenario(std::string_view text, std::vector<std::string>* warnings = nullptr);

ScenarioConfig load_scenario(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr);

/// Emits every key with round-trip precision.
std::string serialize_scenario(const ScenarioConfig& config);

}  // namespace evasion
