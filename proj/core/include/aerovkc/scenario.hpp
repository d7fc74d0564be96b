#pragma once

#include "aerovkc/sequence.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace aerovkc {

class ScenarioError : public Error {
 public:
  using Error::Error;
};

/// A scene plus the task steps to run in it.
struct Scenario {
  std::string name;
  std::string description;
  Scene scene;
  std::vector<TaskStep> steps;
};

/// The platform is not part of the file; it comes from the configuration.
nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j, const PlatformParams& platform);

Scenario load_scenario(const std::filesystem::path& path, const PlatformParams& platform);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

/// Robot state from a base position, roll-pitch-yaw and arm angles.
ChainState robot_state(const Vector3d& position, const Vector3d& rpy, const Vector4d& arm);

/// Built-in scenes: "task1" (bulb), "task2" (cabinet) and "drawer".
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(std::string_view name, const PlatformParams& platform = {});

}  // namespace aerovkc
