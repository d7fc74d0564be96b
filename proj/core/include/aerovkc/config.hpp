#pragma once

#include "aerovkc/sequence.hpp"
#include "aerovkc/simulator.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace aerovkc {

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kConfigVersion = 1;

/// Every tunable of the planner and the simulator in one place.
struct Config {
  int version = kConfigVersion;
  PlatformParams platform;
  PlannerConfig planner;
  SimConfig sim;
};

nlohmann::json config_to_json(const Config& c);

/// Keys missing from `j` keep their defaults. Unknown keys, a wrong version or
/// a type mismatch throw ConfigError.
Config config_from_json(const nlohmann::json& j);

Config load_config(const std::filesystem::path& path);

/// Applies "dotted.path=value" overrides. The value is parsed as JSON and
/// taken as a plain string when that fails; the path must name an existing key.
nlohmann::json apply_overrides(nlohmann::json j, const std::vector<std::string>& overrides);

}  // namespace aerovkc
