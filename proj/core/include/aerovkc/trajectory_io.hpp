#pragma once

#include "aerovkc/scenario.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace aerovkc {

class TrajectoryIoError : public Error {
 public:
  using Error::Error;
};

/// CSV: header "t,<dof names>", one row per knot, values printed with 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
/// Reads states, dof names and dt (from the t column) back.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// {"dt", "dof_names", "states"}; the exchange format of `export --format json`.
nlohmann::json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);
void write_trajectory_json(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory_json(const std::filesystem::path& path);

/// Residual report written next to each planned trajectory.
nlohmann::json residual_report(const std::string& step, const Trajectory& traj, const CollisionSettings& settings);

/// Verification of one step against a trajectory read from disk.
struct StepCheck {
  std::string step;
  Residuals residuals;
  std::vector<Residuals::Verdict> verdicts;
  bool pass = false;
};

/// Rebuilds every step's problem from the scenario, advancing the scene with
/// the final row of each given trajectory, and re-evaluates all constraints.
/// Throws TrajectoryIoError when the count or the columns do not match.
std::vector<StepCheck> verify_sequence(const Scenario& scenario, const std::vector<Trajectory>& trajectories,
                                       const PlannerConfig& cfg);

}  // namespace aerovkc
