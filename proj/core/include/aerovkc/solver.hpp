#pragma once

#include "aerovkc/constraints.hpp"

#include <string>
#include <vector>

namespace aerovkc {

struct SolverOptions {
  int max_outer = 8;
  int max_inner = 100;
  double mu0 = 100.0;
  double mu_factor = 10.0;
  /// Constraints are tightened by these margins while optimizing so that the
  /// returned trajectory meets the nominal ones exactly.
  double position_margin = 1e-4;
  double rate_margin = 0.02;
  double collision_margin = 0.005;
  double fd_step = 1e-6;
  int ik_iterations = 300;
  /// Once feasible, further multiplier updates (at most max_polish) run until
  /// every goal and anchor equality is below this; the last feasible iterate is kept.
  double equality_tolerance = 1e-10;
  int max_polish = 3;
};

struct SolveStats {
  int outer_iterations = 0;
  int inner_iterations = 0;
  double seconds = 0.0;
};

struct Trajectory {
  StateMatrix states;  ///< T x dof, row 0 is x_start
  double dt = 0.1;
  std::vector<std::string> dof_names;
  Residuals residuals;
  SolveStats stats;
};

struct SolveResult {
  bool success = false;
  Trajectory trajectory;
  /// Empty on success; otherwise names every failing constraint family with its worst residual.
  std::string report;
};

/// Plans x_{1:T}. Never throws for infeasibility: success is false and `report`
/// lists the worst residual of each failing family. Throws PlanningError for
/// malformed problems.
SolveResult solve(const PlanningProblem& problem, const SolverOptions& options = {});

/// Goal-consistent final state used to seed the trajectory: damped least
/// squares from ik_hint (or x_start), regularised towards x_start and kept
/// inside the position limits; anchors are enforced alongside the goal.
ChainState ik_seed(const PlanningProblem& problem, const SolverOptions& options = {});

/// Human-readable residual table, one line per family.
std::string format_residuals(const Residuals& r, const CollisionSettings& c);

}  // namespace aerovkc
