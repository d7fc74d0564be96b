#pragma once

#include "aerovkc/chain.hpp"

namespace aerovkc::rbd {

/// Fixed-root recursive Newton-Euler inverse dynamics. `gravity` is the
/// gravitational acceleration expressed in the root frame.
Eigen::VectorXd inverse_dynamics(const KinematicChain& chain, const ChainState& q, const Eigen::VectorXd& qd,
                                 const Eigen::VectorXd& qdd, const Vector3d& gravity);

/// Joint-space inertia matrix, one RNEA pass per column.
Eigen::MatrixXd mass_matrix(const KinematicChain& chain, const ChainState& q);

/// Total mass and mass-weighted centre of mass of links [first, last] in the root frame.
struct MassSummary {
  double mass = 0.0;
  Vector3d com = Vector3d::Zero();
};
MassSummary mass_summary(const KinematicChain& chain, const ChainState& q, int first_link = 0);

}  // namespace aerovkc::rbd
