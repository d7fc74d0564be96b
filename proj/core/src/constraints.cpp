#include "aerovkc/constraints.hpp"

#include <algorithm>
#include <cmath>

namespace aerovkc {

std::string_view to_string(GoalKind kind) {
  switch (kind) {
    case GoalKind::ee_pose: return "ee_pose";
    case GoalKind::joint_target: return "joint_target";
    case GoalKind::link_pose: return "link_pose";
  }
  return "?";
}

GoalKind goal_kind_from_string(std::string_view s) {
  if (s == "ee_pose") return GoalKind::ee_pose;
  if (s == "joint_target") return GoalKind::joint_target;
  if (s == "link_pose") return GoalKind::link_pose;
  throw PlanningError("unknown goal kind '" + std::string(s) + "'");
}

DofLimits DofLimits::from_chain(const KinematicChain& chain) {
  const int n = chain.dof();
  DofLimits l;
  l.x_min = chain.lower_limits();
  l.x_max = chain.upper_limits();
  l.v_max.resize(n);
  l.a_max.resize(n);
  for (int i = 0; i < n; ++i) {
    const Joint& j = chain.joints()[static_cast<std::size_t>(chain.joint_of_dof(i))];
    l.v_max[i] = j.vel_limit;
    l.a_max[i] = j.acc_limit;
  }
  return l;
}

PlanningProblem::PlanningProblem(KinematicChain chain, ChainState start)
    : vkc(std::move(chain)), x_start(std::move(start)) {
  w_v = default_weights(vkc);
  w_a = w_v;
  limits = DofLimits::from_chain(vkc);
  goal.joints = x_start;
}

void PlanningProblem::validate() const {
  const int n = vkc.dof();
  auto fail = [](const std::string& what) { throw PlanningError("invalid planning problem: " + what); };
  if (x_start.size() != n) fail("x_start has " + std::to_string(x_start.size()) + " entries, chain has " + std::to_string(n));
  if (T < 2) fail("T must be at least 2");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (w_v.size() != n || w_a.size() != n) fail("weight vectors must have one entry per DoF");
  if ((w_v.array() < 0.0).any() || (w_a.array() < 0.0).any()) fail("weights must be non-negative");
  if (limits.x_min.size() != n || limits.x_max.size() != n || limits.v_max.size() != n || limits.a_max.size() != n)
    fail("limit vectors must have one entry per DoF");
  if ((limits.x_min.array() > limits.x_max.array()).any()) fail("limits out of order");
  if (!x_start.allFinite()) fail("x_start is not finite");
  if (!(goal.tolerance > 0.0)) fail("goal tolerance must be positive");
  if (goal.kind == GoalKind::joint_target) {
    const auto count = goal.joint_indices.empty() ? static_cast<std::size_t>(n) : goal.joint_indices.size();
    if (static_cast<std::size_t>(goal.joints.size()) != count) fail("joint goal size mismatch");
    for (int i : goal.joint_indices)
      if (i < 0 || i >= n) fail("joint goal index out of range");
  } else if (goal.kind == GoalKind::link_pose && !vkc.has_link(goal.link)) {
    fail("unknown goal link '" + goal.link + "'");
  }
  for (const Anchor& a : anchors)
    if (!vkc.has_link(a.link)) fail("unknown anchor link '" + a.link + "'");
  if (collision.dist_safe < 0.0 || collision.xi_dist < 0.0) fail("collision tolerances must be non-negative");
  if (ik_hint && ik_hint->size() != n) fail("ik_hint size mismatch");
}

Eigen::VectorXd default_weights(const KinematicChain& chain) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(chain.dof());
  for (int i = 0; i < chain.dof(); ++i) {
    const Joint& j = chain.joints()[static_cast<std::size_t>(chain.joint_of_dof(i))];
    const bool base = std::find(std::begin(kBaseJointNames), std::end(kBaseJointNames), j.name) !=
                      std::end(kBaseJointNames);
    if (base && j.kind == JointKind::revolute) w[i] = 2.0;
  }
  return w;
}

double objective(const StateMatrix& x, const Eigen::VectorXd& w_v, const Eigen::VectorXd& w_a) {
  const Eigen::Index T = x.rows();
  double f = 0.0;
  for (Eigen::Index t = 0; t + 1 < T; ++t)
    f += (w_v.array() * (x.row(t + 1) - x.row(t)).transpose().array()).matrix().squaredNorm();
  for (Eigen::Index t = 1; t + 1 < T; ++t)
    f += (w_a.array() * (x.row(t + 1) - 2.0 * x.row(t) + x.row(t - 1)).transpose().array()).matrix().squaredNorm();
  return f;
}

Eigen::VectorXd chain_constraint(const KinematicChain& vkc, const ChainState& x, const std::vector<Anchor>& anchors) {
  Eigen::VectorXd r(6 * static_cast<Eigen::Index>(anchors.size()));
  if (anchors.empty()) return r;
  const auto poses = link_poses(vkc, x);
  for (std::size_t k = 0; k < anchors.size(); ++k)
    r.segment<6>(6 * static_cast<Eigen::Index>(k)) =
        pose_error(poses[static_cast<std::size_t>(vkc.link_index(anchors[k].link))], anchors[k].pose);
  return r;
}

Eigen::VectorXd goal_error(const KinematicChain& vkc, const ChainState& x, const GoalSpec& goal) {
  vkc.check_state(x);
  if (goal.kind == GoalKind::joint_target) {
    if (goal.joint_indices.empty()) return x - goal.joints;
    Eigen::VectorXd e(static_cast<Eigen::Index>(goal.joint_indices.size()));
    for (std::size_t k = 0; k < goal.joint_indices.size(); ++k)
      e[static_cast<Eigen::Index>(k)] = x[goal.joint_indices[k]] - goal.joints[static_cast<Eigen::Index>(k)];
    return e;
  }
  const std::string& link = goal.kind == GoalKind::ee_pose ? vkc.tip_link() : goal.link;
  return pose_error(forward_kinematics(vkc, x, link), goal.pose).cwiseProduct(goal.pose_mask);
}

double goal_constraint(const KinematicChain& vkc, const ChainState& x, const GoalSpec& goal) {
  return goal_error(vkc, x, goal).squaredNorm() - goal.tolerance;
}

LimitResiduals limit_constraints(const StateMatrix& x, const DofLimits& limits, double dt) {
  const Eigen::Index T = x.rows(), n = x.cols();
  LimitResiduals r;
  r.position = Eigen::MatrixXd::Zero(T, n);
  r.velocity = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(T - 1, 0), n);
  r.acceleration = Eigen::MatrixXd::Zero(std::max<Eigen::Index>(T - 2, 0), n);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      r.position(t, i) = std::max({0.0, x(t, i) - limits.x_max[i], limits.x_min[i] - x(t, i)});
  for (Eigen::Index t = 0; t + 1 < T; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      r.velocity(t, i) = std::max(0.0, std::abs(x(t + 1, i) - x(t, i)) - limits.v_max[i] * dt);
  for (Eigen::Index t = 1; t + 1 < T; ++t)
    for (Eigen::Index i = 0; i < n; ++i)
      r.acceleration(t - 1, i) =
          std::max(0.0, std::abs(x(t + 1, i) - 2.0 * x(t, i) + x(t - 1, i)) - limits.a_max[i] * dt * dt);
  return r;
}

namespace {

bool name_matches(std::string_view pattern, std::string_view name) {
  if (!pattern.empty() && pattern.back() == '*') return name.substr(0, pattern.size() - 1) == pattern.substr(0, pattern.size() - 1);
  return pattern == name;
}

std::string_view group_of(std::string_view link) {
  const auto slash = link.find('/');
  return slash == std::string_view::npos ? std::string_view{} : link.substr(0, slash);
}

std::string_view obstacle_id(const CollisionPrimitive& o) {
  return o.attached_to == kWorldLink ? std::string_view(o.name) : std::string_view(o.attached_to);
}

}  // namespace

bool pair_allowed(const std::vector<AllowedPair>& allowed, std::string_view a, std::string_view b) {
  for (const auto& [p, q] : allowed)
    if ((name_matches(p, a) && name_matches(q, b)) || (name_matches(p, b) && name_matches(q, a))) return true;
  return false;
}

CollisionResidual collision_constraints(const KinematicChain& vkc, const ChainState& x, const CollisionWorld& world,
                                        const CollisionSettings& settings) {
  const auto poses = link_poses(vkc, x);
  const auto& links = vkc.links();
  CollisionResidual r;
  for (std::size_t i = 0; i < links.size(); ++i) {
    for (const CollisionPrimitive& g : links[i].collision_geoms) {
      const RigidTransform pg = poses[i] * g.offset;
      for (const CollisionPrimitive& o : world.obstacles) {
        if (pair_allowed(settings.allowed, links[i].name, obstacle_id(o))) continue;
        r.env += std::max(0.0, settings.dist_safe - signed_distance(g, pg, o, o.offset));
      }
    }
  }
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].collision_geoms.empty()) continue;
    for (std::size_t j = i + 2; j < links.size(); ++j) {
      if (links[j].collision_geoms.empty()) continue;
      const std::string_view gi = group_of(links[i].name), gj = group_of(links[j].name);
      if (!gi.empty() && gi == gj) continue;  // parts of one object
      if (pair_allowed(settings.allowed, links[i].name, links[j].name)) continue;
      for (const CollisionPrimitive& a : links[i].collision_geoms)
        for (const CollisionPrimitive& b : links[j].collision_geoms)
          r.self += std::max(0.0, settings.dist_safe - signed_distance(a, poses[i] * a.offset, b, poses[j] * b.offset));
    }
  }
  return r;
}

std::vector<Residuals::Verdict> Residuals::verdicts(const CollisionSettings& c) const {
  return {{"start", start_matches ? 0.0 : 1.0, 0.0, start_matches},
          {"chain", chain, kChainTolerance, chain <= kChainTolerance},
          {"goal", goal, kGoalTolerance, goal <= kGoalTolerance},
          {"position_limit", position, 0.0, position == 0.0},
          {"velocity_limit", velocity, 0.0, velocity == 0.0},
          {"acceleration_limit", acceleration, 0.0, acceleration == 0.0},
          {"env_collision", env_collision, c.xi_dist, env_collision <= c.xi_dist},
          {"self_collision", self_collision, c.xi_dist, self_collision <= c.xi_dist}};
}

bool Residuals::feasible(const CollisionSettings& c) const {
  const auto v = verdicts(c);
  return std::all_of(v.begin(), v.end(), [](const Verdict& d) { return d.pass; });
}

Residuals verify(const PlanningProblem& problem, const StateMatrix& x) {
  problem.validate();
  if (x.cols() != problem.vkc.dof() || x.rows() < 2) throw PlanningError("verify: trajectory shape does not match the problem");
  Residuals r;
  r.start_matches = (x.row(0).transpose() - problem.x_start).cwiseAbs().maxCoeff() <= 1e-12;
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const ChainState xt = x.row(t).transpose();
    const Eigen::VectorXd h = chain_constraint(problem.vkc, xt, problem.anchors);
    if (h.size() > 0) r.chain = std::max(r.chain, h.cwiseAbs().maxCoeff());
    const CollisionResidual c = collision_constraints(problem.vkc, xt, problem.world, problem.collision);
    r.env_collision = std::max(r.env_collision, c.env);
    r.self_collision = std::max(r.self_collision, c.self);
  }
  r.goal = goal_constraint(problem.vkc, x.row(x.rows() - 1).transpose(), problem.goal);
  const LimitResiduals l = limit_constraints(x, problem.limits, problem.dt);
  r.position = l.position.size() ? l.position.maxCoeff() : 0.0;
  r.velocity = l.velocity.size() ? l.velocity.maxCoeff() : 0.0;
  r.acceleration = l.acceleration.size() ? l.acceleration.maxCoeff() : 0.0;
  r.objective = objective(x, problem.w_v, problem.w_a);
  return r;
}

}  // namespace aerovkc
