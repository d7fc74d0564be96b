#include "aerovkc/sequence.hpp"

#include <algorithm>

namespace aerovkc {

namespace {

constexpr int kRobotDof = 10;

/// Object state entries of the inverted chain, in VKC order (values negated).
Eigen::VectorXd inverted_values(const KinematicChain& original, const KinematicChain& inverted, const ChainState& q) {
  Eigen::VectorXd out(inverted.dof());
  for (int i = 0; i < inverted.dof(); ++i) {
    const std::string& name = inverted.joints()[static_cast<std::size_t>(inverted.joint_of_dof(i))].name;
    out[i] = -q[original.dof_index(original.joint_index(name))];
  }
  return out;
}

/// Arm links that touch an object while grasping it.
std::vector<AllowedPair> grasp_assembly(const std::string& object) {
  return {{std::string(kGripperLink), object + "/*"}, {"link3", object + "/*"}};
}

}  // namespace

SceneObject::SceneObject(std::string n, KinematicChain c)
    : name(std::move(n)), chain(std::move(c)), q(Eigen::VectorXd::Zero(chain.dof())) {}

int Scene::object_index(std::string_view name) const {
  for (std::size_t i = 0; i < objects.size(); ++i)
    if (objects[i].name == name) return static_cast<int>(i);
  throw PlanningError("unknown object '" + std::string(name) + "'");
}

SceneState SceneState::initial(const Scene& scene) {
  SceneState s;
  s.robot = scene.robot_start;
  for (const SceneObject& o : scene.objects) {
    s.object_q.push_back(o.q);
    s.object_base.push_back(o.base_pose);
  }
  s.parent.resize(scene.objects.size());
  return s;
}

std::string_view to_string(PreAction a) {
  switch (a) {
    case PreAction::none: return "none";
    case PreAction::attach: return "attach";
    case PreAction::detach: return "detach";
  }
  return "?";
}

PreAction pre_action_from_string(std::string_view s) {
  if (s == "none") return PreAction::none;
  if (s == "attach") return PreAction::attach;
  if (s == "detach") return PreAction::detach;
  throw PlanningError("unknown pre_action '" + std::string(s) + "'");
}

SequenceError::SequenceError(int step, const std::string& what)
    : PlanningError("step " + std::to_string(step) + ": " + what), step_(step) {}

ActiveChain active_chain(const Scene& scene, const SceneState& state) {
  KinematicChain robot = build_robot_chain(scene.platform, scene.base_limits);
  if (!state.attached) return {std::move(robot), state.robot};
  const auto k = static_cast<std::size_t>(*state.attached);
  const SceneObject& obj = scene.objects[k];
  const KinematicChain inverted = invert_chain(obj.chain, obj.handle_link());
  KinematicChain vkc = attach_virtual_joint(robot, kToolLink, inverted, state.grasp);
  ChainState x(vkc.dof());
  x << state.robot, inverted_values(obj.chain, inverted, state.object_q[k]);
  return {std::move(vkc), std::move(x)};
}

RigidTransform object_link_pose(const Scene& scene, const SceneState& state, int object, std::string_view link) {
  const auto k = static_cast<std::size_t>(object);
  return state.object_base[k] * forward_kinematics(scene.objects[k].chain, state.object_q[k], link);
}

CollisionWorld scene_world(const Scene& scene, const SceneState& state) {
  CollisionWorld w = scene.world;
  for (std::size_t k = 0; k < scene.objects.size(); ++k) {
    if (state.attached && *state.attached == static_cast<int>(k)) continue;
    // Objects resting in the held object move with it.
    if (state.attached && state.parent[k] && state.parent[k]->object == *state.attached) continue;
    const SceneObject& o = scene.objects[k];
    const auto poses = link_poses(o.chain, state.object_q[k]);
    for (std::size_t l = 0; l < poses.size(); ++l)
      for (const CollisionPrimitive& g : o.chain.links()[l].collision_geoms) {
        CollisionPrimitive placed = g;
        placed.offset = state.object_base[k] * poses[l] * g.offset;
        placed.attached_to = o.chain.links()[l].name;
        w.obstacles.push_back(std::move(placed));
      }
  }
  return w;
}

PlanningProblem build_problem(const Scene& scene, SceneState& state, const TaskStep& step, const PlannerConfig& cfg) {
  std::optional<int> released;
  switch (step.pre_action) {
    case PreAction::attach: {
      if (state.attached) throw PlanningError("attach while already holding an object");
      const int k = scene.object_index(step.object);
      const SceneObject& obj = scene.objects[static_cast<std::size_t>(k)];
      const KinematicChain robot = build_robot_chain(scene.platform, scene.base_limits);
      state.attached = k;
      state.grasp = forward_kinematics(robot, state.robot, kToolLink).inverse() *
                    object_link_pose(scene, state, k, obj.handle_link());
      break;
    }
    case PreAction::detach: {
      if (!state.attached) throw PlanningError("detach while holding nothing");
      const int k = *state.attached;
      released = k;
      state.attached.reset();
      if (scene.objects[static_cast<std::size_t>(k)].movable) {
        const RigidTransform& pose = state.object_base[static_cast<std::size_t>(k)];
        for (std::size_t c = 0; c < scene.objects.size(); ++c) {
          const auto& vol = scene.objects[c].container;
          if (static_cast<int>(c) == k || !vol) continue;
          if (!inside_container(scene, state, static_cast<int>(c), pose.translation)) continue;
          const RigidTransform link_pose = object_link_pose(scene, state, static_cast<int>(c), vol->link);
          state.parent[static_cast<std::size_t>(k)] = SceneState::Parent{static_cast<int>(c), vol->link, link_pose.inverse() * pose};
          break;
        }
      }
      break;
    }
    case PreAction::none: break;
  }

  ActiveChain active = active_chain(scene, state);
  PlanningProblem p(active.vkc, active.x);
  p.T = cfg.T;
  p.dt = cfg.dt;
  p.world = scene_world(scene, state);
  p.collision = cfg.collision;
  for (const auto& pair : arm_collision_exclusions()) p.collision.allowed.push_back(pair);
  p.collision.allowed.insert(p.collision.allowed.end(), step.allowed.begin(), step.allowed.end());

  for (int i = 0; i < p.vkc.dof(); ++i) {
    if (i < 3) p.w_v[i] = cfg.w_base_linear;
    else if (i < 6) p.w_v[i] = cfg.w_base_angular;
    else if (i < kRobotDof) p.w_v[i] = cfg.w_arm;
    else p.w_v[i] = cfg.w_object;
  }
  p.w_a = p.w_v;

  // The gripper starts in contact with an object it has just let go of.
  if (released)
    for (const auto& [link, pattern] : grasp_assembly(scene.objects[static_cast<std::size_t>(*released)].name))
      p.collision.allowed.emplace_back(link, pattern);
  if (state.attached) {
    const SceneObject& obj = scene.objects[static_cast<std::size_t>(*state.attached)];
    for (const auto& [link, pattern] : grasp_assembly(obj.name)) p.collision.allowed.emplace_back(link, pattern);
    if (!obj.movable) p.anchors.push_back({obj.chain.root_link(), state.object_base[static_cast<std::size_t>(*state.attached)]});
  }

  const StepGoal& g = step.goal;
  p.goal.kind = g.kind;
  p.goal.tolerance = g.tolerance;
  p.goal.pose_mask = g.mask;
  if (!g.grasp_object.empty()) {
    const int k = scene.object_index(g.grasp_object);
    const SceneObject& obj = scene.objects[static_cast<std::size_t>(k)];
    p.goal.kind = GoalKind::link_pose;
    p.goal.link = std::string(kToolLink);
    p.goal.pose = object_link_pose(scene, state, k, obj.handle_link()) * obj.grasp_offset.inverse();
    for (const auto& [link, pattern] : grasp_assembly(obj.name)) p.collision.allowed.emplace_back(link, pattern);
  } else if (g.kind == GoalKind::joint_target) {
    p.goal.joints.resize(static_cast<Eigen::Index>(g.joints.size()));
    for (std::size_t k = 0; k < g.joints.size(); ++k) {
      const auto& [name, value] = g.joints[k];
      const int joint = p.vkc.joint_index(name);
      const int dof = p.vkc.dof_index(joint);
      if (dof < 0) throw PlanningError("goal joint '" + name + "' is fixed");
      // Object joints sit on the inverted chain, whose values are negated.
      const bool object_joint = dof >= kRobotDof;
      p.goal.joint_indices.push_back(dof);
      p.goal.joints[static_cast<Eigen::Index>(k)] = object_joint ? -value : value;
    }
  } else {
    p.goal.link = g.link;
    p.goal.pose = g.pose;
  }

  if (step.robot_hint) {
    if (step.robot_hint->size() != kRobotDof) throw PlanningError("robot_hint must have 10 entries");
    ChainState hint = active.x;
    hint.head(kRobotDof) = *step.robot_hint;
    p.ik_hint = hint;
  }
  p.validate();
  return p;
}

void apply_final_state(const Scene& scene, SceneState& state, const KinematicChain& vkc, const ChainState& x_T) {
  state.robot = x_T.head(kRobotDof);
  if (!state.attached) return;
  const auto k = static_cast<std::size_t>(*state.attached);
  const SceneObject& obj = scene.objects[k];
  for (int i = kRobotDof; i < vkc.dof(); ++i) {
    const std::string& name = vkc.joints()[static_cast<std::size_t>(vkc.joint_of_dof(i))].name;
    state.object_q[k][obj.chain.dof_index(obj.chain.joint_index(name))] = -x_T[i];
  }
  if (obj.movable) {
    state.object_base[k] = forward_kinematics(vkc, x_T, obj.chain.root_link());
    state.parent[k].reset();
  }
  for (std::size_t c = 0; c < scene.objects.size(); ++c) {
    const auto& par = state.parent[c];
    if (par && par->object == static_cast<int>(k))
      state.object_base[c] = object_link_pose(scene, state, par->object, par->link) * par->offset;
  }
}

bool inside_container(const Scene& scene, const SceneState& state, int k, const Vector3d& p) {
  const auto& vol = scene.objects[static_cast<std::size_t>(k)].container;
  if (!vol) return false;
  const RigidTransform frame = object_link_pose(scene, state, k, vol->link) * vol->offset;
  const Vector3d local = frame.inverse() * p;
  return (local.cwiseAbs() - vol->half_extents).maxCoeff() <= 0.0;
}

std::vector<PlannedStep> execute_sequence(const Scene& scene, const std::vector<TaskStep>& steps,
                                          const PlannerConfig& cfg) {
  std::vector<PlannedStep> out;
  SceneState state = SceneState::initial(scene);
  for (std::size_t s = 0; s < steps.size(); ++s) {
    const int index = static_cast<int>(s) + 1;
    SceneState before = state;
    PlanningProblem problem = [&] {
      try {
        return build_problem(scene, state, steps[s], cfg);
      } catch (const Error& e) {
        throw SequenceError(index, e.what());
      }
    }();
    SolveResult r = solve(problem, cfg.solver);
    if (!r.success) throw SequenceError(index, "'" + steps[s].name + "' infeasible: " + r.report);
    apply_final_state(scene, state, problem.vkc, r.trajectory.states.bottomRows(1).transpose());
    PlannedStep planned{steps[s].name, std::move(problem), std::move(r.trajectory), state.attached, std::move(before), state};
    out.push_back(std::move(planned));
  }
  return out;
}

}  // namespace aerovkc
