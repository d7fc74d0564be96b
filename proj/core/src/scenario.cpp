#include "aerovkc/scenario.hpp"

#include "aerovkc/chain_io.hpp"

#include <fstream>

namespace aerovkc {

using nlohmann::json;

namespace {

json vec3(const Vector3d& v) { return {v.x(), v.y(), v.z()}; }

json limits_to_json(const VirtualBaseLimits& l) {
  return {{"position_min", vec3(l.position_min)}, {"position_max", vec3(l.position_max)},
          {"rpy_min", vec3(l.rpy_min)},           {"rpy_max", vec3(l.rpy_max)},
          {"linear_vel", l.linear_vel},           {"angular_vel", l.angular_vel},
          {"linear_acc", l.linear_acc},           {"angular_acc", l.angular_acc}};
}

VirtualBaseLimits limits_from_json(const json& j) {
  VirtualBaseLimits l;
  if (j.contains("position_min")) l.position_min = vec3_from_json(j.at("position_min"));
  if (j.contains("position_max")) l.position_max = vec3_from_json(j.at("position_max"));
  if (j.contains("rpy_min")) l.rpy_min = vec3_from_json(j.at("rpy_min"));
  if (j.contains("rpy_max")) l.rpy_max = vec3_from_json(j.at("rpy_max"));
  l.linear_vel = j.value("linear_vel", l.linear_vel);
  l.angular_vel = j.value("angular_vel", l.angular_vel);
  l.linear_acc = j.value("linear_acc", l.linear_acc);
  l.angular_acc = j.value("angular_acc", l.angular_acc);
  return l;
}

json robot_to_json(const ChainState& x) {
  return {{"position", vec3(base_position(x))}, {"rpy", vec3(base_rpy(x))}, {"arm", vector_to_json(x.tail(4))}};
}

ChainState robot_from_json(const json& j) {
  const Eigen::VectorXd arm = j.contains("arm") ? vector_from_json(j.at("arm")) : Eigen::VectorXd::Zero(4);
  if (arm.size() != 4) throw ScenarioError("robot state needs 4 arm angles");
  return robot_state(vec3_from_json(j.at("position")), j.contains("rpy") ? vec3_from_json(j.at("rpy")) : Vector3d::Zero(),
                     arm);
}

json object_to_json(const SceneObject& o) {
  json j = {{"name", o.name},
            {"chain", chain_to_json(o.chain)},
            {"base_pose", transform_to_json(o.base_pose)},
            {"q", vector_to_json(o.q)},
            {"grasp_offset", transform_to_json(o.grasp_offset)},
            {"damping", o.damping},
            {"friction", o.friction},
            {"movable", o.movable}};
  if (o.container)
    j["container"] = {{"link", o.container->link},
                      {"offset", transform_to_json(o.container->offset)},
                      {"half_extents", vec3(o.container->half_extents)}};
  return j;
}

SceneObject object_from_json(const json& j) {
  SceneObject o(j.at("name").get<std::string>(), chain_from_json(j.at("chain")));
  const std::string prefix = o.name + "/";
  for (const Link& l : o.chain.links())
    if (l.name.rfind(prefix, 0) != 0) throw ScenarioError("link '" + l.name + "' of object '" + o.name + "' lacks the prefix '" + prefix + "'");
  if (j.contains("base_pose")) o.base_pose = transform_from_json(j.at("base_pose"));
  if (j.contains("q")) o.q = vector_from_json(j.at("q"));
  if (o.q.size() != o.chain.dof()) throw ScenarioError("object '" + o.name + "': q has the wrong size");
  if (j.contains("grasp_offset")) o.grasp_offset = transform_from_json(j.at("grasp_offset"));
  o.damping = j.value("damping", o.damping);
  o.friction = j.value("friction", o.friction);
  o.movable = j.value("movable", o.chain.dof() == 0);
  if (o.damping < 0.0 || o.friction < 0.0) throw ScenarioError("object '" + o.name + "': negative damping or friction");
  if (o.movable && o.chain.dof() != 0) throw ScenarioError("object '" + o.name + "': only rigid objects can be movable");
  if (j.contains("container")) {
    const json& c = j.at("container");
    ContainerVolume v;
    v.link = c.at("link").get<std::string>();
    o.chain.link_index(v.link);
    if (c.contains("offset")) v.offset = transform_from_json(c.at("offset"));
    v.half_extents = vec3_from_json(c.at("half_extents"));
    o.container = v;
  }
  return o;
}

json goal_to_json(const StepGoal& g) {
  json j;
  if (!g.grasp_object.empty()) {
    j["kind"] = "grasp";
    j["object"] = g.grasp_object;
  } else {
    j["kind"] = std::string(to_string(g.kind));
    if (g.kind == GoalKind::joint_target) {
      json joints = json::array();
      for (const auto& [name, value] : g.joints) joints.push_back({{"joint", name}, {"value", value}});
      j["joints"] = joints;
    } else {
      if (!g.link.empty()) j["link"] = g.link;
      j["pose"] = transform_to_json(g.pose);
      j["mask"] = vector_to_json(g.mask);
    }
  }
  j["tolerance"] = g.tolerance;
  return j;
}

StepGoal goal_from_json(const json& j) {
  StepGoal g;
  const std::string kind = j.at("kind").get<std::string>();
  g.tolerance = j.value("tolerance", g.tolerance);
  if (kind == "grasp") {
    g.kind = GoalKind::link_pose;
    g.grasp_object = j.at("object").get<std::string>();
    return g;
  }
  g.kind = goal_kind_from_string(kind);
  if (g.kind == GoalKind::joint_target) {
    for (const json& e : j.at("joints")) g.joints.emplace_back(e.at("joint").get<std::string>(), e.at("value").get<double>());
    if (g.joints.empty()) throw ScenarioError("joint goal lists no joints");
  } else {
    g.link = j.value("link", std::string());
    if (g.kind == GoalKind::link_pose && g.link.empty()) throw ScenarioError("link_pose goal needs a link");
    g.pose = transform_from_json(j.at("pose"));
    if (j.contains("mask")) {
      const Eigen::VectorXd m = vector_from_json(j.at("mask"));
      if (m.size() != 6) throw ScenarioError("goal mask needs 6 entries");
      g.mask = m;
    }
  }
  return g;
}

json step_to_json(const TaskStep& s) {
  json j = {{"name", s.name}, {"pre_action", std::string(to_string(s.pre_action))}, {"goal", goal_to_json(s.goal)}};
  if (!s.object.empty()) j["object"] = s.object;
  json allowed = json::array();
  for (const auto& [a, b] : s.allowed) allowed.push_back({a, b});
  j["allowed"] = allowed;
  if (s.robot_hint) j["robot_hint"] = robot_to_json(*s.robot_hint);
  return j;
}

TaskStep step_from_json(const json& j) {
  TaskStep s;
  s.name = j.at("name").get<std::string>();
  s.pre_action = pre_action_from_string(j.value("pre_action", std::string("none")));
  s.object = j.value("object", std::string());
  if (s.pre_action == PreAction::attach && s.object.empty()) throw ScenarioError("step '" + s.name + "': attach needs an object");
  s.goal = goal_from_json(j.at("goal"));
  if (j.contains("allowed"))
    for (const json& p : j.at("allowed")) s.allowed.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
  if (j.contains("robot_hint")) s.robot_hint = robot_from_json(j.at("robot_hint"));
  return s;
}

}  // namespace

ChainState robot_state(const Vector3d& position, const Vector3d& rpy, const Vector4d& arm) {
  ChainState x = ChainState::Zero(10);
  set_base_pose(x, position, rpy);
  x.tail(4) = arm;
  return x;
}

json scenario_to_json(const Scenario& s) {
  json world = json::array();
  for (const CollisionPrimitive& o : s.scene.world.obstacles) world.push_back(collision_to_json(o));
  json objects = json::array();
  for (const SceneObject& o : s.scene.objects) objects.push_back(object_to_json(o));
  json steps = json::array();
  for (const TaskStep& t : s.steps) steps.push_back(step_to_json(t));
  return {{"name", s.name},
          {"description", s.description},
          {"base_limits", limits_to_json(s.scene.base_limits)},
          {"robot_start", robot_to_json(s.scene.robot_start)},
          {"world", world},
          {"objects", objects},
          {"steps", steps}};
}

Scenario scenario_from_json(const json& j, const PlatformParams& platform) {
  try {
    Scenario s;
    s.name = j.value("name", std::string("scenario"));
    s.description = j.value("description", std::string());
    s.scene.platform = platform;
    if (j.contains("base_limits")) s.scene.base_limits = limits_from_json(j.at("base_limits"));
    s.scene.robot_start = robot_from_json(j.at("robot_start"));
    if (j.contains("world"))
      for (const json& o : j.at("world")) s.scene.world.obstacles.push_back(collision_from_json(o));
    if (j.contains("objects"))
      for (const json& o : j.at("objects")) s.scene.objects.push_back(object_from_json(o));
    for (std::size_t a = 0; a < s.scene.objects.size(); ++a)
      for (std::size_t b = a + 1; b < s.scene.objects.size(); ++b)
        if (s.scene.objects[a].name == s.scene.objects[b].name)
          throw ScenarioError("duplicate object '" + s.scene.objects[a].name + "'");
    if (j.contains("steps"))
      for (const json& t : j.at("steps")) s.steps.push_back(step_from_json(t));
    for (const TaskStep& t : s.steps) {
      if (!t.object.empty()) s.scene.object_index(t.object);
      if (!t.goal.grasp_object.empty()) s.scene.object_index(t.goal.grasp_object);
    }
    return s;
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("invalid scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path, const PlatformParams& platform) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j, platform);
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ScenarioError("cannot write '" + path.string() + "'");
  out << scenario_to_json(s).dump(2) << '\n';
}

}  // namespace aerovkc
