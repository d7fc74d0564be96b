// Desk-scale scenes for the bulb, cabinet and drawer tasks. All dimensions are
// our own choices (metres, radians).
#include "aerovkc/scenario.hpp"

namespace aerovkc {

namespace {

RigidTransform at(double x, double y, double z, const Matrix3d& r = Matrix3d::Identity()) {
  return {r, Vector3d(x, y, z)};
}

CollisionPrimitive box(const std::string& name, const Vector3d& center, const Vector3d& half) {
  return CollisionPrimitive::box(name, half, at(center.x(), center.y(), center.z()));
}

Link link(const std::string& name, double mass, const Vector3d& com, const Vector3d& inertia,
          std::vector<CollisionPrimitive> geoms) {
  Link l;
  l.name = name;
  l.mass = mass;
  l.com = com;
  l.inertia = inertia.asDiagonal();
  l.collision_geoms = std::move(geoms);
  return l;
}

Joint fixed(const std::string& name, const RigidTransform& origin) {
  Joint j;
  j.name = name;
  j.kind = JointKind::fixed;
  j.origin = origin;
  return j;
}

/// Knob on a standoff pointing back along +y towards the surface it is mounted on.
std::vector<CollisionPrimitive> knob(double standoff) {
  return {CollisionPrimitive::sphere("knob", 0.015),
          CollisionPrimitive::capsule("standoff", 0.008, standoff / 2 - 0.012,
                                      at(0, standoff / 2, 0, so3::rot_x(M_PI / 2)))};
}

SceneObject toy(const Vector3d& position) {
  SceneObject o("toy", KinematicChain({link("toy/toy", 0.05, Vector3d::Zero(), Vector3d::Constant(1.8e-5),
                                            {CollisionPrimitive::sphere("ball", 0.03)})},
                                      {}));
  o.base_pose = at(position.x(), position.y(), position.z());
  o.grasp_offset = at(0, 0, -0.05);
  o.movable = true;
  return o;
}

CollisionPrimitive floor_box() { return box("floor", {0, 0, -0.05}, {3, 3, 0.05}); }

VirtualBaseLimits room_limits() {
  VirtualBaseLimits l;
  l.position_min = Vector3d(-2, -2, 0.2);
  l.position_max = Vector3d(2, 2, 2);
  return l;
}

Scenario task1(const PlatformParams& platform) {
  Scenario s;
  s.name = "task1";
  s.description = "Install a light bulb: approach, pick up, flip and carry under the socket, feed in.";
  s.scene.platform = platform;
  s.scene.base_limits = room_limits();
  s.scene.robot_start = robot_state({0, 0, 1.0}, Vector3d::Zero(), Vector4d::Zero());
  auto& w = s.scene.world.obstacles;
  w.push_back(floor_box());
  w.push_back(box("table", {0.8, 0, 0.25}, {0.2, 0.2, 0.25}));
  w.push_back(box("ceiling", {0, 0, 1.85}, {3, 3, 0.05}));
  w.push_back(box("socket", {-0.6, 0, 1.78}, {0.03, 0.03, 0.02}));

  // Frame at the tip of the screw base, z towards the glass.
  SceneObject bulb("bulb", KinematicChain({link("bulb/bulb", 0.03, {0, 0, 0.06}, Vector3d(1.5e-5, 1.5e-5, 1e-5),
                                                {CollisionPrimitive::capsule("screw", 0.012, 0.006, at(0, 0, 0.018)),
                                                 CollisionPrimitive::sphere("glass", 0.035, at(0, 0, 0.065))})},
                                          {}));
  bulb.base_pose = at(0.8, 0, 0.5);
  bulb.grasp_offset = at(0, 0, -0.09);
  bulb.movable = true;
  s.scene.objects.push_back(bulb);

  const Matrix3d down = so3::rot_x(M_PI);
  TaskStep approach;
  approach.name = "approach";
  approach.goal.grasp_object = "bulb";
  approach.goal.kind = GoalKind::link_pose;

  TaskStep pick;
  pick.name = "pick_up";
  pick.pre_action = PreAction::attach;
  pick.object = "bulb";
  pick.goal.kind = GoalKind::link_pose;
  pick.goal.link = "bulb/bulb";
  pick.goal.pose = at(0.8, 0, 0.75);
  pick.allowed = {{"bulb/*", "table"}};

  TaskStep flip;
  flip.name = "rotate_and_translate";
  flip.goal.kind = GoalKind::link_pose;
  flip.goal.link = "bulb/bulb";
  flip.goal.pose = at(-0.6, 0, 1.66, down);
  flip.robot_hint = robot_state({-0.6, 0, 1.24}, {M_PI, 0, 0}, Vector4d::Zero());

  TaskStep feed;
  feed.name = "feed_in";
  feed.goal.kind = GoalKind::link_pose;
  feed.goal.link = "bulb/bulb";
  feed.goal.pose = at(-0.6, 0, 1.78, down);
  feed.allowed = {{"bulb/*", "socket"}, {"bulb/*", "ceiling"}};
  feed.robot_hint = robot_state({-0.6, 0, 1.36}, {M_PI, 0, 0}, Vector4d::Zero());

  s.steps = {approach, pick, flip, feed};
  return s;
}

Scenario task2(const PlatformParams& platform) {
  Scenario s;
  s.name = "task2";
  s.description = "Relocate a toy into a closed cabinet: open the door, place the toy inside, close the door.";
  s.scene.platform = platform;
  s.scene.base_limits = room_limits();
  s.scene.robot_start = robot_state({0, 0, 0.9}, Vector3d::Zero(), Vector4d::Zero());
  auto& w = s.scene.world.obstacles;
  w.push_back(floor_box());
  // Carcass: interior x in [-0.25, 0.25], y in [0.6, 1.0], z in [0.15, 0.55].
  w.push_back(box("cabinet_top", {0, 0.8, 0.56}, {0.27, 0.21, 0.01}));
  w.push_back(box("cabinet_bottom", {0, 0.8, 0.075}, {0.27, 0.21, 0.075}));
  w.push_back(box("cabinet_left", {-0.26, 0.8, 0.35}, {0.01, 0.21, 0.2}));
  w.push_back(box("cabinet_right", {0.26, 0.8, 0.35}, {0.01, 0.21, 0.2}));
  w.push_back(box("cabinet_back", {0, 1.01, 0.35}, {0.27, 0.01, 0.22}));
  w.push_back(box("side_table", {0.6, 0, 0.2}, {0.15, 0.15, 0.2}));

  // Door hinged at the left front edge; positive angles swing it outwards.
  Joint hinge;
  hinge.name = "cabinet/hinge";
  hinge.kind = JointKind::revolute;
  hinge.axis = -Vector3d::UnitZ();
  hinge.limits = {0.0, 2.0};
  hinge.vel_limit = 1.0;
  hinge.acc_limit = 3.0;
  SceneObject cabinet("cabinet",
                      KinematicChain({link("cabinet/frame", 0, Vector3d::Zero(), Vector3d::Zero(), {}),
                                      link("cabinet/door", 1.0, {0.27, 0, 0}, Vector3d(0.015, 0.039, 0.024),
                                           {CollisionPrimitive::box("panel", {0.27, 0.01, 0.21}, at(0.27, 0, 0))}),
                                      link("cabinet/handle", 0, Vector3d::Zero(), Vector3d::Zero(), knob(0.08))},
                                     {hinge, fixed("cabinet/handle_mount", at(0.48, -0.09, 0.15))}));
  cabinet.base_pose = at(-0.27, 0.59, 0.35);
  cabinet.container = ContainerVolume{"cabinet/frame", at(0.27, 0.21, 0), {0.25, 0.2, 0.2}};
  s.scene.objects.push_back(cabinet);
  s.scene.objects.push_back(toy({0.6, 0, 0.43}));

  TaskStep s1;
  s1.name = "approach_door";
  s1.goal.grasp_object = "cabinet";
  s1.goal.kind = GoalKind::link_pose;

  TaskStep s2;
  s2.name = "open_door";
  s2.pre_action = PreAction::attach;
  s2.object = "cabinet";
  s2.goal.joints = {{"cabinet/hinge", 1.8}};
  s2.allowed = {{"cabinet/*", "cabinet_*"}};

  TaskStep s3;
  s3.name = "pick_up_toy";
  s3.pre_action = PreAction::detach;
  s3.goal.grasp_object = "toy";
  s3.goal.kind = GoalKind::link_pose;

  TaskStep s4;
  s4.name = "place_in_cabinet";
  s4.pre_action = PreAction::attach;
  s4.object = "toy";
  s4.goal.kind = GoalKind::link_pose;
  s4.goal.link = "toy/toy";
  s4.goal.pose = at(0.06, 0.76, 0.33);
  s4.goal.mask << 1, 1, 1, 0, 0, 0;
  s4.allowed = {{"toy/*", "side_table"}, {"toy/*", "cabinet_*"}};
  s4.robot_hint = robot_state({0.06, 0.38, 0.33}, {M_PI / 2, 0, 0}, Vector4d::Zero());

  TaskStep s5;
  s5.name = "approach_door_again";
  s5.pre_action = PreAction::detach;
  s5.goal.grasp_object = "cabinet";
  s5.goal.kind = GoalKind::link_pose;

  TaskStep s6;
  s6.name = "close_door";
  s6.pre_action = PreAction::attach;
  s6.object = "cabinet";
  s6.goal.joints = {{"cabinet/hinge", 0.0}};
  s6.allowed = {{"cabinet/*", "cabinet_*"}};

  s.steps = {s1, s2, s3, s4, s5, s6};
  return s;
}

Scenario drawer(const PlatformParams& platform) {
  Scenario s;
  s.name = "drawer";
  s.description = "Relocate a toy into a closed drawer: open the drawer, drop the toy in, close the drawer.";
  s.scene.platform = platform;
  s.scene.base_limits = room_limits();
  s.scene.robot_start = robot_state({0, 0, 0.9}, Vector3d::Zero(), Vector4d::Zero());
  auto& w = s.scene.world.obstacles;
  w.push_back(floor_box());
  // Chest with one drawer slot: x in [-0.23, 0.23], y in [0.6, 0.98], z in [0.24, 0.43].
  w.push_back(box("chest_top", {0, 0.8, 0.44}, {0.25, 0.2, 0.01}));
  w.push_back(box("chest_base", {0, 0.8, 0.12}, {0.25, 0.2, 0.12}));
  w.push_back(box("chest_left", {-0.24, 0.8, 0.34}, {0.01, 0.2, 0.1}));
  w.push_back(box("chest_right", {0.24, 0.8, 0.34}, {0.01, 0.2, 0.1}));
  w.push_back(box("chest_back", {0, 0.99, 0.34}, {0.25, 0.01, 0.1}));
  w.push_back(box("side_table", {-0.6, 0.1, 0.2}, {0.15, 0.15, 0.2}));

  Joint slide;
  slide.name = "drawer/slide";
  slide.kind = JointKind::prismatic;
  slide.axis = -Vector3d::UnitY();
  slide.limits = {0.0, 0.3};
  slide.vel_limit = 0.5;
  slide.acc_limit = 2.0;
  // Open-top tray; frame at the bottom centre of the front panel.
  std::vector<CollisionPrimitive> tray = {
      CollisionPrimitive::box("floor", {0.21, 0.17, 0.01}, at(0, 0.19, 0.01)),
      CollisionPrimitive::box("front", {0.23, 0.01, 0.09}, at(0, 0.01, 0.09)),
      CollisionPrimitive::box("back", {0.21, 0.01, 0.06}, at(0, 0.35, 0.06)),
      CollisionPrimitive::box("left", {0.01, 0.17, 0.06}, at(-0.2, 0.19, 0.06)),
      CollisionPrimitive::box("right", {0.01, 0.17, 0.06}, at(0.2, 0.19, 0.06))};
  SceneObject d("drawer", KinematicChain({link("drawer/frame", 0, Vector3d::Zero(), Vector3d::Zero(), {}),
                                          link("drawer/tray", 0.5, {0, 0.18, 0.05}, Vector3d(0.006, 0.008, 0.012), tray),
                                          link("drawer/handle", 0, Vector3d::Zero(), Vector3d::Zero(), knob(0.09))},
                                         {slide, fixed("drawer/handle_mount", at(0, -0.09, 0.13))}));
  d.base_pose = at(0, 0.6, 0.25);
  d.container = ContainerVolume{"drawer/tray", at(0, 0.19, 0.1), {0.19, 0.16, 0.09}};
  s.scene.objects.push_back(d);
  s.scene.objects.push_back(toy({-0.6, 0.1, 0.43}));

  TaskStep s1;
  s1.name = "approach_drawer";
  s1.goal.grasp_object = "drawer";
  s1.goal.kind = GoalKind::link_pose;

  TaskStep s2;
  s2.name = "open_drawer";
  s2.pre_action = PreAction::attach;
  s2.object = "drawer";
  s2.goal.joints = {{"drawer/slide", 0.25}};
  s2.allowed = {{"drawer/*", "chest_*"}};

  TaskStep s3;
  s3.name = "pick_up_toy";
  s3.pre_action = PreAction::detach;
  s3.goal.grasp_object = "toy";
  s3.goal.kind = GoalKind::link_pose;

  TaskStep s4;
  s4.name = "drop_off_toy";
  s4.pre_action = PreAction::attach;
  s4.object = "toy";
  s4.goal.kind = GoalKind::link_pose;
  s4.goal.link = "toy/toy";
  s4.goal.pose = at(0, 0.47, 0.33);
  s4.goal.mask << 1, 1, 1, 0, 0, 0;
  s4.allowed = {{"toy/*", "side_table"}, {"toy/*", "drawer/*"}};

  TaskStep s5;
  s5.name = "approach_handle";
  s5.pre_action = PreAction::detach;
  s5.goal.grasp_object = "drawer";
  s5.goal.kind = GoalKind::link_pose;

  TaskStep s6;
  s6.name = "close_drawer";
  s6.pre_action = PreAction::attach;
  s6.object = "drawer";
  s6.goal.joints = {{"drawer/slide", 0.0}};
  s6.allowed = {{"drawer/*", "chest_*"}};

  s.steps = {s1, s2, s3, s4, s5, s6};
  return s;
}

}  // namespace

std::vector<std::string> builtin_scenario_names() { return {"task1", "task2", "drawer"}; }

Scenario builtin_scenario(std::string_view name, const PlatformParams& platform) {
  if (name == "task1") return task1(platform);
  if (name == "task2") return task2(platform);
  if (name == "drawer") return drawer(platform);
  throw ScenarioError("unknown built-in scenario '" + std::string(name) + "'");
}

}  // namespace aerovkc
