#include "aerovkc/platform.hpp"

#include "aerovkc/chain_io.hpp"

#include <fstream>
#include <sstream>

namespace aerovkc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("invalid platform parameters: " + what);
}

void check_inertia(const Matrix3d& i, const std::string& what) {
  Link probe;
  probe.name = what;
  probe.mass = 1.0;
  probe.inertia = i;
  try {
    validate_link(probe);
  } catch (const KinematicsError& e) {
    throw Error(std::string("invalid platform parameters: ") + e.what());
  }
}

nlohmann::json diag_json(const Matrix3d& m) { return {m(0, 0), m(1, 1), m(2, 2)}; }

Matrix3d inertia_from_json(const nlohmann::json& j) {
  if (j.is_array() && j.size() == 3 && j[0].is_number()) return vec3_from_json(j).asDiagonal();
  Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
  return m;
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

double VehicleParams::mass() const { return m0 + m_gen[0] + m_gen[1] + m_gen[2] + m_gen[3]; }

void PlatformParams::validate() const {
  const VehicleParams& v = vehicle;
  require(v.m0 > 0.0, "m0 must be positive");
  check_inertia(v.I0, "I0");
  for (int i = 0; i < 4; ++i) {
    require(v.m_gen[i] > 0.0, "generator masses must be positive");
    check_inertia(v.I_gen[i], "I_i");
    require(std::abs(v.d[i].norm() - v.arm_length) < 1e-9, "generator offsets must lie at radius l");
    require(std::abs(v.d[i].z()) < 1e-12, "generator offsets must lie in the body xy plane");
  }
  require(v.t_max > 0.0 && v.g >= 0.0, "t_max must be positive and g non-negative");
  for (const ArmLinkParams& l : arm.links) {
    require(l.mass > 0.0 && l.length > 0.0, "arm link mass and length must be positive");
    check_inertia(l.inertia_diag.asDiagonal(), "arm link");
  }
  for (const JointLimits& l : arm.limits) require(l.min <= l.max, "arm limits out of order");
  require(arm.armature >= 0.0 && arm.link_radius > 0.0 && arm.gripper_radius > 0.0, "arm geometry");
  require(shape.tube_radius > 0.0 && shape.tube_half_length > 0.0, "vehicle shape");
}

nlohmann::json to_json(const PlatformParams& p) {
  nlohmann::json d = nlohmann::json::array();
  for (const Vector3d& di : p.vehicle.d) d.push_back({di.x(), di.y(), di.z()});
  nlohmann::json ii = nlohmann::json::array();
  for (const Matrix3d& m : p.vehicle.I_gen) ii.push_back(diag_json(m));
  nlohmann::json vehicle = {{"m0", p.vehicle.m0},
                            {"m_i", p.vehicle.m_gen},
                            {"I0", diag_json(p.vehicle.I0)},
                            {"I_i", ii},
                            {"l", p.vehicle.arm_length},
                            {"d_i", d},
                            {"t_max", p.vehicle.t_max},
                            {"g", p.vehicle.g}};
  nlohmann::json m = nlohmann::json::array(), im = nlohmann::json::array(), len = nlohmann::json::array(),
                 lim = nlohmann::json::array();
  for (const ArmLinkParams& l : p.arm.links) {
    m.push_back(l.mass);
    im.push_back({l.inertia_diag.x(), l.inertia_diag.y(), l.inertia_diag.z()});
    len.push_back(l.length);
  }
  for (const JointLimits& l : p.arm.limits) lim.push_back({l.min, l.max});
  nlohmann::json arm = {{"m_M", m},
                        {"I_M", im},
                        {"link_length", len},
                        {"mount", {p.arm.mount.x(), p.arm.mount.y(), p.arm.mount.z()}},
                        {"limits", lim},
                        {"vel_limit", p.arm.vel_limit},
                        {"acc_limit", p.arm.acc_limit},
                        {"armature", p.arm.armature},
                        {"link_radius", p.arm.link_radius},
                        {"gripper_radius", p.arm.gripper_radius}};
  nlohmann::json shape = {{"tube_radius", p.shape.tube_radius}, {"tube_half_length", p.shape.tube_half_length}};
  return {{"vehicle", vehicle}, {"arm", arm}, {"shape", shape}};
}

PlatformParams platform_params_from_json(const nlohmann::json& j) {
  PlatformParams p;
  try {
    if (j.contains("vehicle")) {
      const auto& v = j.at("vehicle");
      read_if(v, "m0", p.vehicle.m0);
      read_if(v, "m_i", p.vehicle.m_gen);
      if (v.contains("I0")) p.vehicle.I0 = inertia_from_json(v.at("I0"));
      if (v.contains("I_i"))
        for (std::size_t i = 0; i < 4; ++i) p.vehicle.I_gen[i] = inertia_from_json(v.at("I_i").at(i));
      read_if(v, "t_max", p.vehicle.t_max);
      read_if(v, "g", p.vehicle.g);
      if (v.contains("l")) {
        const double scale = v.at("l").get<double>() / p.vehicle.arm_length;
        p.vehicle.arm_length = v.at("l").get<double>();
        for (Vector3d& di : p.vehicle.d) di *= scale;
      }
      if (v.contains("d_i"))
        for (std::size_t i = 0; i < 4; ++i) p.vehicle.d[i] = vec3_from_json(v.at("d_i").at(i));
    }
    if (j.contains("arm")) {
      const auto& a = j.at("arm");
      for (std::size_t i = 0; i < 4; ++i) {
        if (a.contains("m_M")) p.arm.links[i].mass = a.at("m_M").at(i).get<double>();
        if (a.contains("I_M")) p.arm.links[i].inertia_diag = vec3_from_json(a.at("I_M").at(i));
        if (a.contains("link_length")) p.arm.links[i].length = a.at("link_length").at(i).get<double>();
        if (a.contains("limits"))
          p.arm.limits[i] = {a.at("limits").at(i).at(0).get<double>(), a.at("limits").at(i).at(1).get<double>()};
      }
      if (a.contains("mount")) p.arm.mount = vec3_from_json(a.at("mount"));
      read_if(a, "vel_limit", p.arm.vel_limit);
      read_if(a, "acc_limit", p.arm.acc_limit);
      read_if(a, "armature", p.arm.armature);
      read_if(a, "link_radius", p.arm.link_radius);
      read_if(a, "gripper_radius", p.arm.gripper_radius);
    }
    if (j.contains("shape")) {
      read_if(j.at("shape"), "tube_radius", p.shape.tube_radius);
      read_if(j.at("shape"), "tube_half_length", p.shape.tube_half_length);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid platform parameters: ") + e.what());
  }
  p.validate();
  return p;
}

PlatformParams load_platform_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return platform_params_from_json(nlohmann::json::parse(ss.str()));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

KinematicChain build_arm_chain(const PlatformParams& p, const Payload& payload) {
  const ArmParams& a = p.arm;
  std::vector<Link> links;
  std::vector<Joint> joints;

  Link body;
  body.name = std::string(kBodyLink);
  body.collision_geoms.push_back(CollisionPrimitive::capsule("tube_x", p.shape.tube_radius, p.shape.tube_half_length,
                                                            RigidTransform::from_rotation(so3::rot_y(M_PI / 2))));
  body.collision_geoms.push_back(CollisionPrimitive::capsule("tube_y", p.shape.tube_radius, p.shape.tube_half_length,
                                                            RigidTransform::from_rotation(so3::rot_x(M_PI / 2))));
  links.push_back(body);

  const char* link_names[4] = {"link1", "link2", "link3", "gripper"};
  const char* joint_names[4] = {"shoulder", "elbow", "wrist", "wrist_roll"};
  for (int i = 0; i < 4; ++i) {
    const ArmLinkParams& lp = a.links[i];
    Link l;
    l.name = link_names[i];
    l.mass = lp.mass;
    l.com = Vector3d(0, 0, -lp.length / 2);
    l.inertia = lp.inertia_diag.asDiagonal();
    const RigidTransform mid = RigidTransform::from_translation(l.com);
    if (i < 3) {
      // Shortened so the end caps do not reach into the neighbouring joints.
      const double half = std::max(lp.length / 2 - 0.01, 1e-3);
      l.collision_geoms.push_back(CollisionPrimitive::capsule(std::string(l.name) + "_capsule", a.link_radius, half, mid));
    } else {
      l.collision_geoms.push_back(CollisionPrimitive::sphere("gripper_sphere", a.gripper_radius, mid));
    }
    links.push_back(l);

    Joint j;
    j.name = joint_names[i];
    j.kind = JointKind::revolute;
    j.axis = i < 3 ? Vector3d::UnitY() : Vector3d::UnitZ();
    j.origin = RigidTransform::from_translation(i == 0 ? a.mount : Vector3d(0, 0, -a.links[i - 1].length));
    j.limits = a.limits[i];
    j.vel_limit = a.vel_limit;
    j.acc_limit = a.acc_limit;
    joints.push_back(j);
  }

  Link tool;
  tool.name = std::string(kToolLink);
  tool.mass = payload.mass;
  tool.com = payload.com;
  tool.inertia = payload.inertia;
  links.push_back(tool);
  Joint tj;
  tj.name = "tool_joint";
  tj.kind = JointKind::fixed;
  tj.origin = RigidTransform::from_translation(Vector3d(0, 0, -a.links[3].length));
  joints.push_back(tj);

  return KinematicChain(std::move(links), std::move(joints));
}

std::vector<std::pair<std::string, std::string>> arm_collision_exclusions() {
  return {{"link1", "link3"}, {"link1", "gripper"}, {"link2", "gripper"}};
}

KinematicChain build_robot_chain(const PlatformParams& p, const VirtualBaseLimits& limits) {
  return build_virtual_base(build_arm_chain(p), limits);
}

Platform::Platform(PlatformParams params, Payload payload)
    : params_((params.validate(), std::move(params))), payload_(payload), arm_(build_arm_chain(params_, payload_)) {
  if (payload_.mass < 0.0) throw Error("payload mass must be non-negative");
  mass_ = params_.vehicle.mass() + payload_.mass;
  for (const ArmLinkParams& l : params_.arm.links) mass_ += l.mass;
}

}  // namespace aerovkc
