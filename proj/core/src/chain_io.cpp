#include "aerovkc/chain_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace aerovkc {

using nlohmann::json;

ChainFormatError::ChainFormatError(const std::string& source, int line, const std::string& what)
    : KinematicsError(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw KinematicsError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Vector3d vec3_from_json(const json& j) {
  const Eigen::VectorXd v = vector_from_json(j);
  if (v.size() != 3) throw KinematicsError("expected a 3-vector");
  return v;
}

json transform_to_json(const RigidTransform& t) {
  json j;
  j["xyz"] = {t.translation.x(), t.translation.y(), t.translation.z()};
  if (t.rotation != Matrix3d::Identity()) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({t.rotation(r, 0), t.rotation(r, 1), t.rotation(r, 2)});
    j["rotation"] = rows;
  }
  return j;
}

RigidTransform transform_from_json(const json& j) {
  RigidTransform t;
  if (j.contains("xyz")) t.translation = vec3_from_json(j.at("xyz"));
  if (j.contains("rotation")) {
    const auto& rows = j.at("rotation");
    if (!rows.is_array() || rows.size() != 3) throw KinematicsError("rotation must be a 3x3 array");
    for (int r = 0; r < 3; ++r) t.rotation.row(r) = vec3_from_json(rows[static_cast<std::size_t>(r)]).transpose();
  } else if (j.contains("rpy")) {
    t.rotation = so3::from_rpy(vec3_from_json(j.at("rpy")));
  }
  if (!t.is_valid()) throw KinematicsError("transform rotation is not in SO(3)");
  return t;
}

namespace {

std::string_view kind_name(CollisionPrimitive::Kind k) {
  switch (k) {
    case CollisionPrimitive::Kind::sphere: return "sphere";
    case CollisionPrimitive::Kind::capsule: return "capsule";
    case CollisionPrimitive::Kind::box: return "box";
  }
  return "sphere";
}

}  // namespace

json collision_to_json(const CollisionPrimitive& c) {
  json j;
  j["name"] = c.name;
  j["kind"] = kind_name(c.kind);
  switch (c.kind) {
    case CollisionPrimitive::Kind::sphere: j["radius"] = c.dimensions.x(); break;
    case CollisionPrimitive::Kind::capsule:
      j["radius"] = c.dimensions.x();
      j["half_length"] = c.dimensions.y();
      break;
    case CollisionPrimitive::Kind::box:
      j["half_extents"] = {c.dimensions.x(), c.dimensions.y(), c.dimensions.z()};
      break;
  }
  j["offset"] = transform_to_json(c.offset);
  return j;
}

CollisionPrimitive collision_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const std::string name = j.value("name", std::string());
  const RigidTransform offset = j.contains("offset") ? transform_from_json(j.at("offset")) : RigidTransform{};
  if (kind == "sphere") return CollisionPrimitive::sphere(name, j.at("radius").get<double>(), offset);
  if (kind == "capsule")
    return CollisionPrimitive::capsule(name, j.at("radius").get<double>(), j.at("half_length").get<double>(), offset);
  if (kind == "box") return CollisionPrimitive::box(name, vec3_from_json(j.at("half_extents")), offset);
  throw KinematicsError("unknown collision primitive kind '" + kind + "'");
}

json chain_to_json(const KinematicChain& chain) {
  json j;
  j["root_link"] = chain.root_link();
  json links = json::array();
  for (const auto& l : chain.links()) {
    json lj;
    lj["name"] = l.name;
    lj["mass"] = l.mass;
    lj["com"] = {l.com.x(), l.com.y(), l.com.z()};
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({l.inertia(r, 0), l.inertia(r, 1), l.inertia(r, 2)});
    lj["inertia"] = rows;
    json geoms = json::array();
    for (const auto& g : l.collision_geoms) geoms.push_back(collision_to_json(g));
    lj["collision"] = geoms;
    links.push_back(lj);
  }
  json joints = json::array();
  for (std::size_t i = 0; i < chain.joints().size(); ++i) {
    const auto& jt = chain.joints()[i];
    json jj;
    jj["name"] = jt.name;
    jj["kind"] = to_string(jt.kind);
    jj["parent"] = chain.links()[i].name;
    jj["child"] = chain.links()[i + 1].name;
    jj["axis"] = {jt.axis.x(), jt.axis.y(), jt.axis.z()};
    jj["origin"] = transform_to_json(jt.origin);
    if (jt.child_offset != RigidTransform{}) jj["child_offset"] = transform_to_json(jt.child_offset);
    jj["limits"] = {jt.limits.min, jt.limits.max};
    jj["vel_limit"] = jt.vel_limit;
    jj["acc_limit"] = jt.acc_limit;
    if (jt.virtual_attachment) jj["virtual"] = true;
    joints.push_back(jj);
  }
  j["links"] = links;
  j["joints"] = joints;
  return j;
}

namespace {

/// 1-based line of each element of the top-level array `key`.
std::vector<int> element_lines(std::string_view text, std::string_view key) {
  std::vector<int> lines;
  int line = 1;
  int depth = 0;
  bool in_string = false;
  bool escape = false;
  bool capturing = false;
  std::string current;
  std::string last_string;
  for (char c : text) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escape) {
        escape = false;
      } else if (c == '\\') {
        escape = true;
      } else if (c == '"') {
        in_string = false;
        if (depth == 1) last_string = current;
      } else {
        current.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        current.clear();
        break;
      case '{':
      case '[':
        if (capturing && depth == 2) lines.push_back(line);
        if (c == '[' && depth == 1 && last_string == key) capturing = true;
        ++depth;
        break;
      case '}':
      case ']':
        --depth;
        if (depth == 1) capturing = false;
        break;
      default:
        break;
    }
  }
  return lines;
}

int line_of_offset(std::string_view text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

Link link_from_json(const json& j) {
  Link l;
  l.name = j.at("name").get<std::string>();
  l.mass = j.value("mass", 0.0);
  if (j.contains("com")) l.com = vec3_from_json(j.at("com"));
  if (j.contains("inertia")) {
    const auto& rows = j.at("inertia");
    if (!rows.is_array() || rows.size() != 3) throw KinematicsError("inertia must be a 3x3 array");
    for (int r = 0; r < 3; ++r) l.inertia.row(r) = vec3_from_json(rows[static_cast<std::size_t>(r)]).transpose();
  } else if (j.contains("inertia_diag")) {
    l.inertia = vec3_from_json(j.at("inertia_diag")).asDiagonal();
  }
  if (j.contains("collision"))
    for (const auto& g : j.at("collision")) l.collision_geoms.push_back(collision_from_json(g));
  return l;
}

struct ParsedJoint {
  Joint joint;
  std::string parent;
  std::string child;
};

ParsedJoint joint_from_json(const json& j) {
  ParsedJoint p;
  Joint& jt = p.joint;
  jt.name = j.at("name").get<std::string>();
  jt.kind = joint_kind_from_string(j.at("kind").get<std::string>());
  p.parent = j.at("parent").get<std::string>();
  p.child = j.at("child").get<std::string>();
  if (j.contains("axis")) jt.axis = vec3_from_json(j.at("axis"));
  if (j.contains("origin")) jt.origin = transform_from_json(j.at("origin"));
  if (j.contains("child_offset")) jt.child_offset = transform_from_json(j.at("child_offset"));
  jt.virtual_attachment = j.value("virtual", false);
  if (jt.kind != JointKind::fixed) {
    for (const char* field : {"limits", "vel_limit", "acc_limit"})
      if (!j.contains(field)) throw KinematicsError("joint '" + jt.name + "' is missing '" + field + "'");
  }
  if (j.contains("limits")) {
    const Eigen::VectorXd lim = vector_from_json(j.at("limits"));
    if (lim.size() != 2) throw KinematicsError("limits must be [min, max]");
    jt.limits = {lim[0], lim[1]};
  }
  jt.vel_limit = j.value("vel_limit", 0.0);
  jt.acc_limit = j.value("acc_limit", 0.0);
  return p;
}

KinematicChain build_chain(const json& doc, const std::string& source, const std::vector<int>& link_lines,
                           const std::vector<int>& joint_lines) {
  auto line_at = [](const std::vector<int>& v, std::size_t i) { return i < v.size() ? v[i] : 0; };
  if (!doc.is_object()) throw ChainFormatError(source, 1, "chain description must be a JSON object");
  if (!doc.contains("links") || !doc.at("links").is_array())
    throw ChainFormatError(source, 1, "missing 'links' array");
  const json empty = json::array();
  const json& jl = doc.at("links");
  const json& jj = doc.contains("joints") ? doc.at("joints") : empty;

  std::vector<Link> links;
  std::map<std::string, std::size_t> link_pos;
  for (std::size_t i = 0; i < jl.size(); ++i) {
    try {
      Link l = link_from_json(jl[i]);
      validate_link(l);
      if (!link_pos.emplace(l.name, i).second) throw KinematicsError("duplicate link name '" + l.name + "'");
      links.push_back(std::move(l));
    } catch (const ChainFormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw ChainFormatError(source, line_at(link_lines, i), e.what());
    }
  }
  if (links.empty()) throw ChainFormatError(source, 1, "chain needs at least one link");

  std::vector<ParsedJoint> joints;
  std::map<std::string, std::size_t> by_parent;
  std::map<std::string, std::size_t> by_child;
  for (std::size_t i = 0; i < jj.size(); ++i) {
    try {
      ParsedJoint p = joint_from_json(jj[i]);
      validate_joint(p.joint);
      for (const auto& pj : joints)
        if (pj.joint.name == p.joint.name) throw KinematicsError("duplicate joint name '" + p.joint.name + "'");
      if (!link_pos.contains(p.parent)) throw KinematicsError("unknown parent link '" + p.parent + "'");
      if (!link_pos.contains(p.child)) throw KinematicsError("unknown child link '" + p.child + "'");
      if (!by_parent.emplace(p.parent, i).second)
        throw KinematicsError("link '" + p.parent + "' has two child joints; only serial chains are supported");
      if (!by_child.emplace(p.child, i).second)
        throw KinematicsError("link '" + p.child + "' has two parent joints");
      joints.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw ChainFormatError(source, line_at(joint_lines, i), e.what());
    }
  }

  std::string root = doc.value("root_link", std::string());
  if (root.empty()) {
    for (const auto& l : links)
      if (!by_child.contains(l.name)) {
        root = l.name;
        break;
      }
  }
  if (!link_pos.contains(root)) throw ChainFormatError(source, 1, "root link '" + root + "' not found");
  if (by_child.contains(root)) {
    const std::size_t ji = by_child.at(root);
    throw ChainFormatError(source, line_at(joint_lines, ji), "root link '" + root + "' has a parent joint");
  }

  std::vector<Link> ordered_links;
  std::vector<Joint> ordered_joints;
  std::string current = root;
  ordered_links.push_back(links[link_pos.at(root)]);
  while (by_parent.contains(current)) {
    const std::size_t ji = by_parent.at(current);
    ordered_joints.push_back(joints[ji].joint);
    current = joints[ji].child;
    if (ordered_links.size() > links.size())
      throw ChainFormatError(source, line_at(joint_lines, ji), "joint cycle detected");
    ordered_links.push_back(links[link_pos.at(current)]);
  }
  if (ordered_links.size() != links.size()) {
    for (std::size_t i = 0; i < links.size(); ++i) {
      bool used = false;
      for (const auto& l : ordered_links) used = used || l.name == links[i].name;
      if (!used)
        throw ChainFormatError(source, line_at(link_lines, i),
                               "link '" + links[i].name + "' is not connected to root '" + root + "'");
    }
  }
  try {
    return {std::move(ordered_links), std::move(ordered_joints)};
  } catch (const std::exception& e) {
    throw ChainFormatError(source, 0, e.what());
  }
}

}  // namespace

KinematicChain chain_from_json(const json& j) { return build_chain(j, "<json>", {}, {}); }

KinematicChain parse_chain(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ChainFormatError(source, line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  return build_chain(doc, source, element_lines(text, "links"), element_lines(text, "joints"));
}

KinematicChain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ChainFormatError(path.string(), 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_chain(ss.str(), path.string());
}

}  // namespace aerovkc
