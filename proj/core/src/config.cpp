#include "aerovkc/config.hpp"

#include "aerovkc/chain_io.hpp"

#include <fstream>

namespace aerovkc {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return vector_to_json(v); }

template <int N>
void read_vec(const json& j, const char* key, Eigen::Matrix<double, N, 1>& out) {
  if (!j.contains(key)) return;
  const Eigen::VectorXd v = vector_from_json(j.at(key));
  if (v.size() != N) throw ConfigError(std::string("'") + key + "' needs " + std::to_string(N) + " entries");
  out = v;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json planner_to_json(const PlannerConfig& p) {
  const SolverOptions& s = p.solver;
  return {{"T", p.T},
          {"dt", p.dt},
          {"dist_safe", p.collision.dist_safe},
          {"xi_dist", p.collision.xi_dist},
          {"w_base_linear", p.w_base_linear},
          {"w_base_angular", p.w_base_angular},
          {"w_arm", p.w_arm},
          {"w_object", p.w_object},
          {"solver",
           {{"max_outer", s.max_outer},
            {"max_inner", s.max_inner},
            {"mu0", s.mu0},
            {"mu_factor", s.mu_factor},
            {"position_margin", s.position_margin},
            {"rate_margin", s.rate_margin},
            {"collision_margin", s.collision_margin},
            {"fd_step", s.fd_step},
            {"ik_iterations", s.ik_iterations},
            {"equality_tolerance", s.equality_tolerance},
            {"max_polish", s.max_polish}}}};
}

PlannerConfig planner_from_json(const json& j) {
  PlannerConfig p;
  read(j, "T", p.T);
  read(j, "dt", p.dt);
  read(j, "dist_safe", p.collision.dist_safe);
  read(j, "xi_dist", p.collision.xi_dist);
  read(j, "w_base_linear", p.w_base_linear);
  read(j, "w_base_angular", p.w_base_angular);
  read(j, "w_arm", p.w_arm);
  read(j, "w_object", p.w_object);
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    read(s, "max_outer", p.solver.max_outer);
    read(s, "max_inner", p.solver.max_inner);
    read(s, "mu0", p.solver.mu0);
    read(s, "mu_factor", p.solver.mu_factor);
    read(s, "position_margin", p.solver.position_margin);
    read(s, "rate_margin", p.solver.rate_margin);
    read(s, "collision_margin", p.solver.collision_margin);
    read(s, "fd_step", p.solver.fd_step);
    read(s, "ik_iterations", p.solver.ik_iterations);
    read(s, "equality_tolerance", p.solver.equality_tolerance);
    read(s, "max_polish", p.solver.max_polish);
  }
  if (p.T < 2 || !(p.dt > 0.0)) throw ConfigError("planner needs T >= 2 and dt > 0");
  if (p.collision.dist_safe < 0.0 || p.collision.xi_dist < 0.0) throw ConfigError("negative collision settings");
  if (p.w_base_linear <= 0.0 || p.w_base_angular <= 0.0 || p.w_arm <= 0.0 || p.w_object <= 0.0)
    throw ConfigError("cost weights must be positive");
  return p;
}

json sim_to_json(const SimConfig& s) {
  const Gains& g = s.gains;
  return {{"dt", s.dt},
          {"high_rate", s.high_rate},
          {"low_rate", s.low_rate},
          {"delay", s.delay},
          {"seed", s.seed},
          {"noise", {{"position_std", s.noise.position_std}, {"attitude_std", s.noise.attitude_std}}},
          {"grasp",
           {{"k_linear", s.grasp.k_linear},
            {"c_linear", s.grasp.c_linear},
            {"k_angular", s.grasp.k_angular},
            {"c_angular", s.grasp.c_angular},
            {"attach_distance", s.grasp.attach_distance},
            {"attach_speed", s.grasp.attach_speed}}},
          {"gains",
           {{"kv1", vec(g.kv1)},
            {"kv2", vec(g.kv2)},
            {"kv3", vec(g.kv3)},
            {"kw1", vec(g.kw1)},
            {"kw2", vec(g.kw2)},
            {"kw3", vec(g.kw3)},
            {"km1", vec(g.km1)},
            {"km2", vec(g.km2)},
            {"km3", vec(g.km3)},
            {"integral_clamp", g.integral_clamp}}},
          {"actuator", {{"gimbal_tau", s.actuator.gimbal_tau}, {"motor_tau", s.actuator.motor_tau}}},
          {"hold_time", s.hold_time},
          {"grasp_timeout", s.grasp_timeout},
          {"divergence_limit", s.divergence_limit}};
}

SimConfig sim_from_json(const json& j) {
  SimConfig s;
  read(j, "dt", s.dt);
  read(j, "high_rate", s.high_rate);
  read(j, "low_rate", s.low_rate);
  read(j, "delay", s.delay);
  read(j, "seed", s.seed);
  if (j.contains("noise")) {
    read(j.at("noise"), "position_std", s.noise.position_std);
    read(j.at("noise"), "attitude_std", s.noise.attitude_std);
  }
  if (j.contains("grasp")) {
    const json& g = j.at("grasp");
    read(g, "k_linear", s.grasp.k_linear);
    read(g, "c_linear", s.grasp.c_linear);
    read(g, "k_angular", s.grasp.k_angular);
    read(g, "c_angular", s.grasp.c_angular);
    read(g, "attach_distance", s.grasp.attach_distance);
    read(g, "attach_speed", s.grasp.attach_speed);
  }
  if (j.contains("gains")) {
    const json& g = j.at("gains");
    read_vec(g, "kv1", s.gains.kv1);
    read_vec(g, "kv2", s.gains.kv2);
    read_vec(g, "kv3", s.gains.kv3);
    read_vec(g, "kw1", s.gains.kw1);
    read_vec(g, "kw2", s.gains.kw2);
    read_vec(g, "kw3", s.gains.kw3);
    read_vec(g, "km1", s.gains.km1);
    read_vec(g, "km2", s.gains.km2);
    read_vec(g, "km3", s.gains.km3);
    read(g, "integral_clamp", s.gains.integral_clamp);
  }
  if (j.contains("actuator")) {
    read(j.at("actuator"), "gimbal_tau", s.actuator.gimbal_tau);
    read(j.at("actuator"), "motor_tau", s.actuator.motor_tau);
  }
  read(j, "hold_time", s.hold_time);
  read(j, "grasp_timeout", s.grasp_timeout);
  read(j, "divergence_limit", s.divergence_limit);
  s.validate();
  return s;
}

/// Rejects keys of `j` that the reference document does not have.
void check_keys(const json& j, const json& reference, const std::string& path) {
  if (!reference.is_object()) return;
  if (!j.is_object()) throw ConfigError("'" + path + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string p = path.empty() ? key : path + "." + key;
    if (!reference.contains(key)) throw ConfigError("unknown config key '" + p + "'");
    check_keys(value, reference.at(key), p);
  }
}

}  // namespace

json config_to_json(const Config& c) {
  return {{"version", c.version},
          {"platform", to_json(c.platform)},
          {"planner", planner_to_json(c.planner)},
          {"sim", sim_to_json(c.sim)}};
}

Config config_from_json(const json& j) {
  check_keys(j, config_to_json(Config{}), "");
  try {
    Config c;
    read(j, "version", c.version);
    if (c.version != kConfigVersion)
      throw ConfigError("config version " + std::to_string(c.version) + " is not supported (expected " +
                        std::to_string(kConfigVersion) + ")");
    if (j.contains("platform")) c.platform = platform_params_from_json(j.at("platform"));
    c.platform.validate();
    if (j.contains("planner")) c.planner = planner_from_json(j.at("planner"));
    if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"));
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json apply_overrides(json j, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not key=value");
    const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown config key '" + key + "'");
      node = &(*node)[part];
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    if (node->is_number() != value.is_number() || node->is_array() != value.is_array() ||
        node->is_boolean() != value.is_boolean() || node->is_object() != value.is_object())
      throw ConfigError("override '" + key + "' has the wrong type");
    *node = value;
  }
  return j;
}

}  // namespace aerovkc
