#include "aerovkc/simulator.hpp"

#include "aerovkc/chain_io.hpp"
#include "aerovkc/rigid_body.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace aerovkc {

namespace {

constexpr double kObjectArmature = 1e-3;
constexpr double kStopStiffness = 200.0;
constexpr double kStopDamping = 2.0;
constexpr double kFrictionSpeed = 0.01;

int whole_ratio(double a, double b, const char* what) {
  const double r = a / b;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9 * r) throw SimulationError(std::string(what) + " is not a whole multiple");
  return static_cast<int>(n);
}

Eigen::VectorXd dyn(const Vector4d& v) { return v; }

RigidTransform body_pose(const VehicleState& v) { return {v.R, v.p}; }

/// Layout of the integrated state vector.
struct Layout {
  std::vector<int> object_offset;  ///< -1 for objects without integrated joints
  int size = 21;

  Layout(const SimModel& m) {
    for (std::size_t k = 0; k < m.objects.size(); ++k) {
      const int n = m.objects[k].chain.dof();
      if (n == 0) {
        object_offset.push_back(-1);
        continue;
      }
      object_offset.push_back(size);
      size += 2 * n;
    }
  }
};

Eigen::VectorXd pack(const Layout& l, const WorldState& s) {
  Eigen::VectorXd x(l.size);
  const Eigen::Quaterniond q(s.vehicle.R);
  x.segment<3>(0) = s.vehicle.p;
  x.segment<3>(3) = s.vehicle.v;
  x.segment<4>(6) << q.w(), q.x(), q.y(), q.z();
  x.segment<3>(10) = s.vehicle.omega;
  x.segment<4>(13) = s.arm.q;
  x.segment<4>(17) = s.arm.qd;
  for (std::size_t k = 0; k < l.object_offset.size(); ++k) {
    const int o = l.object_offset[k];
    if (o < 0) continue;
    const auto n = s.object_q[k].size();
    x.segment(o, n) = s.object_q[k];
    x.segment(o + n, n) = s.object_qd[k];
  }
  return x;
}

void unpack(const Layout& l, const Eigen::VectorXd& x, WorldState& s) {
  s.vehicle.p = x.segment<3>(0);
  s.vehicle.v = x.segment<3>(3);
  Eigen::Quaterniond q(x[6], x[7], x[8], x[9]);
  q.normalize();
  s.vehicle.R = q.toRotationMatrix();
  s.vehicle.omega = x.segment<3>(10);
  s.arm.q = x.segment<4>(13);
  s.arm.qd = x.segment<4>(17);
  for (std::size_t k = 0; k < l.object_offset.size(); ++k) {
    const int o = l.object_offset[k];
    if (o < 0) continue;
    const auto n = s.object_q[k].size();
    s.object_q[k] = x.segment(o, n);
    s.object_qd[k] = x.segment(o + n, n);
  }
}

/// World velocity (linear, angular) of a point rigidly attached to the tool frame.
std::pair<Vector3d, Vector3d> tool_point_velocity(const Platform& platform, const WorldState& s, const Vector3d& point) {
  const Jacobian j = jacobian(platform.arm_chain(), dyn(s.arm.q), kToolLink, point);
  const RigidTransform tool = arm_fk(platform, s.arm.q);
  const Vector3d r_b = tool * point;
  const Vector3d lin = s.vehicle.v + s.vehicle.R * (s.vehicle.omega.cross(r_b) + j.topRows<3>() * s.arm.qd);
  const Vector3d ang = s.vehicle.R * (s.vehicle.omega + j.bottomRows<3>() * s.arm.qd);
  return {lin, ang};
}

std::pair<Vector3d, Vector3d> handle_velocity(const SceneObject& o, const WorldState& s, int k) {
  const auto kk = static_cast<std::size_t>(k);
  if (o.chain.dof() == 0) return {Vector3d::Zero(), Vector3d::Zero()};
  const Jacobian j = jacobian(o.chain, s.object_q[kk], o.handle_link());
  const Matrix3d& r = s.object_base[kk].rotation;
  return {r * (j.topRows<3>() * s.object_qd[kk]), r * (j.bottomRows<3>() * s.object_qd[kk])};
}

RigidTransform handle_pose(const SceneObject& o, const WorldState& s, int k) {
  const auto kk = static_cast<std::size_t>(k);
  return s.object_base[kk] * forward_kinematics(o.chain, s.object_q[kk], o.handle_link());
}

Payload payload_of(const SceneObject& o, const RigidTransform& rest) {
  const Link& l = o.chain.links().front();
  Payload p;
  p.mass = l.mass;
  p.com = rest * l.com;
  p.inertia = rest.rotation * l.inertia * rest.rotation.transpose();
  return p;
}

Eigen::VectorXd derivative(const SimModel& m, const Layout& l, const Eigen::VectorXd& x, const Commands& u,
                           WorldState& scratch) {
  unpack(l, x, scratch);
  const WorldState& s = scratch;
  const VehicleParams& vp = m.platform.params().vehicle;
  const Matrix3d& R = s.vehicle.R;

  Vector6d wrench = vehicle_wrench(vp, u.actuators);
  Vector6d f_arm = Vector6d::Zero();
  Eigen::Matrix<double, 6, 4> j_arm = Eigen::Matrix<double, 6, 4>::Zero();
  const GraspWrench gw = grasp_wrench(m, s);
  const bool spring = m.grasp && !m.grasp->rigid;
  if (spring) {
    const Vector3d f_b = R.transpose() * -gw.force_on_handle;
    const Vector3d t_b = R.transpose() * -gw.torque_on_handle;
    const Vector3d r_b = R.transpose() * (gw.point - s.vehicle.p);
    wrench.head<3>() += f_b;
    wrench.tail<3>() += r_b.cross(f_b) + t_b;
    f_arm << f_b, t_b;
    j_arm = jacobian(m.platform.arm_chain(), dyn(s.arm.q), kToolLink, m.grasp->rest.translation);
  }

  const VehicleAccel acc = vehicle_accel(m.platform, s.arm.q, s.vehicle, wrench);
  const Vector3d g_body = R.transpose() * Vector3d(0.0, 0.0, -vp.g);
  const Vector4d qdd = arm_accel(m.platform, s.arm, u.arm_torque, f_arm, j_arm, g_body);

  Eigen::VectorXd dx(l.size);
  const Eigen::Quaterniond q(x[6], x[7], x[8], x[9]);
  const Eigen::Quaterniond qw(0.0, s.vehicle.omega.x(), s.vehicle.omega.y(), s.vehicle.omega.z());
  const Eigen::Quaterniond qdot = q * qw;
  dx.segment<3>(0) = s.vehicle.v;
  dx.segment<3>(3) = acc.v_dot;
  dx.segment<4>(6) << 0.5 * qdot.w(), 0.5 * qdot.x(), 0.5 * qdot.y(), 0.5 * qdot.z();
  dx.segment<3>(10) = acc.omega_dot;
  dx.segment<4>(13) = s.arm.qd;
  dx.segment<4>(17) = qdd;

  for (std::size_t k = 0; k < m.objects.size(); ++k) {
    const int o = l.object_offset[k];
    if (o < 0) continue;
    const SceneObject& obj = m.objects[k];
    const Eigen::VectorXd& oq = s.object_q[k];
    const Eigen::VectorXd& oqd = s.object_qd[k];
    const Matrix3d& rb = s.object_base[k].rotation;
    const Vector3d g_root = rb.transpose() * Vector3d(0.0, 0.0, -vp.g);
    Eigen::VectorXd tau = -rbd::inverse_dynamics(obj.chain, oq, oqd, Eigen::VectorXd::Zero(oq.size()), g_root);
    if (spring && m.grasp->object == static_cast<int>(k)) {
      const Jacobian j = jacobian(obj.chain, oq, obj.handle_link());
      Vector6d w;
      w << rb.transpose() * gw.force_on_handle, rb.transpose() * gw.torque_on_handle;
      tau += j.transpose() * w;
    }
    const Eigen::VectorXd lo = obj.chain.lower_limits(), hi = obj.chain.upper_limits();
    for (Eigen::Index i = 0; i < oq.size(); ++i) {
      tau[i] -= obj.damping * oqd[i] + obj.friction * std::tanh(oqd[i] / kFrictionSpeed);
      if (oq[i] > hi[i]) tau[i] -= kStopStiffness * (oq[i] - hi[i]) + kStopDamping * oqd[i];
      if (oq[i] < lo[i]) tau[i] -= kStopStiffness * (oq[i] - lo[i]) + kStopDamping * oqd[i];
    }
    Eigen::MatrixXd mm = rbd::mass_matrix(obj.chain, oq);
    mm.diagonal().array() += kObjectArmature;
    const auto n = oq.size();
    dx.segment(o, n) = oqd;
    dx.segment(o + n, n) = mm.ldlt().solve(tau);
  }
  return dx;
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0) || !(high_rate > 0.0) || !(low_rate > 0.0)) throw SimulationError("rates and dt must be positive");
  if (delay < 0.0) throw SimulationError("delay must be non-negative");
  high_period();
  low_period();
  delay_ticks();
  if (high_period() % low_period() != 0) throw SimulationError("low-level rate must be a multiple of the high-level rate");
  if (noise.position_std < 0.0 || noise.attitude_std < 0.0) throw SimulationError("noise std must be non-negative");
  if (hold_time < 0.0 || grasp_timeout < 0.0) throw SimulationError("hold_time and grasp_timeout must be non-negative");
  gains.validate();
}

int SimConfig::high_period() const { return whole_ratio(1.0 / high_rate, dt, "high-level period / dt"); }
int SimConfig::low_period() const { return whole_ratio(1.0 / low_rate, dt, "low-level period / dt"); }

int SimConfig::delay_ticks() const {
  if (delay == 0.0) return 0;
  return whole_ratio(delay, 1.0 / high_rate, "delay / high-level period");
}

GraspWrench grasp_wrench(const SimModel& m, const WorldState& s) {
  GraspWrench out;
  if (!m.grasp || m.grasp->rigid) return out;
  const int k = m.grasp->object;
  const SceneObject& obj = m.objects[static_cast<std::size_t>(k)];
  const RigidTransform g = body_pose(s.vehicle) * arm_fk(m.platform, s.arm.q) * m.grasp->rest;
  const RigidTransform h = handle_pose(obj, s, k);
  const auto [vg, wg] = tool_point_velocity(m.platform, s, m.grasp->rest.translation);
  const auto [vh, wh] = handle_velocity(obj, s, k);
  const GraspParams& p = m.grasp_params;
  out.point = g.translation;
  out.force_on_handle = p.k_linear * (g.translation - h.translation) + p.c_linear * (vg - vh);
  out.torque_on_handle =
      p.k_angular * (h.rotation * so3::log(h.rotation.transpose() * g.rotation)) + p.c_angular * (wg - wh);
  return out;
}

WorldState step(const SimModel& m, const WorldState& s, const Commands& u, double dt) {
  if (!(dt > 0.0)) throw SimulationError("step: dt must be positive");
  const Layout l(m);
  WorldState scratch = s;
  const Eigen::VectorXd x0 = pack(l, s);
  const Eigen::VectorXd k1 = derivative(m, l, x0, u, scratch);
  const Eigen::VectorXd k2 = derivative(m, l, x0 + 0.5 * dt * k1, u, scratch);
  const Eigen::VectorXd k3 = derivative(m, l, x0 + 0.5 * dt * k2, u, scratch);
  const Eigen::VectorXd k4 = derivative(m, l, x0 + dt * k3, u, scratch);
  const Eigen::VectorXd x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!x1.allFinite()) throw SimulationError("simulation diverged (non-finite state) at t = " + std::to_string(s.t));
  WorldState out = s;
  unpack(l, x1, out);
  out.t = s.t + dt;
  if (m.grasp && m.grasp->rigid)
    out.object_base[static_cast<std::size_t>(m.grasp->object)] =
        body_pose(out.vehicle) * arm_fk(m.platform, out.arm.q) * m.grasp->rest;
  return out;
}

Measurement inject_noise(const Measurement& m, const NoiseParams& noise, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Measurement out = m;
  Vector3d dp, dr;
  for (int i = 0; i < 3; ++i) dp[i] = n(rng);
  for (int i = 0; i < 3; ++i) dr[i] = n(rng);
  out.p += noise.position_std * dp;
  out.R = m.R * so3::exp(noise.attitude_std * dr);
  return out;
}

RobotReference RobotReference::hold(const ChainState& x) {
  RobotReference r;
  r.rpy = base_rpy(x);
  r.vehicle = VehicleState::from_rpy(base_position(x), r.rpy);
  r.arm.q = x.segment<4>(6);
  return r;
}

ReferenceTrack::ReferenceTrack(Eigen::MatrixXd knots, double dt) : knots_(std::move(knots)), dt_(dt) {
  if (knots_.rows() < 2 || !(dt_ > 0.0)) throw SimulationError("reference needs two knots and a positive dt");
  const Eigen::Index n = knots_.rows();
  slopes_ = Eigen::MatrixXd::Zero(n, knots_.cols());
  for (Eigen::Index i = 1; i + 1 < n; ++i) slopes_.row(i) = (knots_.row(i + 1) - knots_.row(i - 1)) / (2.0 * dt_);
}

void ReferenceTrack::sample(double t, Eigen::VectorXd& x, Eigen::VectorXd& xd, Eigen::VectorXd& xdd) const {
  const Eigen::Index n = knots_.rows();
  if (t <= 0.0 || t >= duration()) {
    x = (t <= 0.0 ? knots_.row(0) : knots_.row(n - 1)).transpose();
    xd = Eigen::VectorXd::Zero(knots_.cols());
    xdd = Eigen::VectorXd::Zero(knots_.cols());
    return;
  }
  const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(t / dt_), n - 2);
  const double s = t / dt_ - static_cast<double>(i);
  const Eigen::VectorXd p0 = knots_.row(i).transpose(), p1 = knots_.row(i + 1).transpose();
  const Eigen::VectorXd m0 = dt_ * slopes_.row(i).transpose(), m1 = dt_ * slopes_.row(i + 1).transpose();
  const double s2 = s * s, s3 = s2 * s;
  x = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
  xd = ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1) / dt_;
  xdd = ((12 * s - 6) * p0 + (6 * s - 4) * m0 + (-12 * s + 6) * p1 + (6 * s - 2) * m1) / (dt_ * dt_);
}

RobotReference ReferenceTrack::robot(double t) const {
  Eigen::VectorXd x, xd, xdd;
  sample(t, x, xd, xdd);
  RobotReference r;
  r.rpy = base_rpy(x);
  const Vector3d rpy_d = base_rpy(xd), rpy_dd = base_rpy(xdd);
  const Matrix3d e = so3::euler_rate_to_body(r.rpy);
  r.vehicle = VehicleState::from_rpy(base_position(x), r.rpy, xd.head<3>(), e * rpy_d);
  r.v_dot = xdd.head<3>();
  constexpr double h = 1e-6;
  const Matrix3d e_dot =
      (so3::euler_rate_to_body(r.rpy + h * rpy_d) - so3::euler_rate_to_body(r.rpy - h * rpy_d)) / (2.0 * h);
  r.omega_dot = e * rpy_dd + e_dot * rpy_d;
  r.arm.q = x.segment<4>(6);
  r.arm.qd = xd.segment<4>(6);
  r.arm.qdd = xdd.segment<4>(6);
  return r;
}

Simulator::Simulator(const Scene& scene, SimConfig config)
    : scene_(scene),
      cfg_((config.validate(), std::move(config))),
      model_{Platform(scene.platform), scene.objects, cfg_.grasp, std::nullopt},
      rng_(cfg_.seed),
      delay_(0, ThrustCommand{}) {
  WorldState s;
  s.vehicle = VehicleState::from_rpy(base_position(scene.robot_start), base_rpy(scene.robot_start));
  s.arm.q = scene.robot_start.segment<4>(6);
  for (const SceneObject& o : scene.objects) {
    s.object_q.push_back(o.q);
    s.object_qd.push_back(Eigen::VectorXd::Zero(o.q.size()));
    s.object_base.push_back(o.base_pose);
  }
  parent_.resize(scene.objects.size());
  reset(s);
}

void Simulator::reset(const WorldState& s) {
  state_ = s;
  const WrenchCommand hover =
      high_level_wrench(model_.platform, s.arm.q, s.vehicle, Vector3d::Zero(), Vector3d::Zero());
  const ThrustCommand cmd = allocate(model_.platform.params().vehicle, hover).command;
  state_.actuators = cmd;
  setpoint_ = cmd;
  delay_ = DelayLine<ThrustCommand>(cfg_.delay_ticks(), cmd);
  int_p_.setZero();
  int_theta_.setZero();
  int_arm_.setZero();
  last_ = TickInfo{};
  last_.command = cmd;
}

void Simulator::tick(const RobotReference& ref) {
  const int hp = cfg_.high_period(), lp = cfg_.low_period();
  const double high_dt = cfg_.dt * hp, low_dt = cfg_.dt * lp;
  const VehicleParams& vp = model_.platform.params().vehicle;

  const Measurement meas = inject_noise({state_.vehicle.p, state_.vehicle.R, state_.vehicle.v, state_.vehicle.omega},
                                        cfg_.noise, rng_);
  const VehicleState seen{meas.p, meas.R, meas.v, meas.omega};
  TrackingErrors e = tracking_errors(seen, ref.vehicle);
  integrate_errors(e, int_p_, int_theta_, high_dt, cfg_.gains.integral_clamp);
  int_p_ = e.int_p;
  int_theta_ = e.int_theta;
  const VirtualInputs vi = virtual_inputs(e, ref.v_dot, ref.omega_dot, cfg_.gains);
  const WrenchCommand w = high_level_wrench(model_.platform, state_.arm.q, seen, vi.u_v, vi.u_omega);
  const Allocation a = allocate(vp, w, last_.command);
  setpoint_ = delay_.push(a.command);
  last_.command = a.command;
  last_.saturated = a.saturated;
  last_.errors = e;

  const Vector3d g_body = meas.R.transpose() * Vector3d(0.0, 0.0, -vp.g);
  for (int k = 0; k < hp; ++k) {
    if (k % lp == 0) {
      state_.actuators = low_level_actuator(setpoint_, state_.actuators, low_dt, cfg_.actuator, vp.generator_max_thrust());
      const double c = cfg_.gains.integral_clamp;
      int_arm_ = (int_arm_ + low_dt * (ref.arm.q - state_.arm.q)).cwiseMax(-c).cwiseMin(c);
      last_.arm_torque = arm_torque(model_.platform, state_.arm, ref.arm, int_arm_, cfg_.gains, g_body);
    }
    state_ = step(model_, state_, {state_.actuators, last_.arm_torque}, cfg_.dt);
  }
  update_kinematic_objects();
  last_.grasp_force = grasp_wrench(model_, state_).force_on_handle.norm();
}

std::pair<double, double> Simulator::grasp_gap(int object) const {
  const SceneObject& o = scene_.objects.at(static_cast<std::size_t>(object));
  const RigidTransform g = body_pose(state_.vehicle) * arm_fk(model_.platform, state_.arm.q) * o.grasp_offset;
  const RigidTransform h = handle_pose(o, state_, object);
  const Vector3d vg = tool_point_velocity(model_.platform, state_, o.grasp_offset.translation).first;
  const Vector3d vh = handle_velocity(o, state_, object).first;
  return {(g.translation - h.translation).norm(), (vg - vh).norm()};
}

bool Simulator::try_attach(int object) {
  if (model_.grasp) throw SimulationError("attach while already holding an object");
  const auto [dist, speed] = grasp_gap(object);
  if (dist >= cfg_.grasp.attach_distance || speed >= cfg_.grasp.attach_speed) return false;
  const SceneObject& o = scene_.objects[static_cast<std::size_t>(object)];
  GraspState g;
  g.object = object;
  g.rest = (body_pose(state_.vehicle) * arm_fk(model_.platform, state_.arm.q)).inverse() * handle_pose(o, state_, object);
  g.rigid = o.movable;
  if (g.rigid) {
    model_.platform = Platform(scene_.platform, payload_of(o, g.rest));
    parent_[static_cast<std::size_t>(object)].reset();
  }
  model_.grasp = g;
  return true;
}

std::optional<int> Simulator::detach() {
  if (!model_.grasp) throw SimulationError("detach while holding nothing");
  const GraspState g = *model_.grasp;
  model_.grasp.reset();
  if (!g.rigid) return std::nullopt;
  model_.platform = Platform(scene_.platform);
  const auto k = static_cast<std::size_t>(g.object);
  const Vector3d p = state_.object_base[k].translation;
  for (std::size_t c = 0; c < scene_.objects.size(); ++c) {
    const auto& vol = scene_.objects[c].container;
    if (c == k || !vol || !inside_container(static_cast<int>(c), p)) continue;
    const RigidTransform link = object_link_pose(static_cast<int>(c), vol->link);
    parent_[k] = SceneState::Parent{static_cast<int>(c), vol->link, link.inverse() * state_.object_base[k]};
    return static_cast<int>(c);
  }
  return std::nullopt;
}

std::optional<int> Simulator::attached() const {
  if (!model_.grasp) return std::nullopt;
  return model_.grasp->object;
}

RigidTransform Simulator::object_link_pose(int object, std::string_view link) const {
  const auto k = static_cast<std::size_t>(object);
  return state_.object_base[k] * forward_kinematics(scene_.objects[k].chain, state_.object_q[k], link);
}

bool Simulator::inside_container(int c, const Vector3d& p) const {
  const auto& vol = scene_.objects[static_cast<std::size_t>(c)].container;
  if (!vol) return false;
  const RigidTransform frame = object_link_pose(c, vol->link) * vol->offset;
  return ((frame.inverse() * p).cwiseAbs() - vol->half_extents).maxCoeff() <= 0.0;
}

void Simulator::update_kinematic_objects() {
  for (std::size_t k = 0; k < parent_.size(); ++k)
    if (parent_[k]) state_.object_base[k] = object_link_pose(parent_[k]->object, parent_[k]->link) * parent_[k]->offset;
}

int SimLog::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  throw SimulationError("no column '" + std::string(name) + "' in the log");
}

std::vector<double> SimLog::series(std::string_view name) const {
  const auto c = static_cast<std::size_t>(column(name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void SimLog::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw SimulationError("cannot write '" + path.string() + "'");
  for (std::size_t i = 0; i < columns.size(); ++i) std::fprintf(f, "%s%s", i ? "," : "", columns[i].c_str());
  std::fputc('\n', f);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) std::fprintf(f, "%s%.10g", i ? "," : "", r[i]);
    std::fputc('\n', f);
  }
  std::fclose(f);
}

nlohmann::json SimLog::events_json() const {
  nlohmann::json ev = nlohmann::json::array();
  for (const SimEvent& e : events) ev.push_back({{"t", e.t}, {"type", e.type}, {"step", e.step}, {"detail", e.detail}});
  nlohmann::json objs = nlohmann::json::array();
  for (const FinalObject& o : final_objects)
    objs.push_back({{"name", o.name},
                    {"q", vector_to_json(o.q)},
                    {"pose", transform_to_json(o.pose)},
                    {"handle_pose", transform_to_json(o.handle_pose)}});
  return {{"seed", seed},      {"completed", completed}, {"failure", failure},
          {"steps", step_names}, {"events", ev},         {"final_objects", objs}};
}

void SimLog::write_events(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw SimulationError("cannot write '" + path.string() + "'");
  out << events_json().dump(2) << '\n';
}

namespace {

const char* kRobotDofs[10] = {"base_x",     "base_y",    "base_z",   "base_yaw", "base_pitch",
                              "base_roll",  "shoulder",  "elbow",    "wrist",    "wrist_roll"};

class EpisodeRecorder {
 public:
  EpisodeRecorder(const Scenario& sc, const std::vector<PlannedStep>& plan, SimLog& log) : sc_(sc), plan_(plan), log_(log) {
    log_.columns = {"t", "step", "attached"};
    for (const char* d : kRobotDofs) {
      log_.columns.push_back(std::string("ref_") + d);
      log_.columns.push_back(std::string("act_") + d);
    }
    for (std::size_t k = 0; k < sc.scene.objects.size(); ++k) {
      const KinematicChain& c = sc.scene.objects[k].chain;
      for (int i = 0; i < c.dof(); ++i) {
        const std::string& name = c.joints()[static_cast<std::size_t>(c.joint_of_dof(i))].name;
        object_joints_.push_back({static_cast<int>(k), i, name});
        log_.columns.push_back("ref_" + name);
        log_.columns.push_back("act_" + name);
      }
    }
    for (const char* what : {"cmd_T", "cmd_alpha", "cmd_beta"})
      for (int i = 1; i <= 4; ++i) log_.columns.push_back(what + std::to_string(i));
    for (int i = 1; i <= 4; ++i) log_.columns.push_back("tau" + std::to_string(i));
    for (const char* c : {"e_p", "e_theta", "saturated", "grasp_force"}) log_.columns.push_back(c);
  }

  /// Object joint reference: planned track while the object is held in this step, else its planned resting value.
  void set_object_reference(int step, const ReferenceTrack* track, double t_local) {
    object_ref_.assign(object_joints_.size(), 0.0);
    const SceneState* st = step < 0 ? nullptr : &plan_[static_cast<std::size_t>(step)].state_after;
    Eigen::VectorXd x, xd, xdd;
    if (track) track->sample(t_local, x, xd, xdd);
    for (std::size_t j = 0; j < object_joints_.size(); ++j) {
      const auto& oj = object_joints_[j];
      const auto k = static_cast<std::size_t>(oj.object);
      object_ref_[j] = st ? st->object_q[k][oj.dof] : sc_.scene.objects[k].q[oj.dof];
      if (track && step >= 0 && plan_[static_cast<std::size_t>(step)].attached == oj.object) {
        const KinematicChain& vkc = plan_[static_cast<std::size_t>(step)].problem.vkc;
        const int col = vkc.dof_index(vkc.joint_index(oj.name));
        object_ref_[j] = -x[col];
      }
    }
  }

  void record(double t, int step, const RobotReference& ref, const WorldState& s, std::optional<int> attached,
              const TickInfo& info) {
    std::vector<double> r;
    r.reserve(log_.columns.size());
    r.push_back(t);
    r.push_back(step);
    r.push_back(attached ? *attached : -1);
    const Vector3d rpy = so3::to_rpy_near(s.vehicle.R, ref.rpy);
    const double ref_vals[10] = {ref.vehicle.p.x(), ref.vehicle.p.y(), ref.vehicle.p.z(), ref.rpy.z(), ref.rpy.y(),
                                 ref.rpy.x(),       ref.arm.q[0],      ref.arm.q[1],      ref.arm.q[2], ref.arm.q[3]};
    const double act_vals[10] = {s.vehicle.p.x(), s.vehicle.p.y(), s.vehicle.p.z(), rpy.z(),    rpy.y(),
                                 rpy.x(),         s.arm.q[0],      s.arm.q[1],      s.arm.q[2], s.arm.q[3]};
    for (int i = 0; i < 10; ++i) {
      r.push_back(ref_vals[i]);
      r.push_back(act_vals[i]);
    }
    for (std::size_t j = 0; j < object_joints_.size(); ++j) {
      r.push_back(object_ref_[j]);
      r.push_back(s.object_q[static_cast<std::size_t>(object_joints_[j].object)][object_joints_[j].dof]);
    }
    for (int i = 0; i < 4; ++i) r.push_back(info.command.thrust[i]);
    for (int i = 0; i < 4; ++i) r.push_back(info.command.tilt[i]);
    for (int i = 0; i < 4; ++i) r.push_back(info.command.twist[i]);
    for (int i = 0; i < 4; ++i) r.push_back(info.arm_torque[i]);
    r.push_back(info.errors.e_p.norm());
    r.push_back(info.errors.e_theta.norm());
    r.push_back(info.saturated ? 1.0 : 0.0);
    r.push_back(info.grasp_force);
    log_.rows.push_back(std::move(r));
  }

 private:
  struct ObjectJoint {
    int object;
    int dof;
    std::string name;
  };
  const Scenario& sc_;
  const std::vector<PlannedStep>& plan_;
  SimLog& log_;
  std::vector<ObjectJoint> object_joints_;
  std::vector<double> object_ref_;
};

}  // namespace

SimLog simulate_plan(const Scenario& sc, const std::vector<PlannedStep>& plan, const SimConfig& cfg) {
  Simulator sim(sc.scene, cfg);
  SimLog log;
  log.seed = cfg.seed;
  for (const PlannedStep& p : plan) log.step_names.push_back(p.name);
  EpisodeRecorder rec(sc, plan, log);
  const double period = 1.0 / cfg.high_rate;
  long tick_count = 0;
  bool saturated = false;

  // Runs one high-level tick; returns false (after logging a failure) on divergence.
  auto run_tick = [&](int step, const RobotReference& ref) {
    const WorldState before = sim.state();
    const double t = static_cast<double>(tick_count) * period;
    try {
      sim.tick(ref);
    } catch (const Error& e) {
      log.events.push_back({t, "failure", step, e.what()});
      log.failure = e.what();
      return false;
    }
    ++tick_count;
    const TickInfo& info = sim.last_tick();
    rec.record(t, step, ref, before, sim.attached(), info);
    if (info.saturated && !saturated) log.events.push_back({t, "saturation", step, "thrust limit reached"});
    saturated = info.saturated;
    const double err = info.errors.e_p.norm();
    if (!(err < cfg.divergence_limit)) {
      log.failure = "tracking diverged: position error " + std::to_string(err) + " m";
      log.events.push_back({t, "failure", step, log.failure});
      return false;
    }
    return true;
  };
  auto hold = [&](int step, const RobotReference& ref, double duration) {
    const long n = std::lround(duration * cfg.high_rate);
    for (long i = 0; i < n; ++i)
      if (!run_tick(step, ref)) return false;
    return true;
  };
  auto now = [&] { return static_cast<double>(tick_count) * period; };

  if (plan.empty()) {
    rec.set_object_reference(-1, nullptr, 0.0);
    log.completed = hold(0, RobotReference::hold(sc.scene.robot_start), cfg.hold_time);
  }
  bool ok = true;
  for (std::size_t s = 0; s < plan.size() && ok; ++s) {
    const int step = static_cast<int>(s) + 1;
    const PlannedStep& p = plan[s];
    const TaskStep& task = sc.steps[s];
    log.events.push_back({now(), "step_start", step, p.name});
    const ReferenceTrack track(p.trajectory.states, p.trajectory.dt);
    const RobotReference start_ref = track.robot(0.0);
    rec.set_object_reference(s == 0 ? -1 : static_cast<int>(s) - 1, nullptr, 0.0);

    if (task.pre_action == PreAction::detach) {
      const int k = sim.attached().value_or(-1);
      if (k < 0) {
        log.failure = "step '" + p.name + "' detaches but nothing is held";
        log.events.push_back({now(), "failure", step, log.failure});
        ok = false;
        break;
      }
      const std::optional<int> into = sim.detach();
      std::string detail = sc.scene.objects[static_cast<std::size_t>(k)].name;
      if (into) detail += " in " + sc.scene.objects[static_cast<std::size_t>(*into)].name;
      log.events.push_back({now(), "detach", step, detail});
    } else if (task.pre_action == PreAction::attach) {
      const int k = sc.scene.object_index(task.object);
      const long max_wait = std::lround(cfg.grasp_timeout * cfg.high_rate);
      long waited = 0;
      while (!sim.try_attach(k)) {
        if (waited++ >= max_wait) {
          const auto [d, v] = sim.grasp_gap(k);
          log.failure = "grasp of '" + task.object + "' failed: gap " + std::to_string(d) + " m, speed " + std::to_string(v) + " m/s";
          log.events.push_back({now(), "failure", step, log.failure});
          ok = false;
          break;
        }
        if (!run_tick(step, start_ref)) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
      log.events.push_back({now(), "attach", step, task.object});
    }

    const long n = std::lround(track.duration() * cfg.high_rate);
    for (long i = 0; i < n && ok; ++i) {
      const double tl = static_cast<double>(i) * period;
      rec.set_object_reference(static_cast<int>(s), &track, tl);
      ok = run_tick(step, track.robot(tl));
    }
    if (!ok) break;
    rec.set_object_reference(static_cast<int>(s), nullptr, 0.0);
    ok = hold(step, RobotReference::hold(Eigen::VectorXd(p.trajectory.states.row(p.trajectory.states.rows() - 1).transpose().head(10))), cfg.hold_time);
    if (ok) log.events.push_back({now(), "step_end", step, p.name});
  }
  if (!plan.empty()) log.completed = ok;
  if (log.completed) log.events.push_back({now(), "done", 0, ""});

  const WorldState& fs = sim.state();
  for (std::size_t k = 0; k < sc.scene.objects.size(); ++k) {
    const SceneObject& o = sc.scene.objects[k];
    log.final_objects.push_back(
        {o.name, fs.object_q[k], fs.object_base[k], sim.object_link_pose(static_cast<int>(k), o.handle_link())});
  }
  return log;
}

SimLog run_episode(const Scenario& scenario, const PlannerConfig& planner, const SimConfig& config) {
  const std::vector<PlannedStep> plan = execute_sequence(scenario.scene, scenario.steps, planner);
  return simulate_plan(scenario, plan, config);
}

}  // namespace aerovkc
