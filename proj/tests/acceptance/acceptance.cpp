// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include "aerovkc/config.hpp"
#include "aerovkc/scenario.hpp"
#include "aerovkc/simulator.hpp"
#include "aerovkc/trajectory_io.hpp"

#include "cli.hpp"

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace aerovkc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

ChainState random_state(const KinematicChain& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::VectorXd lo = c.lower_limits().cwiseMax(-2.0), hi = c.upper_limits().cwiseMin(2.0);
  ChainState q(c.dof());
  for (int i = 0; i < c.dof(); ++i) q[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
  return q;
}

Vector3d random_vec3(std::mt19937_64& rng, double s) {
  std::normal_distribution<double> n(0.0, s);
  return {n(rng), n(rng), n(rng)};
}

Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

double rotation_angle(const Matrix3d& a, const Matrix3d& b) { return Eigen::AngleAxisd(Matrix3d(a.transpose() * b)).angle(); }

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome kinematics() {
  const auto t0 = Clock::now();
  const KinematicChain c = build_robot_chain(PlatformParams{});
  std::mt19937_64 rng(1);
  const double h = 1e-6;
  double worst_jac = 0.0;
  for (int i = 0; i < 100; ++i) {
    const ChainState q = random_state(c, rng);
    const Jacobian j = jacobian(c, q, kToolLink);
    const RigidTransform t = forward_kinematics(c, q, kToolLink);
    Jacobian fd(6, c.dof());
    for (int k = 0; k < c.dof(); ++k) {
      ChainState qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      const RigidTransform tp = forward_kinematics(c, qp, kToolLink), tm = forward_kinematics(c, qm, kToolLink);
      fd.col(k).head<3>() = (tp.translation - tm.translation) / (2 * h);
      fd.col(k).tail<3>() = so3::vee((tp.rotation - tm.rotation) / (2 * h) * t.rotation.transpose());
    }
    worst_jac = std::max(worst_jac, (j - fd).norm() / fd.norm());
  }
  double worst_inv = 0.0;
  for (const char* name : {"task2", "drawer"}) {
    const KinematicChain obj = builtin_scenario(name).scene.objects.front().chain;
    const KinematicChain inv = invert_chain(obj, obj.tip_link());
    for (int i = 0; i < 100; ++i) {
      const ChainState q = random_state(obj, rng);
      ChainState qi(inv.dof());
      for (int d = 0; d < inv.dof(); ++d) {
        const std::string& jn = inv.joints()[static_cast<std::size_t>(inv.joint_of_dof(d))].name;
        qi[d] = -q[obj.dof_index(obj.joint_index(jn))];
      }
      const RigidTransform a = forward_kinematics(inv, qi, obj.root_link());
      const RigidTransform b = forward_kinematics(obj, q, obj.tip_link()).inverse();
      worst_inv = std::max({worst_inv, (a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                            (a.translation - b.translation).cwiseAbs().maxCoeff()});
    }
  }
  const double wall = seconds_since(t0);
  return {worst_jac < 1e-5 && worst_inv < 1e-10 && wall < 5.0,
          fmt("jacobian rel err %.2e (< 1e-5), inversion round trip %.2e (< 1e-10), %.2f s (< 5 s)", worst_jac,
              worst_inv, wall)};
}

Outcome dynamics() {
  const Platform p;
  std::mt19937_64 rng(2);
  double fl = 0.0;
  for (int i = 0; i < 100; ++i) {
    VehicleState s;
    s.p = random_vec3(rng, 1.0);
    s.R = random_rotation(rng);
    s.v = random_vec3(rng, 1.0);
    s.omega = random_vec3(rng, 1.0);
    const Vector4d q = random_state(p.arm_chain(), rng);
    const Vector3d uv = random_vec3(rng, 3.0), uw = random_vec3(rng, 3.0);
    const VehicleAccel a = vehicle_accel(p, q, s, high_level_wrench(p, q, s, uv, uw).stacked());
    fl = std::max({fl, (a.v_dot - uv).cwiseAbs().maxCoeff(), (a.omega_dot - uw).cwiseAbs().maxCoeff()});
  }

  ArmState a;
  a.q = Vector4d(0.4, -0.8, 0.6, 0.2);
  a.qd = Vector4d(1.0, -0.7, 0.9, 1.5);
  const Eigen::Matrix<double, 6, 4> zero = Eigen::Matrix<double, 6, 4>::Zero();
  auto energy = [&](const ArmState& s) { return 0.5 * s.qd.dot(arm_mass_matrix(p, s.q) * s.qd); };
  auto accel = [&](const ArmState& s) { return arm_accel(p, s, arm_dynamics_terms(p, s).G, Vector6d::Zero(), zero); };
  auto shift = [](const ArmState& s, const Vector4d& dq, const Vector4d& dqd, double h) {
    ArmState o = s;
    o.q += h * dq;
    o.qd += h * dqd;
    return o;
  };
  const double e0 = energy(a), dt = 1e-4;
  double drift = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vector4d k1v = a.qd, k1a = accel(a);
    const ArmState s2 = shift(a, k1v, k1a, dt / 2);
    const Vector4d k2v = s2.qd, k2a = accel(s2);
    const ArmState s3 = shift(a, k2v, k2a, dt / 2);
    const Vector4d k3v = s3.qd, k3a = accel(s3);
    const ArmState s4 = shift(a, k3v, k3a, dt);
    const Vector4d k4v = s4.qd, k4a = accel(s4);
    a.q += dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    a.qd += dt / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
    drift = std::max(drift, std::abs(energy(a) - e0));
  }

  double skew = 0.0;
  for (int i = 0; i < 100; ++i) {
    ArmState s;
    s.q = random_state(p.arm_chain(), rng);
    std::normal_distribution<double> n(0.0, 1.0);
    s.qd = Vector4d(n(rng), n(rng), n(rng), n(rng));
    const double h = 1e-6;
    const Matrix4d mdot = (arm_mass_matrix(p, s.q + h * s.qd) - arm_mass_matrix(p, s.q - h * s.qd)) / (2 * h);
    const Matrix4d m = mdot - 2 * coriolis_matrix(p, s);
    skew = std::max(skew, (m + m.transpose()).cwiseAbs().maxCoeff());
  }
  return {fl < 1e-10 && drift < 1e-5 && skew < 1e-8,
          fmt("feedback linearization %.2e (< 1e-10), arm energy drift %.2e J (< 1e-5), Mdot-2C symmetric part %.2e (< 1e-8)",
              fl, drift, skew)};
}

Outcome allocation() {
  const VehicleParams v;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int saturated = 0;
  for (int i = 0; i < 1000; ++i) {
    WrenchCommand w;
    w.force = Vector3d(2 * u(rng), 2 * u(rng), 11.87 + 3 * u(rng));
    w.torque = Vector3d(0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng));
    const Allocation a = allocate(v, w);
    saturated += a.saturated;
    worst = std::max(worst, (vehicle_wrench(v, a.command) - w.stacked()).cwiseAbs().maxCoeff());
  }
  const double mass = Platform().mass();
  WrenchCommand hover;
  hover.force = Vector3d(0, 0, mass * v.g);
  const Allocation a = allocate(v, hover);
  const double expected = mass * v.g / 4.0;
  const double hover_err = (a.command.thrust.array() - expected).abs().maxCoeff();
  return {worst < 1e-9 && saturated == 0 && hover_err < 1e-6 && std::abs(mass - 1.21) < 1e-12,
          fmt("round trip %.2e (< 1e-9, %d saturated), hover T_i = %.6f N for m = %.2f kg (err %.1e < 1e-6)", worst,
              saturated, a.command.thrust[0], mass, hover_err)};
}

Outcome hover_recovery() {
  const auto t0 = Clock::now();
  Scene scene;
  scene.robot_start = robot_state({0, 0, 1.0}, Vector3d::Zero(), Vector4d::Zero());
  SimConfig cfg;
  cfg.seed = 1;
  Simulator sim(scene, cfg);
  const RobotReference ref = RobotReference::hold(scene.robot_start);
  WorldState s = sim.state();
  s.vehicle.p += Vector3d::Constant(0.1 / std::sqrt(3.0));
  s.vehicle.R = so3::exp(Vector3d(1, 1, 0).normalized() * (10.0 * M_PI / 180.0)) * s.vehicle.R;
  sim.reset(s);
  double settled_at = -1.0, ep = 0.0, eth = 0.0;
  while (sim.time() < 5.0 - 1e-9) {
    sim.tick(ref);
    const TrackingErrors e = tracking_errors(sim.state().vehicle, ref.vehicle);
    ep = e.e_p.norm();
    eth = e.e_theta.norm();
    const bool inside = ep < 0.01 && eth < 0.01;
    if (inside && settled_at < 0.0) settled_at = sim.time();
    if (!inside) settled_at = -1.0;
  }
  const double wall = seconds_since(t0);
  return {settled_at >= 0.0 && wall < 30.0,
          fmt("from 0.1 m / 10 deg: inside 0.01 from t = %.2f s onwards, at 5 s |e_p| = %.1e m, |e_theta| = %.1e; wall %.2f s (< 30 s)",
              settled_at, ep, eth, wall)};
}

Outcome planner() {
  // 1-DoF path-length case: the optimum is the straight line.
  Link a, b;
  a.name = "world";
  b.name = "slider";
  Joint j;
  j.name = "x";
  j.kind = JointKind::prismatic;
  j.axis = Vector3d::UnitX();
  j.limits = {-10.0, 10.0};
  j.vel_limit = 100.0;
  j.acc_limit = 1000.0;
  PlanningProblem p(KinematicChain({a, b}, {j}), ChainState::Zero(1));
  p.T = 10;
  p.w_v = Eigen::VectorXd::Ones(1);
  p.w_a = Eigen::VectorXd::Zero(1);
  p.goal.joints = ChainState::Constant(1, 1.0);
  const SolveResult r = solve(p);
  double line = 0.0;
  for (int t = 0; t < 10; ++t) line = std::max(line, std::abs(r.trajectory.states(t, 0) - t / 9.0));
  const double obj_err = std::abs(objective(r.trajectory.states, p.w_v, p.w_a) - 1.0 / 9.0);

  // Every plan output passes verify, through files, as the command-line tool does it.
  const fs::path dir = fs::temp_directory_path() / "aerovkc_acceptance_plan";
  bool verified = true;
  double slowest = 0.0;
  int steps = 0;
  for (const std::string& name : builtin_scenario_names()) {
    const Scenario s = builtin_scenario(name);
    const auto plan = execute_sequence(s.scene, s.steps, PlannerConfig{});
    std::vector<Trajectory> files;
    fs::remove_all(dir);
    fs::create_directories(dir);
    for (std::size_t k = 0; k < plan.size(); ++k) {
      slowest = std::max(slowest, plan[k].trajectory.stats.seconds);
      const fs::path f = dir / ("step_" + std::to_string(k) + ".csv");
      write_trajectory_csv(plan[k].trajectory, f);
      files.push_back(read_trajectory_csv(f));
    }
    for (const StepCheck& c : verify_sequence(s, files, PlannerConfig{})) {
      verified = verified && c.pass;
      ++steps;
    }
  }
  fs::remove_all(dir);
  return {r.success && line < 1e-8 && obj_err < 1e-8 && verified && slowest < 60.0,
          fmt("1-DoF line deviation %.1e, objective error %.1e (< 1e-8); verify %s on %d planned steps; slowest step %.2f s (< 60 s)",
              line, obj_err, verified ? "passes" : "FAILS", steps, slowest)};
}

const SceneObject& object(const Scenario& s, const std::string& name) {
  return s.scene.objects[static_cast<std::size_t>(s.scene.object_index(name))];
}

const FinalObject& final_object(const SimLog& log, const std::string& name) {
  for (const FinalObject& o : log.final_objects)
    if (o.name == name) return o;
  throw Error("object '" + name + "' missing from the log");
}

double commanded_joint(const Scenario& s, const std::string& joint) {
  double best = 0.0;
  for (const TaskStep& step : s.steps)
    for (const auto& [n, v] : step.goal.joints)
      if (n == joint && std::abs(v) > std::abs(best)) best = v;
  return best;
}

Outcome task1() {
  const Scenario s = builtin_scenario("task1");
  SimConfig cfg;
  cfg.seed = 7;
  const SimLog log = run_episode(s, PlannerConfig{}, cfg);
  const SimLog again = run_episode(s, PlannerConfig{}, cfg);
  const RigidTransform& target = s.steps.back().goal.pose;
  const FinalObject& bulb = final_object(log, "bulb");
  const double dp = (bulb.pose.translation - target.translation).norm();
  const double dr = rotation_angle(bulb.pose.rotation, target.rotation) * 180.0 / M_PI;
  double flip = 0.0;
  for (const char* c : {"act_base_roll", "act_base_pitch"})
    for (double v : log.series(c)) flip = std::max(flip, std::abs(v) * 180.0 / M_PI);
  const bool same = log.rows == again.rows && log.events_json() == again.events_json();
  return {log.completed && dp < 0.02 && dr < 5.0 && flip > 150.0 && same,
          fmt("completed %s, bulb %.1f mm / %.2f deg from socket (< 20 mm / 5 deg), max |roll or pitch| %.1f deg (> 150), repeat run %s",
              log.completed ? "yes" : ("no: " + log.failure).c_str(), dp * 1e3, dr, flip, same ? "identical" : "DIFFERS")};
}

Outcome container_task(const std::string& name, const std::string& container, const std::string& joint,
                       double close_tol, const char* unit, double unit_scale, double& wall) {
  const auto t0 = Clock::now();
  const Scenario s = builtin_scenario(name);
  SimConfig cfg;
  cfg.seed = 7;
  const SimLog log = run_episode(s, PlannerConfig{}, cfg);
  wall = seconds_since(t0);
  const double commanded = commanded_joint(s, joint);
  const double reached = max_of(log.series("act_" + joint));
  const FinalObject& box = final_object(log, container);
  const FinalObject& toy = final_object(log, "toy");
  SceneState st = SceneState::initial(s.scene);
  const int k = s.scene.object_index(container);
  st.object_q[static_cast<std::size_t>(k)] = box.q;
  const bool inside = inside_container(s.scene, st, k, toy.pose.translation);
  bool released_inside = false;
  for (const SimEvent& e : log.events)
    if (e.type == "detach" && e.detail == "toy in " + container) released_inside = true;
  const double closed = std::abs(box.q[0] - object(s, container).q[0]);
  const bool ok = log.completed && reached >= 0.8 * commanded && inside && released_inside && closed <= close_tol;
  return {ok, fmt("%s: completed %s, opened %.3f of %.3f (%.0f%%, > 80%%), toy released in %s and inside at end %s, "
                  "closed to %.2f %s (< %.0f), wall %.1f s",
                  name.c_str(), log.completed ? "yes" : ("no: " + log.failure).c_str(), reached, commanded,
                  100.0 * reached / commanded, container.c_str(), inside ? "yes" : "NO", closed * unit_scale, unit,
                  close_tol * unit_scale, wall)};
}

Outcome task2_and_drawer() {
  double w1 = 0.0, w2 = 0.0;
  const Outcome a = container_task("task2", "cabinet", "cabinet/hinge", 3.0 * M_PI / 180.0, "deg", 180.0 / M_PI, w1);
  const Outcome b = container_task("drawer", "drawer", "drawer/slide", 0.01, "mm", 1e3, w2);
  const bool fast = w1 < 600.0 && w2 < 600.0;
  return {a.pass && b.pass && fast, a.detail + "; " + b.detail + " (each < 600 s)"};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "aerovkc_acceptance_det";
  fs::remove_all(root);
  std::ostringstream sink;
  for (const char* run : {"a", "b"}) {
    const int code =
        cli::run({"demo", "task2", "--seed", "7", "--out", (root / run).string()}, sink, sink);
    if (code != 0) return {false, fmt("demo task2 exited with %d", code)};
  }
  const bool csv = slurp(root / "a" / "simlog.csv") == slurp(root / "b" / "simlog.csv");
  const bool events = slurp(root / "a" / "simlog_events.json") == slurp(root / "b" / "simlog_events.json");
  const auto bytes = fs::file_size(root / "a" / "simlog.csv");
  fs::remove_all(root);
  return {csv && events, fmt("simlog.csv (%ju bytes) %s, simlog_events.json %s", static_cast<std::uintmax_t>(bytes),
                             csv ? "identical" : "DIFFERS", events ? "identical" : "DIFFERS")};
}

}  // namespace

int main() {
  report("kinematics", kinematics);
  report("dynamics", dynamics);
  report("allocation", allocation);
  report("hover_recovery", hover_recovery);
  report("planner", planner);
  report("task1_bulb", task1);
  report("task2_cabinet_and_drawer", task2_and_drawer);
  report("determinism", determinism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
