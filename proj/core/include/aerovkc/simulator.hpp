#pragma once

#include "aerovkc/controller.hpp"
#include "aerovkc/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace aerovkc {

class SimulationError : public Error {
 public:
  using Error::Error;
};

struct NoiseParams {
  double position_std = 1e-3;  ///< m
  double attitude_std = 1e-3;  ///< rad
};

/// 6-D spring-damper between the gripper and a grasped handle, and the grasp trigger.
struct GraspParams {
  double k_linear = 500.0;
  double c_linear = 20.0;
  double k_angular = 5.0;
  double c_angular = 0.5;
  double attach_distance = 0.02;
  double attach_speed = 0.1;
};

struct SimConfig {
  double dt = 1e-3;
  double high_rate = 100.0;
  double low_rate = 500.0;
  double delay = 0.02;
  NoiseParams noise;
  std::uint64_t seed = 0;
  GraspParams grasp;
  Gains gains;
  ActuatorParams actuator;
  /// Hover time after each step (and the whole episode for an empty step list).
  double hold_time = 1.0;
  /// Longest wait for the grasp condition before a step fails.
  double grasp_timeout = 2.0;
  /// Position tracking error that counts as divergence.
  double divergence_limit = 0.5;

  /// Throws SimulationError unless both rates divide 1/dt and the delay is a
  /// whole number of high-level periods.
  void validate() const;
  int high_period() const;
  int low_period() const;
  int delay_ticks() const;
};

/// Full simulated state. Object entries follow Scene::objects.
struct WorldState {
  double t = 0.0;
  VehicleState vehicle;
  ArmState arm;
  ThrustCommand actuators;
  std::vector<Eigen::VectorXd> object_q, object_qd;
  std::vector<RigidTransform> object_base;
};

/// Grasped object. `rest` is the handle pose in the tool frame at attach time.
struct GraspState {
  int object = -1;
  RigidTransform rest;
  bool rigid = false;
};

/// Everything the physics step needs besides the state.
struct SimModel {
  Platform platform;
  std::vector<SceneObject> objects;
  GraspParams grasp_params;
  std::optional<GraspState> grasp;
};

struct Commands {
  ThrustCommand actuators;
  Vector4d arm_torque = Vector4d::Zero();
};

/// Wrench exchanged through the grasp spring (zero when nothing is held by the spring).
struct GraspWrench {
  Vector3d force_on_handle = Vector3d::Zero();   ///< world frame
  Vector3d torque_on_handle = Vector3d::Zero();  ///< world frame
  Vector3d point = Vector3d::Zero();             ///< world point on the robot side
};
GraspWrench grasp_wrench(const SimModel& model, const WorldState& s);

/// One RK4 step of vehicle, arm and articulated object joints with the actuator
/// state held constant. Rigidly grasped objects follow the tool. Throws
/// SimulationError when the state becomes non-finite.
WorldState step(const SimModel& model, const WorldState& s, const Commands& u, double dt);

/// Pose and velocity as seen by the flight controller.
struct Measurement {
  Vector3d p = Vector3d::Zero();
  Matrix3d R = Matrix3d::Identity();
  Vector3d v = Vector3d::Zero();
  Vector3d omega = Vector3d::Zero();
};

/// Additive Gaussian noise on position and attitude (a rotation-vector perturbation).
Measurement inject_noise(const Measurement& m, const NoiseParams& noise, std::mt19937_64& rng);

/// Fixed-length FIFO: push returns the value pushed `length` calls earlier
/// (the initial fill value until then).
template <typename T>
class DelayLine {
 public:
  DelayLine(int length, const T& fill) : buffer_(static_cast<std::size_t>(length), fill) {}
  T push(const T& value) {
    if (buffer_.empty()) return value;
    buffer_.push_back(value);
    T out = buffer_.front();
    buffer_.pop_front();
    return out;
  }

 private:
  std::deque<T> buffer_;
};

/// Reference for the ten robot DoF at one instant.
struct RobotReference {
  VehicleState vehicle;  ///< pose, linear velocity (world), body rates
  Vector3d rpy = Vector3d::Zero();
  Vector3d v_dot = Vector3d::Zero();
  Vector3d omega_dot = Vector3d::Zero();
  ArmReference arm;

  /// Stationary reference at robot state x (10 entries).
  static RobotReference hold(const ChainState& x);
};

/// C1 cubic interpolation of planner knots (zero velocity at both ends,
/// central differences inside); clamps outside [0, duration].
class ReferenceTrack {
 public:
  ReferenceTrack(Eigen::MatrixXd knots, double dt);
  double duration() const { return dt_ * static_cast<double>(knots_.rows() - 1); }
  /// Position, velocity and acceleration of every column at time t.
  void sample(double t, Eigen::VectorXd& x, Eigen::VectorXd& xd, Eigen::VectorXd& xdd) const;
  /// Robot reference from the first ten columns.
  RobotReference robot(double t) const;

 private:
  Eigen::MatrixXd knots_, slopes_;
  double dt_;
};

/// Controller outputs of the most recent high-level tick.
struct TickInfo {
  ThrustCommand command;
  bool saturated = false;
  TrackingErrors errors;
  Vector4d arm_torque = Vector4d::Zero();
  double grasp_force = 0.0;
};

/// Closed-loop platform: plant, hierarchical controller, noise and delay.
class Simulator {
 public:
  Simulator(const Scene& scene, SimConfig config);

  const WorldState& state() const { return state_; }
  const SimModel& model() const { return model_; }
  const TickInfo& last_tick() const { return last_; }
  double time() const { return state_.t; }

  /// Replaces the state (used for initial offsets); controller integrators are reset.
  void reset(const WorldState& s);
  /// Advances one high-level period while tracking `ref`.
  void tick(const RobotReference& ref);

  /// Distance and relative speed between the gripper grasp point and an object's handle.
  std::pair<double, double> grasp_gap(int object) const;
  /// Attaches when the grasp condition holds; returns whether it did.
  bool try_attach(int object);
  /// Releases the held object; movable objects inside a container are parented to it.
  /// Returns that container's index.
  std::optional<int> detach();
  std::optional<int> attached() const;

  /// World pose of an object's link.
  RigidTransform object_link_pose(int object, std::string_view link) const;
  bool inside_container(int container, const Vector3d& p) const;

 private:
  void update_kinematic_objects();

  Scene scene_;
  SimConfig cfg_;
  SimModel model_;
  WorldState state_;
  std::mt19937_64 rng_;
  DelayLine<ThrustCommand> delay_;
  ThrustCommand setpoint_;
  Vector3d int_p_ = Vector3d::Zero(), int_theta_ = Vector3d::Zero();
  Vector4d int_arm_ = Vector4d::Zero();
  TickInfo last_;
  std::vector<std::optional<SceneState::Parent>> parent_;
};

struct SimEvent {
  double t = 0.0;
  std::string type;  ///< step_start, attach, detach, saturation, step_end, failure, done
  int step = 0;      ///< 1-based, 0 outside steps
  std::string detail;
};

struct FinalObject {
  std::string name;
  Eigen::VectorXd q;
  RigidTransform pose;  ///< root link pose
  RigidTransform handle_pose;
};

/// Time series sampled at the high-level rate plus discrete events.
struct SimLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<SimEvent> events;
  std::vector<std::string> step_names;
  std::vector<FinalObject> final_objects;
  bool completed = false;
  std::string failure;
  std::uint64_t seed = 0;

  /// Index of a column; throws SimulationError if absent.
  int column(std::string_view name) const;
  std::vector<double> series(std::string_view name) const;

  void write_csv(const std::filesystem::path& path) const;
  nlohmann::json events_json() const;
  void write_events(const std::filesystem::path& path) const;
};

/// Tracks already planned steps in the closed-loop simulator.
SimLog simulate_plan(const Scenario& scenario, const std::vector<PlannedStep>& plan, const SimConfig& config);

/// Plans every step, then simulates the whole sequence. Planning failures throw SequenceError.
SimLog run_episode(const Scenario& scenario, const PlannerConfig& planner, const SimConfig& config);

}  // namespace aerovkc
