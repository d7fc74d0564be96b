#include "aerovkc/config.hpp"
#include "aerovkc/scenario.hpp"
#include "aerovkc/trajectory_io.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace aerovkc;
using namespace aerovkc::testing;
using nlohmann::json;

namespace {

const std::filesystem::path kSource = AEROVKC_SOURCE_DIR;

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

class TempDir {
 public:
  TempDir() : path_(std::filesystem::temp_directory_path() / ("aerovkc_io_" + std::to_string(counter_++))) {
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST(Config, ShippedDefaultsMatchBuiltIn) {
  EXPECT_EQ(read_json(kSource / "config" / "defaults.json"), config_to_json(Config{}));
}

TEST(Config, RoundTrip) {
  Config c;
  c.planner.T = 17;
  c.sim.seed = 99;
  c.sim.gains.kv2 = Vector3d(1, 2, 3);
  const json j = config_to_json(c);
  EXPECT_EQ(config_to_json(config_from_json(j)), j);
}

TEST(Config, UnknownKeyAndWrongVersionRejected) {
  json j = config_to_json(Config{});
  j["sim"]["sped"] = 1;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = config_to_json(Config{});
  j["version"] = kConfigVersion + 1;
  EXPECT_THROW(config_from_json(j), ConfigError);
  j = config_to_json(Config{});
  j["planner"]["T"] = "thirty";
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Config, PartialFileKeepsDefaults) {
  const Config c = config_from_json(json{{"version", kConfigVersion}, {"planner", {{"dist_safe", 0.07}}}});
  EXPECT_EQ(c.planner.collision.dist_safe, 0.07);
  EXPECT_EQ(c.planner.T, PlannerConfig{}.T);
}

TEST(Config, Overrides) {
  const json j = apply_overrides(config_to_json(Config{}), {"sim.delay=0.03", "planner.solver.max_outer=5", "sim.seed=3"});
  const Config c = config_from_json(j);
  EXPECT_EQ(c.sim.delay, 0.03);
  EXPECT_EQ(c.planner.solver.max_outer, 5);
  EXPECT_EQ(c.sim.seed, 3u);
  EXPECT_THROW(apply_overrides(config_to_json(Config{}), {"sim.nothing=1"}), ConfigError);
  EXPECT_THROW(apply_overrides(config_to_json(Config{}), {"sim.delay"}), ConfigError);
  EXPECT_THROW(config_from_json(apply_overrides(config_to_json(Config{}), {"sim.delay=fast"})), ConfigError);
}

TEST(Config, InvalidSimulatorRatesRejected) {
  json j = config_to_json(Config{});
  j["sim"]["high_rate"] = 300.0;
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(Scenario, ShippedFilesMatchBuiltIns) {
  for (const std::string& name : builtin_scenario_names()) {
    const std::filesystem::path file = kSource / "scenarios" / (name + ".json");
    EXPECT_EQ(read_json(file), scenario_to_json(builtin_scenario(name))) << name;
    EXPECT_EQ(scenario_to_json(load_scenario(file, PlatformParams{})), scenario_to_json(builtin_scenario(name))) << name;
  }
}

TEST(Scenario, SaveLoadRoundTrip) {
  TempDir dir;
  const Scenario s = builtin_scenario("task2");
  save_scenario(s, dir.path() / "s.json");
  EXPECT_EQ(scenario_to_json(load_scenario(dir.path() / "s.json", PlatformParams{})), scenario_to_json(s));
}

TEST(Scenario, InvalidContentRejected) {
  json j = scenario_to_json(builtin_scenario("task2"));
  j["objects"][0]["damping"] = -1.0;
  EXPECT_THROW(scenario_from_json(j, PlatformParams{}), ScenarioError);
  j = scenario_to_json(builtin_scenario("task2"));
  j["steps"][1]["pre_action"] = "teleport";
  EXPECT_THROW(scenario_from_json(j, PlatformParams{}), ScenarioError);
  j = scenario_to_json(builtin_scenario("task2"));
  j["objects"].push_back(j["objects"][0]);
  EXPECT_THROW(scenario_from_json(j, PlatformParams{}), ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json", PlatformParams{}), ScenarioError);
  EXPECT_THROW(builtin_scenario("task9"), ScenarioError);
}

TEST(TrajectoryIo, CsvAndJsonRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(60);
  std::normal_distribution<double> n(0.0, 1.0);
  Trajectory t;
  t.dt = 0.1;
  t.dof_names = {"a", "b", "c"};
  t.states.resize(6, 3);
  for (Eigen::Index i = 0; i < t.states.size(); ++i) t.states.data()[i] = n(rng);
  write_trajectory_csv(t, dir.path() / "t.csv");
  const Trajectory c = read_trajectory_csv(dir.path() / "t.csv");
  EXPECT_EQ(c.states, t.states);
  EXPECT_EQ(c.dof_names, t.dof_names);
  EXPECT_NEAR(c.dt, 0.1, 1e-12);
  write_trajectory_json(t, dir.path() / "t.json");
  const Trajectory j = read_trajectory_json(dir.path() / "t.json");
  EXPECT_EQ(j.states, t.states);
  EXPECT_EQ(j.dof_names, t.dof_names);
}

TEST(TrajectoryIo, MalformedCsvRejected) {
  TempDir dir;
  const auto p = dir.path() / "bad.csv";
  write_text(p, "t,a\n0,1\n0.1\n");
  EXPECT_THROW(read_trajectory_csv(p), TrajectoryIoError);
  write_text(p, "t,a\n0,1\n0.1,x\n");
  EXPECT_THROW(read_trajectory_csv(p), TrajectoryIoError);
  write_text(p, "t,a\n0,1\n0.1,2\n0.5,3\n");
  EXPECT_THROW(read_trajectory_csv(p), TrajectoryIoError);
  write_text(p, "x,a\n0,1\n0.1,2\n");
  EXPECT_THROW(read_trajectory_csv(p), TrajectoryIoError);
  EXPECT_THROW(read_trajectory_csv(dir.path() / "missing.csv"), TrajectoryIoError);
}

TEST(TrajectoryIo, VerifySequenceFlagsTamperedTrajectory) {
  const Scenario s = builtin_scenario("task1");
  const PlannerConfig cfg;
  const auto plan = execute_sequence(s.scene, {s.steps[0]}, cfg);
  Scenario one = s;
  one.steps.resize(1);
  std::vector<Trajectory> trajs = {plan[0].trajectory};
  auto checks = verify_sequence(one, trajs, cfg);
  ASSERT_EQ(checks.size(), 1u);
  EXPECT_TRUE(checks[0].pass);
  trajs[0].states(5, 0) += 1.0;
  checks = verify_sequence(one, trajs, cfg);
  EXPECT_FALSE(checks[0].pass);
  trajs[0].dof_names[0] = "renamed";
  EXPECT_THROW(verify_sequence(one, trajs, cfg), TrajectoryIoError);
  EXPECT_THROW(verify_sequence(one, {}, cfg), TrajectoryIoError);
}

TEST(TrajectoryIo, ResidualReportFields) {
  Trajectory t;
  t.dt = 0.1;
  t.dof_names = {"a"};
  t.states = Eigen::MatrixXd::Zero(3, 1);
  const json r = residual_report("s", t, CollisionSettings{});
  for (const char* key : {"step", "knots", "dt", "objective", "feasible", "residuals", "solver"})
    EXPECT_TRUE(r.contains(key)) << key;
  EXPECT_EQ(r.at("residuals").size(), 8u);
}
