#include "cli.hpp"

#include "aerovkc/config.hpp"
#include "aerovkc/scenario.hpp"
#include "aerovkc/simulator.hpp"
#include "aerovkc/trajectory_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace aerovkc::cli {

namespace fs = std::filesystem;

namespace {

enum class Level { error, warn, info, debug };

Level log_level() {
  const char* env = std::getenv("VKC_LOG_LEVEL");
  const std::string v = env ? env : "warn";
  if (v == "error") return Level::error;
  if (v == "info") return Level::info;
  if (v == "debug") return Level::debug;
  return Level::warn;
}

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err), level_(log_level()) {}
  void info(const std::string& msg) const {
    if (level_ >= Level::info) err_ << "[info] " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= Level::debug) err_ << "[debug] " << msg << '\n';
  }

 private:
  std::ostream& err_;
  Level level_;
};

struct Options {
  std::string scenario;
  std::string out;
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string format = "csv";
  std::string input;
  std::string demo;
};

Config make_config(const Options& o) {
  nlohmann::json j;
  if (o.config.empty()) {
    j = config_to_json(Config{});
  } else {
    j = config_to_json(load_config(o.config));
  }
  Config c = config_from_json(apply_overrides(j, o.overrides));
  if (o.seed) c.sim.seed = *o.seed;
  return c;
}

std::string step_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%02zu", index + 1);
  return buf;
}

fs::path ensure_dir(std::string dir) {
  if (dir.empty()) dir = ".";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw TrajectoryIoError("cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

template <typename... A>
std::string fmt(const char* f, A... a) {
  std::string s(static_cast<std::size_t>(std::snprintf(nullptr, 0, f, a...)), '\0');
  std::snprintf(s.data(), s.size() + 1, f, a...);
  return s;
}

std::vector<PlannedStep> plan_and_write(const Scenario& sc, const Config& cfg, const fs::path& dir, std::ostream& out,
                                        const Log& log) {
  log.info("planning " + std::to_string(sc.steps.size()) + " steps of '" + sc.name + "'");
  const std::vector<PlannedStep> plan = execute_sequence(sc.scene, sc.steps, cfg.planner);
  out << fmt("%-4s %-24s %6s %10s %12s\n", "step", "name", "knots", "solve_s", "objective");
  for (std::size_t s = 0; s < plan.size(); ++s) {
    const PlannedStep& p = plan[s];
    write_trajectory_csv(p.trajectory, dir / (step_stem(s) + ".csv"));
    std::ofstream rep(dir / (step_stem(s) + ".residuals.json"));
    if (!rep) throw TrajectoryIoError("cannot write residual report in '" + dir.string() + "'");
    rep << residual_report(p.name, p.trajectory, p.problem.collision).dump(2) << '\n';
    out << fmt("%-4zu %-24s %6ld %10.3f %12.6g\n", s + 1, p.name.c_str(), static_cast<long>(p.trajectory.states.rows()),
               p.trajectory.stats.seconds, p.trajectory.residuals.objective);
  }
  return plan;
}

int simulate_and_write(const Scenario& sc, const std::vector<PlannedStep>& plan, const Config& cfg, const fs::path& dir,
                       std::ostream& out, const Log& log) {
  log.info("simulating with seed " + std::to_string(cfg.sim.seed));
  const SimLog simlog = simulate_plan(sc, plan, cfg.sim);
  simlog.write_csv(dir / "simlog.csv");
  simlog.write_events(dir / "simlog_events.json");
  out << "simulation: " << (simlog.completed ? "completed" : "FAILED: " + simlog.failure) << " (" << simlog.rows.size()
      << " rows)\n";
  for (const FinalObject& o : simlog.final_objects) {
    const Vector3d p = o.handle_pose.translation;
    out << fmt("  %-10s handle at (%.4f, %.4f, %.4f)", o.name.c_str(), p.x(), p.y(), p.z());
    for (Eigen::Index i = 0; i < o.q.size(); ++i) out << fmt(" q%ld=%.4f", static_cast<long>(i), o.q[i]);
    out << '\n';
  }
  return simlog.completed ? kOk : kSimulationFailure;
}

Scenario read_scenario(const Options& o, const Config& cfg) {
  if (o.scenario.empty()) throw CLI::RequiredError("--scenario");
  if (!fs::exists(o.scenario)) throw ScenarioError("scenario file '" + o.scenario + "' does not exist");
  return load_scenario(o.scenario, cfg.platform);
}

int cmd_plan(const Options& o, std::ostream& out, const Log& log) {
  const Config cfg = make_config(o);
  const Scenario sc = read_scenario(o, cfg);
  plan_and_write(sc, cfg, ensure_dir(o.out), out, log);
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out, const Log& log) {
  const Config cfg = make_config(o);
  const Scenario sc = read_scenario(o, cfg);
  const fs::path dir = ensure_dir(o.out);
  const std::vector<PlannedStep> plan = plan_and_write(sc, cfg, dir, out, log);
  return simulate_and_write(sc, plan, cfg, dir, out, log);
}

int cmd_verify(const Options& o, std::ostream& out, const Log& log) {
  const Config cfg = make_config(o);
  const Scenario sc = read_scenario(o, cfg);
  const fs::path dir = !o.input.empty() ? fs::path(o.input) : o.out.empty() ? fs::path(".") : fs::path(o.out);
  std::vector<Trajectory> trajs;
  for (std::size_t s = 0; s < sc.steps.size(); ++s) {
    const fs::path csv = dir / (step_stem(s) + ".csv"), json = dir / (step_stem(s) + ".traj.json");
    log.debug("reading " + (fs::exists(csv) ? csv : json).string());
    trajs.push_back(fs::exists(csv) ? read_trajectory_csv(csv) : read_trajectory_json(json));
  }
  const std::vector<StepCheck> checks = verify_sequence(sc, trajs, cfg.planner);
  bool all = true;
  out << fmt("%-4s %-24s %-20s %14s %12s %s\n", "step", "name", "family", "value", "bound", "result");
  for (std::size_t s = 0; s < checks.size(); ++s) {
    for (const auto& v : checks[s].verdicts)
      out << fmt("%-4zu %-24s %-20s %14.6g %12.3g %s\n", s + 1, checks[s].step.c_str(), v.family.c_str(), v.value, v.bound,
                 v.pass ? "PASS" : "FAIL");
    all = all && checks[s].pass;
  }
  out << (all ? "verify: all constraints satisfied\n" : "verify: constraint violations found\n");
  return all ? kOk : kConstraintFailure;
}

int cmd_export(const Options& o, std::ostream& out, const Log&) {
  if (o.input.empty()) throw CLI::RequiredError("input");
  const fs::path in(o.input);
  const std::string ext = in.extension().string();
  const Trajectory t = ext == ".json" ? read_trajectory_json(in) : read_trajectory_csv(in);
  std::string stem = in.stem().string();
  if (stem.size() > 5 && stem.ends_with(".traj")) stem.resize(stem.size() - 5);
  const std::string name = stem + (o.format == "json" ? ".traj.json" : ".csv");
  fs::path dst = o.out.empty() ? in.parent_path() / name : fs::path(o.out);
  if (fs::is_directory(dst)) dst /= name;
  if (dst == in) throw TrajectoryIoError("export would overwrite its input '" + in.string() + "'");
  if (o.format == "json")
    write_trajectory_json(t, dst);
  else
    write_trajectory_csv(t, dst);
  out << "wrote " << dst.string() << '\n';
  return kOk;
}

int cmd_demo(const Options& o, std::ostream& out, const Log& log) {
  const Config cfg = make_config(o);
  const Scenario sc = builtin_scenario(o.demo, cfg.platform);
  const fs::path dir = ensure_dir(o.out);
  save_scenario(sc, dir / "scenario.json");
  const std::vector<PlannedStep> plan = plan_and_write(sc, cfg, dir, out, log);
  return simulate_and_write(sc, plan, cfg, dir, out, log);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Aerial manipulation planning and simulation with virtual kinematic chains", "aerovkc");
  app.require_subcommand(1);
  Options o;
  const Log log(err);

  auto common = [&](CLI::App* c, bool scenario) {
    if (scenario) c->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
    c->add_option("--out", o.out, "Output directory");
    c->add_option("--config", o.config, "Configuration JSON (defaults are built in)");
    c->add_option("--set", o.overrides, "Override a config value, e.g. --set sim.delay=0.03")->take_all();
    c->add_option("--seed", o.seed, "Noise seed for the simulator");
  };
  CLI::App* plan = app.add_subcommand("plan", "Plan every step and write step_XX.csv with residual reports");
  common(plan, true);
  CLI::App* simulate = app.add_subcommand("simulate", "Plan, then track the plan in closed loop and write the SimLog");
  common(simulate, true);
  CLI::App* verify = app.add_subcommand("verify", "Re-check planned trajectories against their scenario");
  common(verify, true);
  verify->add_option("input", o.input, "Directory holding step_XX.csv (defaults to --out)");
  CLI::App* exp = app.add_subcommand("export", "Convert a trajectory between CSV and JSON");
  exp->add_option("input", o.input, "Trajectory file (.csv or .json)")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", o.out, "Output file or directory");
  exp->add_option("--format", o.format, "Target format")->check(CLI::IsMember({"csv", "json"}));
  CLI::App* demo = app.add_subcommand("demo", "Run a built-in scenario end to end");
  demo->add_option("name", o.demo, "Scenario name")->required()->check(CLI::IsMember(builtin_scenario_names()));
  common(demo, false);

  std::vector<std::string> rest(args.rbegin(), args.rend());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "aerovkc: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*plan) return cmd_plan(o, out, log);
    if (*simulate) return cmd_simulate(o, out, log);
    if (*verify) return cmd_verify(o, out, log);
    if (*exp) return cmd_export(o, out, log);
    if (*demo) return cmd_demo(o, out, log);
    return kUsage;
  } catch (const CLI::ParseError& e) {
    err << "aerovkc: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "aerovkc: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ScenarioError& e) {
    err << "aerovkc: scenario error: " << e.what() << '\n';
    return kScenarioError;
  } catch (const TrajectoryIoError& e) {
    err << "aerovkc: i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const SequenceError& e) {
    err << "aerovkc: planning failed at " << e.what() << '\n';
    return kConstraintFailure;
  } catch (const SimulationError& e) {
    err << "aerovkc: simulation error: " << e.what() << '\n';
    return kSimulationFailure;
  } catch (const std::exception& e) {
    err << "aerovkc: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace aerovkc::cli
