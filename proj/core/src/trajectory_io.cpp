#include "aerovkc/trajectory_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aerovkc {

using nlohmann::json;

namespace {

void check_shape(const Trajectory& t) {
  if (t.states.rows() < 2) throw TrajectoryIoError("trajectory needs at least two knots");
  if (static_cast<Eigen::Index>(t.dof_names.size()) != t.states.cols())
    throw TrajectoryIoError("trajectory has " + std::to_string(t.states.cols()) + " columns but " +
                            std::to_string(t.dof_names.size()) + " names");
  if (!(t.dt > 0.0)) throw TrajectoryIoError("trajectory dt must be positive");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  check_shape(traj);
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw TrajectoryIoError("cannot write '" + path.string() + "'");
  std::fputs("t", f);
  for (const std::string& n : traj.dof_names) std::fprintf(f, ",%s", n.c_str());
  std::fputc('\n', f);
  for (Eigen::Index r = 0; r < traj.states.rows(); ++r) {
    std::fprintf(f, "%.17g", traj.dt * static_cast<double>(r));
    for (Eigen::Index c = 0; c < traj.states.cols(); ++c) std::fprintf(f, ",%.17g", traj.states(r, c));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TrajectoryIoError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw TrajectoryIoError(path.string() + ": empty file");
  std::vector<std::string> header = split(line);
  if (header.size() < 2 || header.front() != "t") throw TrajectoryIoError(path.string() + ": header must start with 't'");
  Trajectory traj;
  traj.dof_names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size())
      throw TrajectoryIoError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " values");
    std::vector<double> row;
    for (const std::string& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str() || *end != '\0')
        throw TrajectoryIoError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw TrajectoryIoError(path.string() + ": needs at least two rows");
  traj.states.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(traj.dof_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 1; c < header.size(); ++c)
      traj.states(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = rows[r][c];
  traj.dt = rows[1][0] - rows[0][0];
  for (std::size_t r = 1; r < rows.size(); ++r)
    if (std::abs(rows[r][0] - traj.dt * static_cast<double>(r)) > 1e-9)
      throw TrajectoryIoError(path.string() + ": time column is not uniformly spaced");
  check_shape(traj);
  return traj;
}

json trajectory_to_json(const Trajectory& traj) {
  check_shape(traj);
  json states = json::array();
  for (Eigen::Index r = 0; r < traj.states.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < traj.states.cols(); ++c) row.push_back(traj.states(r, c));
    states.push_back(row);
  }
  return {{"dt", traj.dt}, {"dof_names", traj.dof_names}, {"states", states}};
}

Trajectory trajectory_from_json(const json& j) {
  try {
    Trajectory traj;
    traj.dt = j.at("dt").get<double>();
    traj.dof_names = j.at("dof_names").get<std::vector<std::string>>();
    const json& s = j.at("states");
    traj.states.resize(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(traj.dof_names.size()));
    for (std::size_t r = 0; r < s.size(); ++r) {
      if (s[r].size() != traj.dof_names.size()) throw TrajectoryIoError("state row " + std::to_string(r) + " has the wrong size");
      for (std::size_t c = 0; c < traj.dof_names.size(); ++c)
        traj.states(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s[r][c].get<double>();
    }
    check_shape(traj);
    return traj;
  } catch (const TrajectoryIoError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrajectoryIoError(std::string("invalid trajectory: ") + e.what());
  }
}

void write_trajectory_json(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TrajectoryIoError("cannot write '" + path.string() + "'");
  out << trajectory_to_json(traj).dump(1) << '\n';
}

Trajectory read_trajectory_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TrajectoryIoError("cannot open '" + path.string() + "'");
  try {
    return trajectory_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw TrajectoryIoError(path.string() + ": " + e.what());
  }
}

json residual_report(const std::string& step, const Trajectory& traj, const CollisionSettings& settings) {
  json families = json::array();
  for (const auto& v : traj.residuals.verdicts(settings))
    families.push_back({{"family", v.family}, {"value", v.value}, {"bound", v.bound}, {"pass", v.pass}});
  return {{"step", step},
          {"knots", traj.states.rows()},
          {"dt", traj.dt},
          {"objective", traj.residuals.objective},
          {"feasible", traj.residuals.feasible(settings)},
          {"residuals", families},
          {"solver", {{"outer_iterations", traj.stats.outer_iterations}, {"inner_iterations", traj.stats.inner_iterations}}}};
}

std::vector<StepCheck> verify_sequence(const Scenario& sc, const std::vector<Trajectory>& trajectories,
                                       const PlannerConfig& cfg) {
  if (trajectories.size() != sc.steps.size())
    throw TrajectoryIoError("scenario has " + std::to_string(sc.steps.size()) + " steps but " +
                            std::to_string(trajectories.size()) + " trajectories were given");
  std::vector<StepCheck> out;
  SceneState state = SceneState::initial(sc.scene);
  for (std::size_t s = 0; s < sc.steps.size(); ++s) {
    const PlanningProblem problem = build_problem(sc.scene, state, sc.steps[s], cfg);
    const Trajectory& t = trajectories[s];
    const auto names = problem.vkc.dof_names();
    if (t.dof_names != names)
      throw TrajectoryIoError("step '" + sc.steps[s].name + "': trajectory columns do not match the step's chain");
    if (std::abs(t.dt - problem.dt) > 1e-12)
      throw TrajectoryIoError("step '" + sc.steps[s].name + "': trajectory dt does not match the planner dt");
    StepCheck c;
    c.step = sc.steps[s].name;
    c.residuals = verify(problem, t.states);
    c.verdicts = c.residuals.verdicts(problem.collision);
    c.pass = c.residuals.feasible(problem.collision);
    out.push_back(std::move(c));
    apply_final_state(sc.scene, state, problem.vkc, t.states.bottomRows(1).transpose());
  }
  return out;
}

}  // namespace aerovkc
