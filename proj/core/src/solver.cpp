#include "aerovkc/solver.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace aerovkc {

namespace {

using Triplet = Eigen::Triplet<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Rows of a pose error and its Jacobian with respect to the chain state.
void pose_rows(const KinematicChain& chain, const ChainState& q, const RigidTransform& actual, std::string_view link,
               const RigidTransform& target, const Vector6d& mask, Eigen::Ref<Eigen::VectorXd> r,
               Eigen::Ref<Eigen::MatrixXd> jac) {
  const Vector6d e = pose_error(actual, target);
  r = e.cwiseProduct(mask);
  const Jacobian j = jacobian(chain, q, link);
  jac.topRows<3>() = j.topRows<3>();
  jac.bottomRows<3>() = so3::right_jacobian_inverse(e.tail<3>()) * actual.rotation.transpose() * j.bottomRows<3>();
  jac = mask.asDiagonal() * jac;
}

/// Anchors, optional goal and pinned joint values stacked as one task.
struct IkTask {
  const std::vector<Anchor>* anchors = nullptr;
  const GoalSpec* goal = nullptr;
  std::vector<std::pair<int, double>> pinned;
};

void task_rows(const KinematicChain& chain, const ChainState& q, const IkTask& task, Eigen::VectorXd& r,
               Eigen::MatrixXd& jac) {
  const int n = chain.dof();
  const auto poses = link_poses(chain, q);
  std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>> blocks;
  auto add_pose = [&](const std::string& link, const RigidTransform& target, const Vector6d& mask) {
    Eigen::VectorXd rr(6);
    Eigen::MatrixXd jj(6, n);
    pose_rows(chain, q, poses[static_cast<std::size_t>(chain.link_index(link))], link, target, mask, rr, jj);
    blocks.emplace_back(std::move(rr), std::move(jj));
  };
  if (task.anchors)
    for (const Anchor& a : *task.anchors) add_pose(a.link, a.pose, Vector6d::Ones());
  if (task.goal) {
    const GoalSpec& g = *task.goal;
    if (g.kind == GoalKind::joint_target) {
      const Eigen::VectorXd e = goal_error(chain, q, g);
      Eigen::MatrixXd jj = Eigen::MatrixXd::Zero(e.size(), n);
      for (Eigen::Index k = 0; k < e.size(); ++k)
        jj(k, g.joint_indices.empty() ? static_cast<int>(k) : g.joint_indices[static_cast<std::size_t>(k)]) = 1.0;
      blocks.emplace_back(e, std::move(jj));
    } else {
      add_pose(g.kind == GoalKind::ee_pose ? chain.tip_link() : g.link, g.pose, g.pose_mask);
    }
  }
  if (!task.pinned.empty()) {
    Eigen::VectorXd rr(static_cast<Eigen::Index>(task.pinned.size()));
    Eigen::MatrixXd jj = Eigen::MatrixXd::Zero(rr.size(), n);
    for (std::size_t k = 0; k < task.pinned.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      rr[kk] = q[task.pinned[k].first] - task.pinned[k].second;
      jj(kk, task.pinned[k].first) = 1.0;
    }
    blocks.emplace_back(std::move(rr), std::move(jj));
  }
  Eigen::Index rows = 0;
  for (const auto& b : blocks) rows += b.first.size();
  r.resize(rows);
  jac.resize(rows, n);
  rows = 0;
  for (const auto& b : blocks) {
    r.segment(rows, b.first.size()) = b.first;
    jac.middleRows(rows, b.first.size()) = b.second;
    rows += b.first.size();
  }
}

ChainState clamp_to(const ChainState& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

/// Damped least squares with a null-space pull towards `ref`, projected onto the box [lo, hi].
ChainState solve_ik(const KinematicChain& chain, const ChainState& init, const ChainState& ref, const IkTask& task,
                    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int iterations) {
  const int n = chain.dof();
  ChainState x = clamp_to(init, lo, hi);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  task_rows(chain, x, task, r, jac);
  if (r.size() == 0) return x;
  double err = r.squaredNorm();
  double damping = 1e-4;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd a = jac * jac.transpose() + damping * Eigen::MatrixXd::Identity(r.size(), r.size());
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd step = -jac.transpose() * ldlt.solve(r);
    const Eigen::MatrixXd null = Eigen::MatrixXd::Identity(n, n) - jac.transpose() * ldlt.solve(jac);
    const Eigen::VectorXd pull = 0.2 * null * (ref - x);
    const ChainState cand = clamp_to(x + step + pull, lo, hi);
    Eigen::VectorXd rc;
    Eigen::MatrixXd jc;
    task_rows(chain, cand, task, rc, jc);
    const double ec = rc.squaredNorm();
    if (ec <= err || (ec < 1e-20 && err < 1e-20)) {
      const bool settled = (cand - x).lpNorm<Eigen::Infinity>() < 1e-12;
      x = cand;
      r = rc;
      jac = jc;
      err = ec;
      damping = std::max(damping * 0.3, 1e-9);
      if (settled && err < 1e-24) break;
    } else {
      damping *= 10.0;
      if (damping > 1e6) break;
    }
  }
  return x;
}

/// Stacks objective, augmented-Lagrangian equality and inequality residuals
/// over the free states x_2..x_T.
class Assembler {
 public:
  Assembler(const PlanningProblem& p, const SolverOptions& o) : p_(p), o_(o), n_(p.vkc.dof()), T_(p.T) {
    lo_ = p.limits.x_min.array() + o.position_margin;
    hi_ = p.limits.x_max.array() - o.position_margin;
    for (int i = 0; i < n_; ++i)
      if (lo_[i] > hi_[i]) lo_[i] = hi_[i] = 0.5 * (p.limits.x_min[i] + p.limits.x_max[i]);
    vmax_ = p.limits.v_max * p.dt * (1.0 - o.rate_margin);
    amax_ = p.limits.a_max * p.dt * p.dt * (1.0 - o.rate_margin);
    tight_ = p.collision;
    tight_.dist_safe += o.collision_margin;
    goal_rows_ = goal_error(p.vkc, p.x_start, p.goal).size();
    anchors_ = static_cast<int>(p.anchors.size());
    n_eq_ = (T_ - 1) * 6 * anchors_ + static_cast<int>(goal_rows_);
    n_in_ = (T_ - 1) * n_ * 2 + (T_ - 1) * n_ + (T_ - 2) * n_ + (T_ - 1) * 2;
    n_obj_ = (T_ - 1) * n_ + (T_ - 2) * n_;
  }

  int vars() const { return (T_ - 1) * n_; }
  int n_eq() const { return n_eq_; }
  int n_in() const { return n_in_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }

  StateMatrix unpack(const Eigen::VectorXd& z) const {
    StateMatrix x(T_, n_);
    x.row(0) = p_.x_start.transpose();
    for (int t = 1; t < T_; ++t) x.row(t) = z.segment((t - 1) * n_, n_).transpose();
    return x;
  }
  Eigen::VectorXd pack(const StateMatrix& x) const {
    Eigen::VectorXd z(vars());
    for (int t = 1; t < T_; ++t) z.segment((t - 1) * n_, n_) = x.row(t).transpose();
    return z;
  }

  /// Equality values h (= 0) and inequality values g (<= 0) with optional Jacobians.
  void constraints(const StateMatrix& x, Eigen::VectorXd& h, Eigen::VectorXd& g, std::vector<Triplet>* jh,
                   std::vector<Triplet>* jg) const {
    h.setZero(n_eq_);
    g.setZero(n_in_);
    int row = 0;
    Eigen::VectorXd r;
    Eigen::MatrixXd jac;
    if (anchors_ > 0) {
      IkTask task;
      task.anchors = &p_.anchors;
      for (int t = 1; t < T_; ++t) {
        const ChainState xt = x.row(t).transpose();
        task_rows(p_.vkc, xt, task, r, jac);
        h.segment(row, r.size()) = r;
        if (jh) add_dense(*jh, row, t, jac);
        row += static_cast<int>(r.size());
      }
    }
    {
      IkTask task;
      task.goal = &p_.goal;
      const ChainState xT = x.row(T_ - 1).transpose();
      task_rows(p_.vkc, xT, task, r, jac);
      h.segment(row, r.size()) = r;
      if (jh) add_dense(*jh, row, T_ - 1, jac);
    }

    row = 0;
    for (int t = 1; t < T_; ++t)
      for (int i = 0; i < n_; ++i) {
        g[row] = x(t, i) - hi_[i];
        if (jg) jg->emplace_back(row, col(t, i), 1.0);
        ++row;
        g[row] = lo_[i] - x(t, i);
        if (jg) jg->emplace_back(row, col(t, i), -1.0);
        ++row;
      }
    for (int t = 0; t + 1 < T_; ++t)
      for (int i = 0; i < n_; ++i) {
        const double d = x(t + 1, i) - x(t, i);
        const double s = d >= 0.0 ? 1.0 : -1.0;
        g[row] = std::abs(d) - vmax_[i];
        if (jg) {
          jg->emplace_back(row, col(t + 1, i), s);
          if (t > 0) jg->emplace_back(row, col(t, i), -s);
        }
        ++row;
      }
    for (int t = 1; t + 1 < T_; ++t)
      for (int i = 0; i < n_; ++i) {
        const double d = x(t + 1, i) - 2.0 * x(t, i) + x(t - 1, i);
        const double s = d >= 0.0 ? 1.0 : -1.0;
        g[row] = std::abs(d) - amax_[i];
        if (jg) {
          jg->emplace_back(row, col(t + 1, i), s);
          jg->emplace_back(row, col(t, i), -2.0 * s);
          if (t > 1) jg->emplace_back(row, col(t - 1, i), s);
        }
        ++row;
      }
    for (int t = 1; t < T_; ++t) {
      const ChainState xt = x.row(t).transpose();
      const CollisionResidual c = collision_constraints(p_.vkc, xt, p_.world, tight_);
      g[row] = c.env;
      g[row + 1] = c.self;
      if (jg && (c.env > 0.0 || c.self > 0.0)) {
        for (int i = 0; i < n_; ++i) {
          ChainState xp = xt, xm = xt;
          xp[i] += o_.fd_step;
          xm[i] -= o_.fd_step;
          const CollisionResidual cp = collision_constraints(p_.vkc, xp, p_.world, tight_);
          const CollisionResidual cm = collision_constraints(p_.vkc, xm, p_.world, tight_);
          const double de = (cp.env - cm.env) / (2 * o_.fd_step);
          const double ds = (cp.self - cm.self) / (2 * o_.fd_step);
          if (de != 0.0) jg->emplace_back(row, col(t, i), de);
          if (ds != 0.0) jg->emplace_back(row + 1, col(t, i), ds);
        }
      }
      row += 2;
    }
  }

  /// Residual of the augmented Lagrangian as a least-squares vector.
  void residual(const Eigen::VectorXd& z, double mu, const Eigen::VectorXd& lam_eq, const Eigen::VectorXd& lam_in,
                Eigen::VectorXd& r, SparseMatrix* jac) const {
    const StateMatrix x = unpack(z);
    Eigen::VectorXd h, g;
    std::vector<Triplet> jh, jg;
    constraints(x, h, g, jac ? &jh : nullptr, jac ? &jg : nullptr);
    const double s = std::sqrt(0.5 * mu);
    r.resize(n_obj_ + n_eq_ + n_in_);
    std::vector<Triplet> trip;
    int row = 0;
    for (int t = 0; t + 1 < T_; ++t)
      for (int i = 0; i < n_; ++i, ++row) {
        const double w = p_.w_v[i];
        r[row] = w * (x(t + 1, i) - x(t, i));
        if (jac) {
          trip.emplace_back(row, col(t + 1, i), w);
          if (t > 0) trip.emplace_back(row, col(t, i), -w);
        }
      }
    for (int t = 1; t + 1 < T_; ++t)
      for (int i = 0; i < n_; ++i, ++row) {
        const double w = p_.w_a[i];
        r[row] = w * (x(t + 1, i) - 2.0 * x(t, i) + x(t - 1, i));
        if (jac) {
          trip.emplace_back(row, col(t + 1, i), w);
          trip.emplace_back(row, col(t, i), -2.0 * w);
          if (t > 1) trip.emplace_back(row, col(t - 1, i), w);
        }
      }
    r.segment(row, n_eq_) = s * (h + lam_eq / mu);
    if (jac)
      for (const Triplet& tr : jh) trip.emplace_back(row + tr.row(), tr.col(), s * tr.value());
    row += n_eq_;
    Eigen::VectorXd shifted = g + lam_in / mu;
    for (int k = 0; k < n_in_; ++k) r[row + k] = s * std::max(0.0, shifted[k]);
    if (jac) {
      for (const Triplet& tr : jg)
        if (shifted[tr.row()] > 0.0) trip.emplace_back(row + tr.row(), tr.col(), s * tr.value());
      jac->resize(r.size(), vars());
      jac->setFromTriplets(trip.begin(), trip.end());
    }
  }

 private:
  int col(int t, int i) const { return (t - 1) * n_ + i; }

  void add_dense(std::vector<Triplet>& out, int row, int t, const Eigen::MatrixXd& jac) const {
    for (Eigen::Index a = 0; a < jac.rows(); ++a)
      for (int i = 0; i < n_; ++i)
        if (jac(a, i) != 0.0) out.emplace_back(row + static_cast<int>(a), col(t, i), jac(a, i));
  }

  const PlanningProblem& p_;
  const SolverOptions& o_;
  int n_, T_;
  Eigen::VectorXd lo_, hi_, vmax_, amax_;
  CollisionSettings tight_;
  Eigen::Index goal_rows_ = 0;
  int anchors_ = 0;
  int n_eq_ = 0, n_in_ = 0, n_obj_ = 0;
};

/// Levenberg-Marquardt on the stacked residual; returns the iteration count.
int minimize(const Assembler& a, Eigen::VectorXd& z, double mu, const Eigen::VectorXd& lam_eq,
             const Eigen::VectorXd& lam_in, int max_iter) {
  Eigen::VectorXd r;
  SparseMatrix jac;
  a.residual(z, mu, lam_eq, lam_in, r, &jac);
  double cost = r.squaredNorm();
  double damping = 1e-4;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  int it = 0;
  for (; it < max_iter; ++it) {
    SparseMatrix jtj = SparseMatrix(jac.transpose()) * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-14) break;
    bool accepted = false;
    while (!accepted && damping < 1e12) {
      SparseMatrix lhs = jtj;
      for (int k = 0; k < lhs.rows(); ++k) lhs.coeffRef(k, k) += damping * (1.0 + jtj.coeff(k, k));
      ldlt.compute(lhs);
      if (ldlt.info() != Eigen::Success) {
        damping *= 10.0;
        continue;
      }
      const Eigen::VectorXd step = ldlt.solve(-grad);
      const Eigen::VectorXd cand = z + step;
      Eigen::VectorXd rc;
      a.residual(cand, mu, lam_eq, lam_in, rc, nullptr);
      const double cc = rc.squaredNorm();
      if (cc < cost) {
        const double gain = cost - cc;
        z = cand;
        damping = std::max(damping / 3.0, 1e-12);
        accepted = true;
        const bool small = gain <= 1e-15 * (1.0 + cost) || step.lpNorm<Eigen::Infinity>() < 1e-12;
        a.residual(z, mu, lam_eq, lam_in, r, &jac);
        cost = r.squaredNorm();
        if (small) return it + 1;
      } else {
        damping *= 4.0;
      }
    }
    if (!accepted) break;
  }
  return it;
}

}  // namespace

ChainState ik_seed(const PlanningProblem& problem, const SolverOptions& options) {
  problem.validate();
  const Eigen::VectorXd lo = problem.limits.x_min.array() + options.position_margin;
  const Eigen::VectorXd hi = problem.limits.x_max.array() - options.position_margin;
  IkTask task;
  task.anchors = &problem.anchors;
  task.goal = &problem.goal;
  const ChainState init = problem.ik_hint ? *problem.ik_hint : problem.x_start;
  return solve_ik(problem.vkc, init, init, task, lo.cwiseMin(hi), hi.cwiseMax(lo), options.ik_iterations);
}

SolveResult solve(const PlanningProblem& problem, const SolverOptions& options) {
  problem.validate();
  const auto start = std::chrono::steady_clock::now();
  const int n = problem.vkc.dof();
  const int T = problem.T;
  const Assembler assembler(problem, options);

  // Seed: interpolate towards a goal-consistent state; with anchors, project each
  // interpolated state back onto the loop-closure constraints.
  const ChainState seed = ik_seed(problem, options);
  StateMatrix x0(T, n);
  x0.row(0) = problem.x_start.transpose();
  ChainState prev = problem.x_start;
  for (int t = 1; t < T; ++t) {
    const double s = static_cast<double>(t) / (T - 1);
    ChainState lerp = problem.x_start + s * (seed - problem.x_start);
    if (!problem.anchors.empty()) {
      IkTask task;
      task.anchors = &problem.anchors;
      if (problem.goal.kind == GoalKind::joint_target)
        for (std::size_t k = 0; k < problem.goal.joint_indices.size(); ++k) {
          const int i = problem.goal.joint_indices[k];
          task.pinned.emplace_back(i, lerp[i]);
        }
      lerp = solve_ik(problem.vkc, prev, lerp, task, assembler.lo(), assembler.hi(), 60);
    }
    x0.row(t) = lerp.transpose();
    prev = lerp;
  }

  Eigen::VectorXd z = assembler.pack(x0);
  Eigen::VectorXd lam_eq = Eigen::VectorXd::Zero(assembler.n_eq());
  Eigen::VectorXd lam_in = Eigen::VectorXd::Zero(assembler.n_in());
  double mu = options.mu0;
  SolveResult result;
  result.trajectory.dt = problem.dt;
  result.trajectory.dof_names = problem.vkc.dof_names();
  SolveStats& stats = result.trajectory.stats;
  StateMatrix x = x0;
  StateMatrix best;
  Residuals best_residuals;
  int polish = 0;
  for (int outer = 0; outer < options.max_outer + polish; ++outer) {
    stats.inner_iterations += minimize(assembler, z, mu, lam_eq, lam_in, options.max_inner);
    stats.outer_iterations = outer + 1;
    x = assembler.unpack(z);
    // Tightened bounds keep positions inside the nominal box; clamp away round-off.
    for (int t = 1; t < T; ++t)
      x.row(t) = x.row(t).cwiseMax(problem.limits.x_min.transpose()).cwiseMin(problem.limits.x_max.transpose());
    const Residuals res = verify(problem, x);
    Eigen::VectorXd h, g;
    assembler.constraints(x, h, g, nullptr, nullptr);
    if (res.feasible(problem.collision)) {
      result.success = true;
      best = x;
      best_residuals = res;
      if (h.size() == 0 || h.lpNorm<Eigen::Infinity>() <= options.equality_tolerance || polish >= options.max_polish) break;
      // Polish: multiplier update at fixed penalty.
      ++polish;
      lam_eq += mu * h;
      lam_in = (lam_in + mu * g).cwiseMax(0.0);
      continue;
    }
    if (result.success) break;
    best = x;
    best_residuals = res;
    lam_eq += mu * h;
    lam_in = (lam_in + mu * g).cwiseMax(0.0);
    mu *= options.mu_factor;
  }
  x = best;
  result.trajectory.residuals = best_residuals;
  result.trajectory.states = x;
  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!result.success) {
    std::ostringstream os;
    os << "no feasible trajectory after " << stats.outer_iterations << " outer iterations:";
    for (const auto& v : result.trajectory.residuals.verdicts(problem.collision))
      if (!v.pass) os << ' ' << v.family << '=' << v.value << " (bound " << v.bound << ')';
    result.report = os.str();
  }
  return result;
}

std::string format_residuals(const Residuals& r, const CollisionSettings& c) {
  std::ostringstream os;
  char buf[160];
  for (const auto& v : r.verdicts(c)) {
    std::snprintf(buf, sizeof buf, "%-20s %-4s %.3e (bound %.1e)\n", v.family.c_str(), v.pass ? "PASS" : "FAIL",
                  v.value, v.bound);
    os << buf;
  }
  return os.str();
}

}  // namespace aerovkc
