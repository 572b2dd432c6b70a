#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ifport/error.hpp"
#include "ifport/sampling.hpp"
#include "ifport/types.hpp"

namespace ifport {

/// Euclidean projection onto the unit simplex (sort-and-threshold).
inline Vector project_simplex(const Vector& v) {
  const auto n = v.size();
  if (n < 2) throw Error(ErrorKind::DimensionMismatch, "projection needs n >= 2");
  if (!v.allFinite()) throw Error(ErrorKind::NonFiniteInput, "cannot project non-finite vector");

  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<size_t>(j)] - t > 0.0) theta = t;
  }
  Vector x = (v.array() - theta).cwiseMax(0.0);
  // Rounding can leave the sum a few ulps off; spread the residual over the support.
  const double s = x.sum();
  if (s > 0.0 && s != 1.0) x /= s;
  return x;
}

enum class Termination { StepTolerance, ObjectiveTolerance, StepUnderflow, MaxIterations };

constexpr std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::StepTolerance: return "step_tolerance";
    case Termination::ObjectiveTolerance: return "objective_tolerance";
    case Termination::StepUnderflow: return "step_underflow";
    case Termination::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

struct SolverConfig {
  int max_iters = 50000;  // per start, shared by all phases
  double tol_step = 1e-10;
  double tol_obj = 1e-12;
  int obj_window = 100;
  double initial_step = 1.0;
  double backtrack_factor = 0.5;
  double armijo_c = 1e-4;
  int n_starts = 16;
  double tau_start = 1e-2;
  double tau_end = 1e-6;
  double tau_factor = 0.5;
  std::uint64_t seed = 20240611;
  bool record_history = false;

  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
    if (max_iters <= 0) fail("max_iters must be positive");
    if (!(tol_step > 0.0) || !(tol_obj > 0.0)) fail("tolerances must be positive");
    if (obj_window <= 0) fail("obj_window must be positive");
    if (!(initial_step > 0.0)) fail("initial_step must be positive");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) fail("backtrack_factor must be in (0,1)");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("armijo_c must be in (0,1)");
    if (n_starts <= 0) fail("n_starts must be positive");
    if (!(tau_end > 0.0) || !(tau_start >= tau_end)) fail("need tau_start >= tau_end > 0");
    if (!(tau_factor > 0.0 && tau_factor < 1.0)) fail("tau_factor must be in (0,1)");
  }

  /// tau_start, tau_start*factor, ... while above tau_end, then tau_end.
  std::vector<double> smoothing_schedule() const {
    std::vector<double> taus;
    for (double t = tau_start; t > tau_end; t *= tau_factor) taus.push_back(t);
    taus.push_back(tau_end);
    return taus;
  }
};

/// value(x) is the true objective; direction(x) a gradient or subgradient.
template <class F>
concept Objective = requires(const F& f, const Vector& x) {
  { f.dimension() } -> std::convertible_to<Eigen::Index>;
  { f.value(x) } -> std::convertible_to<double>;
  { f.direction(x) } -> std::convertible_to<Vector>;
};

/// Objectives that also offer a smoothed surrogate gradient at temperature tau.
template <class F>
concept SmoothableObjective = Objective<F> && requires(const F& f, const Vector& x, double tau) {
  { f.smoothed_direction(x, tau) } -> std::convertible_to<Vector>;
};

struct PhaseTrace {
  double tau = 0.0;  // 0 for an unsmoothed phase
  int iterations = 0;
  double final_value = 0.0;
  Termination reason = Termination::MaxIterations;
  std::vector<double> values;   // accepted objective values, if recorded
  std::vector<Vector> iterates;  // accepted iterates, if recorded
};

struct StartTrajectory {
  Vector start;
  int iterations = 0;
  double final_value = 0.0;
  Termination reason = Termination::MaxIterations;
  Vector final_point;
  std::vector<PhaseTrace> phases;

  bool converged() const noexcept { return reason != Termination::MaxIterations; }
};

struct SolveReport {
  PortfolioWeights x_star = PortfolioWeights::uniform(2);
  double objective = 0.0;
  std::vector<StartTrajectory> starts;
  std::size_t best_start = 0;
  bool converged = false;
  // Filled in by callers that know the problem structure.
  std::optional<CriterionValues> criterion_values;
  std::vector<double> membership_levels;
};

/// Uniform point, then the n vertices pulled 1e-3 into the interior, then
/// Dirichlet(1) draws; truncated to `n_starts` in that order.
inline std::vector<Vector> default_starts(Eigen::Index n, int n_starts, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::DimensionMismatch, "need n >= 2");
  constexpr double pull = 1e-3;
  std::vector<Vector> starts;
  const auto count = static_cast<size_t>(std::max(n_starts, 0));
  const Vector uniform = Vector::Constant(n, 1.0 / static_cast<double>(n));
  starts.push_back(uniform);
  for (Eigen::Index k = 0; k < n && starts.size() < count; ++k) {
    Vector v = pull * uniform;
    v[k] += 1.0 - pull;
    starts.push_back(std::move(v));
  }
  Rng rng(seed);
  while (starts.size() < count) starts.push_back(sample_dirichlet(rng, n));
  starts.resize(count);
  return starts;
}

namespace detail {

template <Objective F, class Direction>
PhaseTrace descend(const F& obj, Vector& x, double& fx, Direction&& direction,
                   const SolverConfig& cfg, int& budget, double tau) {
  PhaseTrace trace;
  trace.tau = tau;
  std::vector<double> window;  // recent objective values for the stall test
  window.push_back(fx);
  auto finish = [&](Termination why) {
    trace.reason = why;
    trace.final_value = fx;
    return trace;
  };

  while (true) {
    if (budget <= 0) return finish(Termination::MaxIterations);
    Vector g = direction(x);
    if (!g.allFinite()) return finish(Termination::StepUnderflow);
    const double gnorm = g.norm();
    if (gnorm == 0.0) return finish(Termination::StepTolerance);
    const Vector d = gnorm > 1.0 ? Vector(g / gnorm) : g;

    double alpha = cfg.initial_step;
    Vector xn;
    double fn = 0.0;
    double moved = 0.0;
    bool accepted = false;
    while (alpha >= 1e-16) {
      xn = project_simplex(x - alpha * d);
      const Vector delta = xn - x;
      moved = delta.lpNorm<Eigen::Infinity>();
      if (moved <= cfg.tol_step && alpha == cfg.initial_step) {
        return finish(Termination::StepTolerance);
      }
      bool ok = false;
      try {
        fn = obj.value(xn);
        ok = std::isfinite(fn) && fn <= fx + cfg.armijo_c * g.dot(delta);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ZeroVariance) throw;
      }
      if (ok) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack_factor;
    }
    if (!accepted) return finish(Termination::StepUnderflow);

    x = std::move(xn);
    fx = fn;
    --budget;
    ++trace.iterations;
    if (cfg.record_history) {
      trace.values.push_back(fx);
      trace.iterates.push_back(x);
    }
    if (moved <= cfg.tol_step) return finish(Termination::StepTolerance);
    window.push_back(fx);
    if (static_cast<int>(window.size()) > cfg.obj_window) {
      if (window.front() - fx <= cfg.tol_obj) return finish(Termination::ObjectiveTolerance);
      window.erase(window.begin());
    }
  }
}

}  // namespace detail

/// Projected (sub)gradient descent with Armijo backtracking on the true
/// objective, run from every start; the best final value wins (ties go to the
/// lowest start index). Smoothable objectives first run the temperature
/// schedule on the smoothed gradient and then a subgradient polish phase.
///
/// `converged` is false only when every start ran out of iterations.
template <Objective F>
SolveReport minimize(const F& obj, const SolverConfig& cfg, std::vector<Vector> starts = {}) {
  cfg.validate();
  const Eigen::Index n = obj.dimension();
  if (starts.empty()) starts = default_starts(n, cfg.n_starts, cfg.seed);

  SolveReport report;
  double best = std::numeric_limits<double>::infinity();
  for (size_t s = 0; s < starts.size(); ++s) {
    if (starts[s].size() != n) throw Error(ErrorKind::DimensionMismatch, "start has wrong size");
    StartTrajectory traj;
    traj.start = starts[s];
    Vector x = project_simplex(starts[s]);
    double fx = obj.value(x);
    int budget = cfg.max_iters;

    if constexpr (SmoothableObjective<F>) {
      for (double tau : cfg.smoothing_schedule()) {
        traj.phases.push_back(detail::descend(
            obj, x, fx, [&](const Vector& p) { return obj.smoothed_direction(p, tau); }, cfg,
            budget, tau));
        if (traj.phases.back().reason == Termination::MaxIterations) break;
      }
    }
    if (budget > 0) {
      traj.phases.push_back(detail::descend(
          obj, x, fx, [&](const Vector& p) { return obj.direction(p); }, cfg, budget, 0.0));
    }

    traj.iterations = cfg.max_iters - budget;
    traj.final_value = fx;
    traj.reason = traj.phases.back().reason;
    traj.final_point = x;
    if (fx < best) {
      best = fx;
      report.best_start = s;
    }
    report.starts.push_back(std::move(traj));
  }

  const auto& winner = report.starts[report.best_start];
  report.x_star = PortfolioWeights(winner.final_point);
  report.objective = winner.final_value;
  report.converged = std::any_of(report.starts.begin(), report.starts.end(),
                                 [](const StartTrajectory& t) { return t.converged(); });
  return report;
}

}  // namespace ifport
