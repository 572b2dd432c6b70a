#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifport/error.hpp"
#include "ifport/market_model.hpp"
#include "ifport/objectives.hpp"
#include "ifport/solver.hpp"
#include "ifport/types.hpp"

namespace ifport {

/// Adapts one criterion of a model to the solver's objective interface.
class CriterionObjective {
 public:
  CriterionObjective(const MarketModel& model, Criterion c) : model_(&model), c_(c) {}

  Eigen::Index dimension() const { return model_->size(); }
  double value(const Vector& x) const { return eval(*model_, x, c_); }
  Vector direction(const Vector& x) const { return grad(*model_, x, c_); }

 private:
  const MarketModel* model_;
  Criterion c_;
};

struct CriterionMinimum {
  PortfolioWeights x;
  double value = 0.0;
  std::optional<SolveReport> report;  // absent for closed-form cases
};

/// y_min of a criterion over the simplex. The expected-return criterion is
/// linear and solved at the best vertex; the other two are solved by descent
/// from the uniform point and the n near-vertices, which suffices because a
/// local minimum of a pseudoconvex function is global.
inline CriterionMinimum minimize_criterion(const MarketModel& model, Criterion c,
                                           SolverConfig cfg = {}) {
  const auto n = model.size();
  if (c == Criterion::NegExpectedReturn) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < n; ++k) {
      if (model.mean_returns()[k] > model.mean_returns()[best]) best = k;
    }
    return {PortfolioWeights::vertex(n, best), -model.mean_returns()[best], std::nullopt};
  }
  CriterionObjective obj(model, c);
  auto report = minimize(obj, cfg, default_starts(n, static_cast<int>(n) + 1, cfg.seed));
  if (!report.converged) {
    std::string trace;
    for (const auto& s : report.starts) {
      trace += " [" + std::to_string(s.iterations) + " iters, f=" + std::to_string(s.final_value) +
               ", " + std::string(to_string(s.reason)) + "]";
    }
    throw Error(ErrorKind::SolverFailure,
                "minimizing " + std::string(to_string(c)) + " did not converge:" + trace);
  }
  return {report.x_star, report.objective, std::move(report)};
}

struct VertexBound {
  double value = 0.0;
  Eigen::Index vertex = 0;
};

/// Exact max of a criterion over the simplex, attained at a vertex: E* is
/// linear, V is convex and Sr is quasiconcave, so Sr* = -Sr is quasiconvex.
/// Ties go to the lowest asset index.
inline VertexBound maximize_criterion_vertex(const MarketModel& model, Criterion c) {
  const auto n = model.size();
  auto at = [&](Eigen::Index k) {
    const double l = model.mean_returns()[k];
    const double q = model.covariance()(k, k);
    switch (c) {
      case Criterion::NegExpectedReturn: return -l;
      case Criterion::Variance: return q;
      case Criterion::NegSharpe: return -(l - model.risk_free_rate()) / std::sqrt(q);
    }
    return 0.0;
  };
  VertexBound best{at(0), 0};
  for (Eigen::Index k = 1; k < n; ++k) {
    const double v = at(k);
    if (v > best.value) best = {v, k};
  }
  return best;
}

inline double maximize_criterion_bound(const MarketModel& model, Criterion c) {
  return maximize_criterion_vertex(model, c).value;
}

struct CriterionBounds {
  Criterion criterion = Criterion::NegExpectedReturn;
  double y_min = 0.0;
  double y_max = 0.0;
  double y1 = 0.0;  // aspiration level, = y_min
  double y0 = 0.0;  // reservation level, = y_max
  PortfolioWeights minimizer = PortfolioWeights::uniform(2);
  Eigen::Index max_vertex = 0;
};

/// Per-criterion aspiration bounds for the criteria of one problem.
class AspirationBounds {
 public:
  explicit AspirationBounds(std::vector<CriterionBounds> per) : per_(std::move(per)) {}

  bool has(Criterion c) const {
    return std::any_of(per_.begin(), per_.end(),
                       [c](const CriterionBounds& b) { return b.criterion == c; });
  }

  const CriterionBounds& operator[](Criterion c) const {
    for (const auto& b : per_) {
      if (b.criterion == c) return b;
    }
    throw Error(ErrorKind::ConfigError, "no bounds for criterion " + std::string(to_string(c)));
  }

  const std::vector<CriterionBounds>& all() const noexcept { return per_; }

 private:
  std::vector<CriterionBounds> per_;
};

inline AspirationBounds compute_bounds(const MarketModel& model,
                                       std::span<const Criterion> criteria = kAllCriteria,
                                       const SolverConfig& cfg = {}) {
  std::vector<CriterionBounds> per;
  for (Criterion c : criteria) {
    auto lo = minimize_criterion(model, c, cfg);
    const auto hi = maximize_criterion_vertex(model, c);
    const double span = hi.value - lo.value;
    const double scale = std::max({1.0, std::abs(lo.value), std::abs(hi.value)});
    if (!(span > 1e-12 * scale)) {
      throw Error(ErrorKind::DegenerateCriterion,
                  std::string(to_string(c)) + " is constant over the simplex (y_min " +
                      std::to_string(lo.value) + ", y_max " + std::to_string(hi.value) + ")");
    }
    per.push_back({c, lo.value, hi.value, lo.value, hi.value, lo.x, hi.vertex});
  }
  return AspirationBounds(std::move(per));
}

}  // namespace ifport
