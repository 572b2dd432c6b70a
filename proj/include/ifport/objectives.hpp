#pragma once

#include <cmath>

#include "ifport/error.hpp"
#include "ifport/market_model.hpp"
#include "ifport/types.hpp"

namespace ifport {

/// x'Qx at or below this is treated as riskless and the Sharpe ratio is undefined.
inline constexpr double kZeroVarianceTol = 1e-16;

namespace detail {

inline double checked_variance(const MarketModel& model, const Vector& x) {
  const double v = x.dot(model.covariance() * x);
  if (!(v > kZeroVarianceTol)) {
    throw Error(ErrorKind::ZeroVariance, "portfolio variance " + std::to_string(v));
  }
  return v;
}

}  // namespace detail

inline double expected_return(const MarketModel& model, const Vector& x) {
  return model.mean_returns().dot(x);
}

inline double variance(const MarketModel& model, const Vector& x) {
  return x.dot(model.covariance() * x);
}

inline double sharpe_ratio(const MarketModel& model, const Vector& x) {
  const double v = detail::checked_variance(model, x);
  return (expected_return(model, x) - model.risk_free_rate()) / std::sqrt(v);
}

/// Value of criterion `c` at `x`: -L'x, x'Qx or -(L'x - rf)/sqrt(x'Qx).
inline double eval(const MarketModel& model, const Vector& x, Criterion c) {
  switch (c) {
    case Criterion::NegExpectedReturn: return -expected_return(model, x);
    case Criterion::Variance: return variance(model, x);
    case Criterion::NegSharpe: return -sharpe_ratio(model, x);
  }
  return 0.0;
}

inline Vector grad(const MarketModel& model, const Vector& x, Criterion c) {
  switch (c) {
    case Criterion::NegExpectedReturn: return -model.mean_returns();
    case Criterion::Variance: return 2.0 * (model.covariance() * x);
    case Criterion::NegSharpe: {
      const Vector qx = model.covariance() * x;
      const double v = x.dot(qx);
      if (!(v > kZeroVarianceTol)) {
        throw Error(ErrorKind::ZeroVariance, "portfolio variance " + std::to_string(v));
      }
      const double sd = std::sqrt(v);
      const double excess = expected_return(model, x) - model.risk_free_rate();
      return -(model.mean_returns() / sd - (excess / (v * sd)) * qx);
    }
  }
  return Vector::Zero(x.size());
}

inline CriterionValues evaluate_all(const MarketModel& model, const Vector& x) {
  return {eval(model, x, Criterion::NegExpectedReturn), eval(model, x, Criterion::Variance),
          eval(model, x, Criterion::NegSharpe)};
}

/// Checks f(x2) < f(x1) => <grad f(x1), x2 - x1> < 0 for criterion `c`.
/// Vacuously true when f(x2) >= f(x1).
inline bool pseudoconvexity_witness(const MarketModel& model, Criterion c, const Vector& x1,
                                    const Vector& x2) {
  const double f1 = eval(model, x1, c);
  const double f2 = eval(model, x2, c);
  if (!(f2 < f1)) return true;
  return grad(model, x1, c).dot(x2 - x1) < 0.0;
}

}  // namespace ifport
