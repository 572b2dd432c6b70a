#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "ifport/error.hpp"

namespace ifport {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSimplexSumTol = 1e-9;

/// The three minimized criteria of the tri-criteria model, in fixed order.
enum class Criterion : int {
  NegExpectedReturn = 0,
  Variance = 1,
  NegSharpe = 2,
};

inline constexpr std::array<Criterion, 3> kAllCriteria = {
    Criterion::NegExpectedReturn, Criterion::Variance, Criterion::NegSharpe};

constexpr int index_of(Criterion c) noexcept { return static_cast<int>(c); }

constexpr std::string_view to_string(Criterion c) noexcept {
  switch (c) {
    case Criterion::NegExpectedReturn: return "neg_return";
    case Criterion::Variance: return "variance";
    case Criterion::NegSharpe: return "neg_sharpe";
  }
  return "unknown";
}

/// True when `v` is a point of the unit simplex within `sum_tol`.
inline bool on_simplex(const Vector& v, double sum_tol = kSimplexSumTol) {
  if (v.size() == 0) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) return false;
  }
  return std::abs(v.sum() - 1.0) <= sum_tol;
}

/// Portfolio allocation: nonnegative weights summing to one.
class PortfolioWeights {
 public:
  explicit PortfolioWeights(Vector weights) : weights_(std::move(weights)) {
    if (!on_simplex(weights_)) {
      throw Error(ErrorKind::InvalidWeights,
                  "weights must be nonnegative and sum to 1");
    }
  }

  static PortfolioWeights uniform(Eigen::Index n) {
    return PortfolioWeights(Vector::Constant(n, 1.0 / static_cast<double>(n)));
  }

  static PortfolioWeights vertex(Eigen::Index n, Eigen::Index k) {
    Vector v = Vector::Zero(n);
    v[k] = 1.0;
    return PortfolioWeights(std::move(v));
  }

  const Vector& vector() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }

  operator const Vector&() const noexcept { return weights_; }

 private:
  Vector weights_;
};

struct CriterionValues {
  double neg_expected_return = 0.0;
  double variance = 0.0;
  double neg_sharpe = 0.0;

  double operator[](Criterion c) const noexcept {
    switch (c) {
      case Criterion::NegExpectedReturn: return neg_expected_return;
      case Criterion::Variance: return variance;
      case Criterion::NegSharpe: return neg_sharpe;
    }
    return 0.0;
  }
};

}  // namespace ifport
