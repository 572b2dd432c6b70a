#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ifport/error.hpp"
#include "ifport/market_model.hpp"
#include "ifport/objectives.hpp"
#include "ifport/sampling.hpp"
#include "ifport/types.hpp"

namespace ifport {

inline constexpr std::uint64_t kDefaultOracleSeed = 20240611;
inline constexpr double kDefaultGridCap = 1e7;

struct SampleScheme {
  enum class Kind { Dirichlet, Grid };
  Kind kind = Kind::Dirichlet;
  std::int64_t count = 1'000'000;  // Dirichlet draws
  int resolution = 12;             // grid: compositions of m into n parts
  std::uint64_t seed = kDefaultOracleSeed;
  double cap = kDefaultGridCap;

  static SampleScheme dirichlet(std::int64_t count, std::uint64_t seed = kDefaultOracleSeed) {
    SampleScheme s;
    s.kind = Kind::Dirichlet;
    s.count = count;
    s.seed = seed;
    return s;
  }
  static SampleScheme grid(int m, double cap = kDefaultGridCap) {
    SampleScheme s;
    s.kind = Kind::Grid;
    s.resolution = m;
    s.cap = cap;
    return s;
  }
};

/// Points of the simplex stored column-wise (n x count).
struct SampleCloud {
  SampleScheme scheme;
  Matrix points;

  Eigen::Index size() const noexcept { return points.cols(); }
  Eigen::Index dimension() const noexcept { return points.rows(); }
  Vector point(Eigen::Index i) const { return points.col(i); }
};

/// C(m + n - 1, n - 1) in floating point (exact for the sizes we accept).
inline double grid_size(Eigen::Index n, int m) {
  double c = 1.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    c = c * static_cast<double>(m + i) / static_cast<double>(i);
  }
  return std::round(c);
}

inline SampleCloud sample(const SampleScheme& scheme, Eigen::Index n) {
  if (n < 2) throw Error(ErrorKind::DimensionMismatch, "need n >= 2");
  SampleCloud cloud{scheme, {}};
  if (scheme.kind == SampleScheme::Kind::Dirichlet) {
    if (scheme.count < 1) throw Error(ErrorKind::ConfigError, "sample count must be >= 1");
    if (static_cast<double>(scheme.count) > scheme.cap) {
      throw Error(ErrorKind::ResourceLimit, "sample count exceeds cap");
    }
    cloud.points.resize(n, scheme.count);
    Rng rng(scheme.seed);
    for (std::int64_t i = 0; i < scheme.count; ++i) cloud.points.col(i) = sample_dirichlet(rng, n);
    return cloud;
  }

  const int m = scheme.resolution;
  if (m < 1) throw Error(ErrorKind::ConfigError, "grid resolution must be >= 1");
  const double total = grid_size(n, m);
  if (total > scheme.cap) {
    throw Error(ErrorKind::ResourceLimit, "grid of " + std::to_string(total) +
                                              " points exceeds cap " + std::to_string(scheme.cap));
  }
  cloud.points.resize(n, static_cast<Eigen::Index>(total));
  // Enumerate compositions with the first coordinate descending from m.
  std::vector<int> parts(static_cast<size_t>(n), 0);
  Eigen::Index col = 0;
  auto emit = [&] {
    for (Eigen::Index k = 0; k < n; ++k) {
      cloud.points(k, col) = static_cast<double>(parts[static_cast<size_t>(k)]) / m;
    }
    ++col;
  };
  auto rec = [&](auto&& self, size_t pos, int remaining) -> void {
    if (pos + 1 == parts.size()) {
      parts[pos] = remaining;
      emit();
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      parts[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, m);
  return cloud;
}

struct OracleResult {
  Vector x_best;
  double value = std::numeric_limits<double>::infinity();
  Eigen::Index best_index = -1;
  std::int64_t evaluated = 0;
  std::int64_t skipped = 0;  // points where the objective was undefined
};

/// Exhaustive minimum of `obj` over the cloud; ties keep the first point.
template <class F>
OracleResult oracle_min(const F& obj, const SampleCloud& cloud) {
  OracleResult out;
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Vector x = cloud.points.col(i);
    double v = 0.0;
    try {
      v = obj(x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroVariance) throw;
      ++out.skipped;
      continue;
    }
    ++out.evaluated;
    if (v < out.value) {
      out.value = v;
      out.best_index = i;
    }
  }
  if (out.best_index >= 0) out.x_best = cloud.points.col(out.best_index);
  return out;
}

/// True iff no cloud point beats `x` on every listed criterion by more than eps.
inline bool check_weak_pareto(const MarketModel& model, const Vector& x, const SampleCloud& cloud,
                              double eps, std::span<const Criterion> criteria = kAllCriteria) {
  std::vector<double> fx;
  for (Criterion c : criteria) fx.push_back(eval(model, x, c));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Vector y = cloud.points.col(i);
    bool dominates = true;
    try {
      for (size_t k = 0; k < criteria.size() && dominates; ++k) {
        dominates = eval(model, y, criteria[k]) < fx[k] - eps;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroVariance) throw;
      dominates = false;
    }
    if (dominates) return false;
  }
  return true;
}

}  // namespace ifport
