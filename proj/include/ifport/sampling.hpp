#pragma once

#include <random>

#include "ifport/types.hpp"

namespace ifport {

/// Engine used everywhere a seed appears; fixed so that a seed means the same
/// stream on every platform built against the same standard library.
using Rng = std::mt19937_64;

/// One draw from the flat Dirichlet(1, ..., 1) distribution, i.e. a uniform
/// point of the unit simplex.
inline Vector sample_dirichlet(Rng& rng, Eigen::Index n) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  Vector x(n);
  double sum = 0.0;
  do {
    sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] = gamma(rng);
      sum += x[i];
    }
  } while (!(sum > 0.0));
  return x / sum;
}

}  // namespace ifport
