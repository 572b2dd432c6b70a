#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ifport/bounds.hpp"
#include "ifport/error.hpp"
#include "ifport/market_model.hpp"
#include "ifport/objectives.hpp"
#include "ifport/types.hpp"

namespace ifport {

enum class ShapeRole { Membership, Nonmembership };

/// Interior profile of a membership (decreasing, 1 -> 0) or non-membership
/// (increasing, 0 -> 1) mapping. Profiles are expressed in the normalized
/// position s = (t - y1) / (y0 - y1) in [0, 1], so a shape is independent of
/// the scale of the criterion it is attached to.
class MembershipShape {
 public:
  enum class Kind { Linear, Exponential, Table };
  using Knot = std::pair<double, double>;  // (s, value)

  static MembershipShape linear(ShapeRole role) { return MembershipShape(Kind::Linear, role, 0.0, {}); }

  /// Membership: (e^{-ks} - e^{-k}) / (1 - e^{-k}); non-membership:
  /// (1 - e^{-ks}) / (1 - e^{-k}). The two sum to one for equal k.
  static MembershipShape exponential(ShapeRole role, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw Error(ErrorKind::BadShape, "exponential scale must be positive, got " + std::to_string(k));
    }
    return MembershipShape(Kind::Exponential, role, k, {});
  }

  /// Piecewise-linear profile through the given interior knots; the endpoint
  /// knots at s = 0 and s = 1 are implied by the role.
  static MembershipShape table(ShapeRole role, std::vector<Knot> interior) {
    const bool decreasing = role == ShapeRole::Membership;
    std::vector<Knot> knots;
    knots.emplace_back(0.0, decreasing ? 1.0 : 0.0);
    for (const auto& k : interior) knots.push_back(k);
    knots.emplace_back(1.0, decreasing ? 0.0 : 1.0);
    for (size_t i = 1; i < knots.size(); ++i) {
      const auto [s0, v0] = knots[i - 1];
      const auto [s1, v1] = knots[i];
      if (!(s1 > s0)) throw Error(ErrorKind::BadShape, "table knots must be strictly increasing in s within (0,1)");
      if (!(v1 >= 0.0 && v1 <= 1.0)) throw Error(ErrorKind::BadShape, "table values must lie in [0,1]");
      if (decreasing ? v1 > v0 : v1 < v0) {
        throw Error(ErrorKind::BadShape, decreasing ? "membership table must be non-increasing"
                                                    : "non-membership table must be non-decreasing");
      }
    }
    return MembershipShape(Kind::Table, role, 0.0, std::move(knots));
  }

  Kind kind() const noexcept { return kind_; }
  ShapeRole role() const noexcept { return role_; }
  double scale() const noexcept { return k_; }
  const std::vector<Knot>& knots() const noexcept { return knots_; }

  /// Profile value at s in [0,1].
  double at(double s) const {
    const bool mu = role_ == ShapeRole::Membership;
    switch (kind_) {
      case Kind::Linear: return mu ? 1.0 - s : s;
      case Kind::Exponential: {
        const double denom = -std::expm1(-k_);
        return mu ? (std::exp(-k_ * s) - std::exp(-k_)) / denom : -std::expm1(-k_ * s) / denom;
      }
      case Kind::Table: {
        const auto i = segment(s);
        const auto [s0, v0] = knots_[i];
        const auto [s1, v1] = knots_[i + 1];
        return v0 + (v1 - v0) * (s - s0) / (s1 - s0);
      }
    }
    return 0.0;
  }

  /// d(profile)/ds at s in [0,1].
  double slope(double s) const {
    const bool mu = role_ == ShapeRole::Membership;
    switch (kind_) {
      case Kind::Linear: return mu ? -1.0 : 1.0;
      case Kind::Exponential: {
        const double denom = -std::expm1(-k_);
        const double d = k_ * std::exp(-k_ * s) / denom;
        return mu ? -d : d;
      }
      case Kind::Table: {
        const auto i = segment(s);
        const auto [s0, v0] = knots_[i];
        const auto [s1, v1] = knots_[i + 1];
        return (v1 - v0) / (s1 - s0);
      }
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Linear: return "linear";
      case Kind::Exponential: return "exp:" + detail::format_exact(k_);
      case Kind::Table: {
        std::string out = "table:";
        for (size_t i = 1; i + 1 < knots_.size(); ++i) {
          if (i > 1) out += ",";
          out += detail::format_exact(knots_[i].first) + ":" + detail::format_exact(knots_[i].second);
        }
        return out;
      }
    }
    return "?";
  }

 private:
  MembershipShape(Kind kind, ShapeRole role, double k, std::vector<Knot> knots)
      : kind_(kind), role_(role), k_(k), knots_(std::move(knots)) {}

  size_t segment(double s) const {
    size_t i = 0;
    while (i + 2 < knots_.size() && s >= knots_[i + 1].first) ++i;
    return i;
  }

  Kind kind_;
  ShapeRole role_;
  double k_;
  std::vector<Knot> knots_;
};

/// Parses `linear`, `exp:<k>` or `table:<s:v,s:v,...>`.
inline MembershipShape parse_shape(std::string_view spec, ShapeRole role) {
  spec = detail::trim(spec);
  if (spec == "linear") return MembershipShape::linear(role);
  auto number = [&](std::string_view tok) {
    try {
      return detail::parse_double(tok, "shape");
    } catch (const Error&) {
      throw Error(ErrorKind::BadShape, "bad number in shape '" + std::string(spec) + "'");
    }
  };
  if (spec.starts_with("exp:")) return MembershipShape::exponential(role, number(spec.substr(4)));
  if (spec.starts_with("table:")) {
    std::vector<MembershipShape::Knot> knots;
    const auto body = spec.substr(6);
    if (!detail::trim(body).empty()) {
      for (auto item : detail::split(body, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
          throw Error(ErrorKind::BadShape, "table knot '" + std::string(item) + "' needs s:v");
        }
        knots.emplace_back(number(item.substr(0, colon)), number(item.substr(colon + 1)));
      }
    }
    return MembershipShape::table(role, std::move(knots));
  }
  throw Error(ErrorKind::BadShape, "unknown shape '" + std::string(spec) + "'");
}

inline constexpr int kIFGridPoints = 1000;

class IFGoal;
inline IFGoal make_goal(Criterion c, const AspirationBounds& bounds, MembershipShape mu,
                        MembershipShape nu);

/// Intuitionistic fuzzy goal for one criterion: membership mu and
/// non-membership nu over [y1, y0], clamped outside the interval.
class IFGoal {
 public:
  Criterion criterion() const noexcept { return criterion_; }
  double y1() const noexcept { return y1_; }
  double y0() const noexcept { return y0_; }
  const MembershipShape& mu_shape() const noexcept { return mu_; }
  const MembershipShape& nu_shape() const noexcept { return nu_; }

  double position(double t) const { return (t - y1_) / (y0_ - y1_); }

  double mu(double t) const {
    if (t <= y1_) return 1.0;
    if (t >= y0_) return 0.0;
    return mu_.at(position(t));
  }
  double nu(double t) const {
    if (t <= y1_) return 0.0;
    if (t >= y0_) return 1.0;
    return nu_.at(position(t));
  }
  double eta(double t) const { return 1.0 - mu(t); }

  /// Derivatives in t; zero on the clamped plateaus, interior slope at the
  /// interval endpoints themselves.
  double d_eta(double t) const {
    if (t < y1_ || t > y0_) return 0.0;
    return -mu_.slope(std::clamp(position(t), 0.0, 1.0)) / (y0_ - y1_);
  }
  double d_nu(double t) const {
    if (t < y1_ || t > y0_) return 0.0;
    return nu_.slope(std::clamp(position(t), 0.0, 1.0)) / (y0_ - y1_);
  }

  /// Grid point of [y1, y0] where mu + nu leaves [0, 1] the most, with the excess.
  std::pair<double, double> worst_violation() const {
    double worst_t = y1_, worst = 0.0;
    for (int i = 0; i < kIFGridPoints; ++i) {
      const double t = y1_ + (y0_ - y1_) * i / (kIFGridPoints - 1);
      const double sum = mu(t) + nu(t);
      const double excess = std::max(sum - 1.0, -sum);
      if (excess > worst) {
        worst = excess;
        worst_t = t;
      }
    }
    return {worst_t, worst};
  }

 private:
  friend IFGoal make_goal(Criterion, const AspirationBounds&, MembershipShape, MembershipShape);
  IFGoal(Criterion c, double y1, double y0, MembershipShape mu, MembershipShape nu)
      : criterion_(c), y1_(y1), y0_(y0), mu_(std::move(mu)), nu_(std::move(nu)) {}

  Criterion criterion_;
  double y1_, y0_;
  MembershipShape mu_, nu_;
};

inline constexpr double kIFConditionTol = 1e-12;

inline IFGoal make_goal(Criterion c, const AspirationBounds& bounds, MembershipShape mu,
                        MembershipShape nu) {
  if (mu.role() != ShapeRole::Membership || nu.role() != ShapeRole::Nonmembership) {
    throw Error(ErrorKind::BadShape, "mu needs a membership shape and nu a non-membership shape");
  }
  const auto& b = bounds[c];
  if (!(b.y1 < b.y0)) throw Error(ErrorKind::DegenerateCriterion, "need y1 < y0");
  IFGoal goal(c, b.y1, b.y0, std::move(mu), std::move(nu));
  const auto [t, excess] = goal.worst_violation();
  if (excess > kIFConditionTol) {
    throw Error(ErrorKind::IFConditionViolated,
                std::string(to_string(c)) + ": mu + nu outside [0,1] by " + std::to_string(excess) +
                    " at t = " + std::to_string(t));
  }
  return goal;
}

/// Min-max program over the simplex: Phi(x) is the largest of the components
/// eta_i(F_i(x)) followed by nu_i(F_i(x)), one pair per goal.
class ScalarizedProblem {
 public:
  enum class Part { Eta, Nu };
  struct Component {
    size_t goal;
    Part part;
  };

  /// `with_nu = false` keeps only the eta components (the crisp Chebyshev form).
  ScalarizedProblem(MarketModel model, std::vector<IFGoal> goals, bool with_nu = true)
      : model_(std::move(model)), goals_(std::move(goals)) {
    if (goals_.empty()) throw Error(ErrorKind::ConfigError, "scalarized problem needs goals");
    for (size_t g = 0; g < goals_.size(); ++g) components_.push_back({g, Part::Eta});
    if (with_nu) {
      for (size_t g = 0; g < goals_.size(); ++g) components_.push_back({g, Part::Nu});
    }
  }

  const MarketModel& model() const noexcept { return model_; }
  const std::vector<IFGoal>& goals() const noexcept { return goals_; }
  const std::vector<Component>& components() const noexcept { return components_; }
  size_t size() const noexcept { return components_.size(); }

  std::string component_name(size_t j) const {
    const auto& c = components_.at(j);
    return std::string(c.part == Part::Eta ? "eta_" : "nu_") +
           std::string(to_string(goals_[c.goal].criterion()));
  }

  /// Criterion value for every goal at x (in goal order).
  std::vector<double> criterion_values(const Vector& x) const {
    std::vector<double> out;
    out.reserve(goals_.size());
    for (const auto& g : goals_) out.push_back(eval(model_, x, g.criterion()));
    return out;
  }

  std::vector<double> component_values(const Vector& x) const {
    const auto f = criterion_values(x);
    std::vector<double> out;
    out.reserve(components_.size());
    for (const auto& c : components_) {
      const auto& g = goals_[c.goal];
      out.push_back(c.part == Part::Eta ? g.eta(f[c.goal]) : g.nu(f[c.goal]));
    }
    return out;
  }

  /// d(component)/dt at the given criterion value.
  double component_slope(size_t j, double t) const {
    const auto& c = components_[j];
    const auto& g = goals_[c.goal];
    return c.part == Part::Eta ? g.d_eta(t) : g.d_nu(t);
  }

 private:
  MarketModel model_;
  std::vector<IFGoal> goals_;
  std::vector<Component> components_;
};

inline double eval_component(const ScalarizedProblem& p, size_t j, const Vector& x) {
  if (j >= p.size()) throw Error(ErrorKind::ConfigError, "component index out of range");
  const auto& c = p.components()[j];
  const auto& g = p.goals()[c.goal];
  const double t = eval(p.model(), x, g.criterion());
  return c.part == ScalarizedProblem::Part::Eta ? g.eta(t) : g.nu(t);
}

inline constexpr double kActiveTol = 1e-12;

struct PhiValue {
  double value = 0.0;
  std::vector<size_t> active_set;  // ascending component indices
};

inline PhiValue eval_phi(const ScalarizedProblem& p, const Vector& x) {
  const auto comps = p.component_values(x);
  PhiValue out;
  out.value = *std::max_element(comps.begin(), comps.end());
  for (size_t j = 0; j < comps.size(); ++j) {
    if (comps[j] >= out.value - kActiveTol) out.active_set.push_back(j);
  }
  return out;
}

/// Gradient of the lowest-index active component (chain rule through the
/// membership slope and the criterion gradient).
inline Vector subgrad_phi(const ScalarizedProblem& p, const Vector& x) {
  const auto phi = eval_phi(p, x);
  const size_t j = phi.active_set.front();
  const auto& g = p.goals()[p.components()[j].goal];
  const double t = eval(p.model(), x, g.criterion());
  const double slope = p.component_slope(j, t);
  if (slope == 0.0) return Vector::Zero(x.size());
  return slope * grad(p.model(), x, g.criterion());
}

struct SmoothPhi {
  double value = 0.0;
  Vector gradient;
};

/// Log-sum-exp surrogate tau * log(sum_j exp(c_j / tau)); lies within
/// [Phi, Phi + tau * log(#components)].
inline SmoothPhi smooth_phi(const ScalarizedProblem& p, const Vector& x, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::ConfigError, "smoothing temperature must be positive");
  const auto f = p.criterion_values(x);
  const auto& comps_meta = p.components();
  std::vector<double> comps(comps_meta.size());
  for (size_t j = 0; j < comps.size(); ++j) {
    const auto& g = p.goals()[comps_meta[j].goal];
    const double t = f[comps_meta[j].goal];
    comps[j] = comps_meta[j].part == ScalarizedProblem::Part::Eta ? g.eta(t) : g.nu(t);
  }
  const double m = *std::max_element(comps.begin(), comps.end());
  std::vector<double> w(comps.size());
  double z = 0.0;
  for (size_t j = 0; j < comps.size(); ++j) {
    w[j] = std::exp((comps[j] - m) / tau);
    z += w[j];
  }
  SmoothPhi out;
  out.value = m + tau * std::log(z);

  // Accumulate slope weights per goal so each criterion gradient is formed once.
  std::vector<double> per_goal(p.goals().size(), 0.0);
  for (size_t j = 0; j < comps.size(); ++j) {
    per_goal[comps_meta[j].goal] += (w[j] / z) * p.component_slope(j, f[comps_meta[j].goal]);
  }
  out.gradient = Vector::Zero(x.size());
  for (size_t g = 0; g < per_goal.size(); ++g) {
    if (per_goal[g] != 0.0) out.gradient += per_goal[g] * grad(p.model(), x, p.goals()[g].criterion());
  }
  return out;
}

/// Solver adapter for Phi.
class PhiObjective {
 public:
  explicit PhiObjective(const ScalarizedProblem& p) : p_(&p) {}

  Eigen::Index dimension() const { return p_->model().size(); }
  double value(const Vector& x) const { return eval_phi(*p_, x).value; }
  Vector direction(const Vector& x) const { return subgrad_phi(*p_, x); }
  Vector smoothed_direction(const Vector& x, double tau) const {
    return smooth_phi(*p_, x, tau).gradient;
  }

 private:
  const ScalarizedProblem* p_;
};

}  // namespace ifport
