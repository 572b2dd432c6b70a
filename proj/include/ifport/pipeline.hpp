#pragma once

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ifport/bounds.hpp"
#include "ifport/error.hpp"
#include "ifport/fuzzy.hpp"
#include "ifport/market_model.hpp"
#include "ifport/objectives.hpp"
#include "ifport/oracle.hpp"
#include "ifport/solver.hpp"
#include "ifport/types.hpp"

namespace ifport {

using Json = nlohmann::ordered_json;

enum class ProblemKind { MV, MVS };
enum class Mode { Crisp, Fuzzy };

inline std::span<const Criterion> criteria_of(ProblemKind p) {
  static constexpr std::array<Criterion, 2> mv = {Criterion::NegExpectedReturn, Criterion::Variance};
  if (p == ProblemKind::MV) return mv;
  return kAllCriteria;
}

/// Everything one CLI invocation needs.
struct RunConfig {
  std::string model_path;
  std::string returns_path;
  std::optional<double> risk_free_rate;
  ProblemKind problem = ProblemKind::MVS;
  Mode mode = Mode::Fuzzy;
  // Shape per criterion, as `linear`, `exp:<k>` or `table:<s:v,...>`.
  std::map<Criterion, std::string> mu_spec;
  std::map<Criterion, std::string> nu_spec;
  SolverConfig solver;
  std::string out_path;
  bool oracle_check = false;
  int grid = 0;
  std::int64_t samples = 1'000'000;
  std::uint64_t oracle_seed = kDefaultOracleSeed;

  std::string mu_for(Criterion c) const {
    const auto it = mu_spec.find(c);
    return it == mu_spec.end() ? "linear" : it->second;
  }
  std::string nu_for(Criterion c) const {
    const auto it = nu_spec.find(c);
    return it == nu_spec.end() ? "linear" : it->second;
  }
};

/// CLI exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitModel = 3,
  kExitDegenerate = 4,
  kExitSolver = 5,
  kExitResource = 6,
};

constexpr int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::BadShape:
    case ErrorKind::IFConditionViolated:
      return kExitConfig;
    case ErrorKind::EmptySeries:
    case ErrorKind::NonFiniteInput:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::DegenerateAsset:
    case ErrorKind::ParseError:
    case ErrorKind::InvariantViolation:
    case ErrorKind::InvalidWeights:
    case ErrorKind::ZeroVariance:
      return kExitModel;
    case ErrorKind::DegenerateCriterion: return kExitDegenerate;
    case ErrorKind::SolverFailure: return kExitSolver;
    case ErrorKind::ResourceLimit: return kExitResource;
  }
  return kExitFailure;
}

inline MarketModel load_run_model(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  if (!cfg.model_path.empty()) {
    if (!fs::exists(cfg.model_path)) {
      throw Error(ErrorKind::ConfigError, "model file not found: " + cfg.model_path);
    }
    return load_model(cfg.model_path);
  }
  if (!cfg.returns_path.empty()) {
    if (!fs::exists(cfg.returns_path)) {
      throw Error(ErrorKind::ConfigError, "returns file not found: " + cfg.returns_path);
    }
    if (!cfg.risk_free_rate) throw Error(ErrorKind::ConfigError, "--returns needs --rf");
    return estimate_model(load_returns_csv(cfg.returns_path), *cfg.risk_free_rate);
  }
  throw Error(ErrorKind::ConfigError, "need --model or --returns with --rf");
}

/// Goals for the configured problem. Crisp mode always uses LINEAR shapes.
inline std::vector<IFGoal> build_goals(const RunConfig& cfg, const AspirationBounds& bounds) {
  std::vector<IFGoal> goals;
  for (Criterion c : criteria_of(cfg.problem)) {
    if (cfg.mode == Mode::Crisp) {
      goals.push_back(make_goal(c, bounds, MembershipShape::linear(ShapeRole::Membership),
                                MembershipShape::linear(ShapeRole::Nonmembership)));
    } else {
      goals.push_back(make_goal(c, bounds, parse_shape(cfg.mu_for(c), ShapeRole::Membership),
                                parse_shape(cfg.nu_for(c), ShapeRole::Nonmembership)));
    }
  }
  return goals;
}

inline ScalarizedProblem build_problem(const MarketModel& model, const RunConfig& cfg,
                                       const AspirationBounds& bounds) {
  return ScalarizedProblem(model, build_goals(cfg, bounds), cfg.mode == Mode::Fuzzy);
}

struct OracleSummary {
  SampleScheme scheme;
  OracleResult result;
  bool passed = false;  // solver objective <= oracle minimum + 1e-3
};

struct RunReport {
  RunConfig config;
  AspirationBounds bounds;
  ScalarizedProblem problem;
  SolveReport solve;
  double expected_return = 0.0;
  double variance = 0.0;
  std::optional<double> sharpe;
  std::optional<OracleSummary> oracle;
};

inline constexpr double kOracleSlack = 1e-3;

/// bounds -> goals -> scalarized problem -> multi-start descent.
inline RunReport run_solve(const MarketModel& model, const RunConfig& cfg) {
  auto bounds = compute_bounds(model, criteria_of(cfg.problem), cfg.solver);
  auto problem = build_problem(model, cfg, bounds);
  auto solve = minimize(PhiObjective(problem), cfg.solver);
  const Vector x = solve.x_star.vector();
  solve.criterion_values = evaluate_all(model, x);
  solve.membership_levels = problem.component_values(x);

  RunReport report{cfg, std::move(bounds), std::move(problem), std::move(solve), 0.0, 0.0, std::nullopt, std::nullopt};
  report.expected_return = expected_return(model, x);
  report.variance = variance(model, x);
  if (cfg.problem == ProblemKind::MVS) report.sharpe = sharpe_ratio(model, x);

  if (cfg.oracle_check) {
    OracleSummary summary;
    summary.scheme = cfg.grid > 0 ? SampleScheme::grid(cfg.grid)
                                  : SampleScheme::dirichlet(cfg.samples, cfg.oracle_seed);
    const auto cloud = sample(summary.scheme, model.size());
    const auto& p = report.problem;
    summary.result = oracle_min([&](const Vector& y) { return eval_phi(p, y).value; }, cloud);
    summary.passed = report.solve.objective <= summary.result.value + kOracleSlack;
    report.oracle = std::move(summary);
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

/// Rounds to 12 significant digits so reports diff cleanly.
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(round12(v[i]));
  return arr;
}

inline std::string_view to_string(ProblemKind p) { return p == ProblemKind::MV ? "mv" : "mvs"; }
inline std::string_view to_string(Mode m) { return m == Mode::Crisp ? "crisp" : "fuzzy"; }

inline Json config_json(const RunConfig& cfg, const MarketModel& model) {
  Json j;
  j["model"] = cfg.model_path.empty() ? cfg.returns_path : cfg.model_path;
  j["assets"] = model.labels();
  j["risk_free_rate"] = round12(model.risk_free_rate());
  j["problem"] = to_string(cfg.problem);
  j["mode"] = to_string(cfg.mode);
  Json goals = Json::object();
  for (Criterion c : criteria_of(cfg.problem)) {
    goals[std::string(to_string(c))] = {{"mu", cfg.mode == Mode::Crisp ? "linear" : cfg.mu_for(c)},
                                        {"nu", cfg.mode == Mode::Crisp ? "linear" : cfg.nu_for(c)}};
  }
  j["goals"] = goals;
  j["solver"] = {{"max_iters", cfg.solver.max_iters},
                 {"tol_step", cfg.solver.tol_step},
                 {"tol_obj", cfg.solver.tol_obj},
                 {"initial_step", cfg.solver.initial_step},
                 {"backtrack_factor", cfg.solver.backtrack_factor},
                 {"armijo_c", cfg.solver.armijo_c},
                 {"n_starts", cfg.solver.n_starts},
                 {"tau_start", cfg.solver.tau_start},
                 {"tau_end", cfg.solver.tau_end},
                 {"seed", cfg.solver.seed}};
  return j;
}

inline Json bounds_json(const AspirationBounds& bounds, const MarketModel& model) {
  Json arr = Json::array();
  for (const auto& b : bounds.all()) {
    Json j;
    j["criterion"] = to_string(b.criterion);
    j["y_min"] = round12(b.y_min);
    j["y_max"] = round12(b.y_max);
    j["y1"] = round12(b.y1);
    j["y0"] = round12(b.y0);
    j["y_max_vertex"] = model.labels()[static_cast<size_t>(b.max_vertex)];
    j["minimizer"] = to_json(b.minimizer.vector());
    arr.push_back(j);
  }
  return arr;
}

inline Json solve_json(const SolveReport& s, const ScalarizedProblem& p) {
  Json j;
  j["x_star"] = to_json(s.x_star.vector());
  j["objective"] = round12(s.objective);
  j["converged"] = s.converged;
  j["best_start"] = s.best_start;
  if (s.criterion_values) {
    j["criterion_values"] = {{"neg_return", round12(s.criterion_values->neg_expected_return)},
                             {"variance", round12(s.criterion_values->variance)},
                             {"neg_sharpe", round12(s.criterion_values->neg_sharpe)}};
  }
  Json levels = Json::object();
  for (size_t k = 0; k < s.membership_levels.size(); ++k) {
    levels[p.component_name(k)] = round12(s.membership_levels[k]);
  }
  j["membership_levels"] = levels;
  Json starts = Json::array();
  for (const auto& t : s.starts) {
    Json phases = Json::array();
    for (const auto& ph : t.phases) {
      phases.push_back({{"tau", ph.tau},
                        {"iterations", ph.iterations},
                        {"final_value", round12(ph.final_value)},
                        {"termination", to_string(ph.reason)}});
    }
    starts.push_back({{"start", to_json(t.start)},
                      {"iterations", t.iterations},
                      {"final_value", round12(t.final_value)},
                      {"termination", to_string(t.reason)},
                      {"phases", phases}});
  }
  j["starts"] = starts;
  return j;
}

inline Json scheme_json(const SampleScheme& s) {
  if (s.kind == SampleScheme::Kind::Grid) return {{"kind", "grid"}, {"resolution", s.resolution}};
  return {{"kind", "dirichlet"}, {"count", s.count}, {"seed", s.seed}};
}

/// Oracle fixture: scheme, seed, objective id, best point/value, counts.
inline Json oracle_fixture_json(const SampleScheme& scheme, std::string_view objective,
                                const OracleResult& r) {
  Json j;
  j["scheme"] = scheme_json(scheme);
  j["seed"] = scheme.kind == SampleScheme::Kind::Dirichlet ? Json(scheme.seed) : Json(nullptr);
  j["objective"] = objective;
  j["best_point"] = to_json(r.x_best);
  j["best_value"] = round12(r.value);
  j["evaluated"] = r.evaluated;
  j["skipped"] = r.skipped;
  return j;
}

inline Json run_report_json(const RunReport& r) {
  const auto& model = r.problem.model();
  Json j;
  j["config"] = config_json(r.config, model);
  j["bounds"] = bounds_json(r.bounds, model);
  j["solve"] = solve_json(r.solve, r.problem);
  Json row;
  row["E"] = round12(r.expected_return);
  row["V"] = round12(r.variance);
  if (r.sharpe) row["Sr"] = round12(*r.sharpe);
  j["table_row"] = row;
  if (r.oracle) {
    Json o = oracle_fixture_json(r.oracle->scheme, "phi", r.oracle->result);
    o["solver_objective"] = round12(r.solve.objective);
    o["passed"] = r.oracle->passed;
    j["oracle_check"] = o;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Human-readable output

inline std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

inline std::string format_bounds(const AspirationBounds& bounds, const MarketModel& model) {
  std::ostringstream out;
  out << "criterion     y1 (= y_min)      y0 (= y_max)      y_max at\n";
  for (const auto& b : bounds.all()) {
    char line[160];
    std::snprintf(line, sizeof line, "%-12s  %-16.10g  %-16.10g  %s\n",
                  std::string(to_string(b.criterion)).c_str(), b.y1, b.y0,
                  model.labels()[static_cast<size_t>(b.max_vertex)].c_str());
    out << line;
  }
  return out.str();
}

inline std::string format_weights(const Vector& x, int prec = 4) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + fmt(x[i], prec);
  return s + ")";
}

inline std::string format_run(const RunReport& r) {
  std::ostringstream out;
  const auto& model = r.problem.model();
  out << "problem " << to_string(r.config.problem) << ", mode " << to_string(r.config.mode) << "\n\n";
  out << format_bounds(r.bounds, model) << "\n";
  out << "solution x = " << format_weights(r.solve.x_star.vector()) << "\n";
  out << "objective  = " << fmt(r.solve.objective, 8) << (r.solve.converged ? "" : "  (NOT converged)")
      << "\n";
  out << "levels    :";
  for (size_t k = 0; k < r.solve.membership_levels.size(); ++k) {
    out << " " << r.problem.component_name(k) << "=" << fmt(r.solve.membership_levels[k], 6);
  }
  out << "\n\n      E(x)       V(x)";
  if (r.sharpe) out << "       Sr(x)";
  out << "\n  " << fmt(r.expected_return, 6) << "   " << fmt(r.variance, 6);
  if (r.sharpe) out << "   " << fmt(*r.sharpe, 6);
  out << "\n";
  if (r.oracle) {
    out << "\noracle " << (r.oracle->scheme.kind == SampleScheme::Kind::Grid ? "grid" : "dirichlet")
        << ": min Phi = " << fmt(r.oracle->result.value, 8) << " over " << r.oracle->result.evaluated
        << " points; solver " << (r.oracle->passed ? "PASS" : "FAIL") << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Reproduction of the seven-stock reference experiment

/// Published solution rows of the reference experiment.
struct ReferenceCell {
  ProblemKind problem;
  Mode mode;
  std::array<double, 7> x;
  double E;
  double V;
  std::optional<double> Sr;
};

inline const std::array<ReferenceCell, 4>& reference_cells() {
  static const std::array<ReferenceCell, 4> cells = {{
      {ProblemKind::MV, Mode::Crisp, {0.0287, 0.1150, 0.2274, 0.1857, 0.1111, 0.2653, 0.0668}, 0.02184, 0.0022, std::nullopt},
      {ProblemKind::MV, Mode::Fuzzy, {0.1078, 0.1268, 0.1740, 0.1526, 0.1257, 0.1981, 0.1150}, 0.0230, 0.0024, std::nullopt},
      {ProblemKind::MVS, Mode::Crisp, {0.0289, 0.1147, 0.2274, 0.1857, 0.1111, 0.2654, 0.0668}, 0.02183, 0.0022, 0.3562},
      {ProblemKind::MVS, Mode::Fuzzy, {0.1026, 0.3680, 0.1016, 0.1265, 0.1006, 0.1000, 0.1007}, 0.0302, 0.0041, 0.3938},
  }};
  return cells;
}

struct ReproduceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ReproduceResult {
  std::vector<RunReport> runs;  // same order as reference_cells()
  std::vector<ReproduceCheck> checks;
  std::vector<std::string> notes;  // informational comparisons, not gated

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

inline constexpr double kRfConsistencyTol = 2e-4;
inline constexpr double kBandE = 0.10;
inline constexpr double kBandSr = 0.05;
inline constexpr double kBandV = 0.25;
inline constexpr double kParetoEps = 1e-6;
inline constexpr double kAttainmentTol = 1e-9;

inline bool within_rel(double value, double target, double rel) {
  return std::abs(value - target) <= rel * std::abs(target);
}

/// Runs MV/MVS x crisp/fuzzy on the reference instance and checks the
/// reproduction gates. `samples` sizes the Dirichlet oracle cloud.
inline ReproduceResult reproduce_reference(const MarketModel& model, const RunConfig& base,
                                           std::int64_t samples = 1'000'000) {
  ReproduceResult out;
  auto check = [&](std::string name, bool ok, std::string detail) {
    out.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  // rf must agree with the value implied by each published (E, V, Sr) row.
  {
    bool ok = true;
    std::string detail;
    for (const auto& cell : reference_cells()) {
      if (!cell.Sr) continue;
      const double implied = cell.E - *cell.Sr * std::sqrt(cell.V);
      ok = ok && std::abs(implied - model.risk_free_rate()) <= kRfConsistencyTol;
      detail += "implied " + fmt(implied, 5) + " ";
    }
    check("risk-free rate consistent with published rows", ok,
          detail + "vs model " + fmt(model.risk_free_rate(), 5));
  }

  for (const auto& cell : reference_cells()) {
    RunConfig cfg = base;
    cfg.problem = cell.problem;
    cfg.mode = cell.mode;
    cfg.mu_spec.clear();
    cfg.nu_spec.clear();
    cfg.oracle_check = false;
    out.runs.push_back(run_solve(model, cfg));
  }
  const auto& mvs_crisp = out.runs[2];
  const auto& mvs_fuzzy = out.runs[3];

  for (const auto& goal : mvs_fuzzy.problem.goals()) {
    const auto [t, excess] = goal.worst_violation();
    check("IF condition for " + std::string(to_string(goal.criterion())), excess <= kIFConditionTol,
          "max excess " + std::to_string(excess));
  }

  {
    const double E = mvs_fuzzy.expected_return, V = mvs_fuzzy.variance, Sr = *mvs_fuzzy.sharpe;
    check("fuzzy MVS E within 10% of 0.0302", within_rel(E, 0.0302, kBandE), "E = " + fmt(E, 5));
    check("fuzzy MVS Sr within 5% of 0.3938", within_rel(Sr, 0.3938, kBandSr), "Sr = " + fmt(Sr, 5));
    check("fuzzy MVS V within 25% of 0.0041", within_rel(V, 0.0041, kBandV), "V = " + fmt(V, 5));
  }

  const auto cloud = sample(SampleScheme::dirichlet(samples), model.size());
  {
    const auto& p = mvs_fuzzy.problem;
    const auto r = oracle_min([&](const Vector& y) { return eval_phi(p, y).value; }, cloud);
    check("solver Phi <= oracle Phi_min + 1e-3", mvs_fuzzy.solve.objective <= r.value + kOracleSlack,
          "solver " + fmt(mvs_fuzzy.solve.objective, 6) + ", oracle " + fmt(r.value, 6));
  }
  check("fuzzy MVS solution weakly Pareto vs oracle cloud",
        check_weak_pareto(model, mvs_fuzzy.solve.x_star.vector(), cloud, kParetoEps),
        std::to_string(cloud.size()) + " samples, eps 1e-6");
  for (size_t i : {size_t{0}, size_t{2}}) {
    const auto& crisp = out.runs[i];
    const auto& fuzzy = out.runs[i + 1];
    const double at_fuzzy = eval_phi(fuzzy.problem, fuzzy.solve.x_star.vector()).value;
    const double at_crisp = eval_phi(fuzzy.problem, crisp.solve.x_star.vector()).value;
    check("Phi(fuzzy) <= Phi(crisp) for " + std::string(to_string(crisp.config.problem)),
          at_fuzzy <= at_crisp + kAttainmentTol,
          fmt(at_fuzzy, 10) + " vs " + fmt(at_crisp, 10));
  }

  if (!(mvs_crisp.variance <= 0.0041)) {
    out.notes.push_back("crisp MVS variance " + fmt(mvs_crisp.variance, 5) +
                        " exceeds the fuzzy published 0.0041 (crisp baseline is min-max "
                        "on normalized criteria)");
  }
  return out;
}

inline std::string format_reproduction(const ReproduceResult& r) {
  std::ostringstream out;
  out << "cell        source      E(x)      V(x)      Sr(x)    x\n";
  for (size_t i = 0; i < r.runs.size(); ++i) {
    const auto& ref = reference_cells()[i];
    const auto& run = r.runs[i];
    const std::string cell = std::string(to_string(ref.problem)) + "/" + std::string(to_string(ref.mode));
    char line[256];
    Vector refx = Eigen::Map<const Vector>(ref.x.data(), 7);
    std::snprintf(line, sizeof line, "%-10s  published   %-8.5f  %-8.5f  %-7s  %s\n", cell.c_str(),
                  ref.E, ref.V, ref.Sr ? fmt(*ref.Sr).c_str() : "-", format_weights(refx).c_str());
    out << line;
    std::snprintf(line, sizeof line, "%-10s  computed    %-8.5f  %-8.5f  %-7s  %s\n", "", run.expected_return,
                  run.variance, run.sharpe ? fmt(*run.sharpe).c_str() : "-",
                  format_weights(run.solve.x_star.vector()).c_str());
    out << line;
  }
  out << "\nchecks\n";
  for (const auto& c : r.checks) {
    out << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name << "  (" << c.detail << ")\n";
  }
  for (const auto& n : r.notes) out << "  [note] " << n << "\n";
  out << "\n" << (r.all_passed() ? "all checks passed" : "some checks FAILED") << "\n";
  return out.str();
}

inline Json reproduction_json(const ReproduceResult& r) {
  Json j;
  Json cells = Json::array();
  for (size_t i = 0; i < r.runs.size(); ++i) {
    const auto& ref = reference_cells()[i];
    const auto& run = r.runs[i];
    Json c;
    c["problem"] = to_string(ref.problem);
    c["mode"] = to_string(ref.mode);
    c["published"] = {{"x", ref.x}, {"E", ref.E}, {"V", ref.V}};
    if (ref.Sr) c["published"]["Sr"] = *ref.Sr;
    c["computed"] = {{"x", to_json(run.solve.x_star.vector())},
                     {"E", round12(run.expected_return)},
                     {"V", round12(run.variance)},
                     {"phi", round12(run.solve.objective)}};
    if (run.sharpe) c["computed"]["Sr"] = round12(*run.sharpe);
    cells.push_back(c);
  }
  j["cells"] = cells;
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  j["notes"] = r.notes;
  j["all_passed"] = r.all_passed();
  return j;
}

}  // namespace ifport
