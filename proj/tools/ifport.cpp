// Command-line front end: bounds, solve, oracle and reproduce-paper.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ifport/ifport.hpp"
#include "ifport/pipeline.hpp"

#ifndef IFPORT_DATA_DIR
#define IFPORT_DATA_DIR "data"
#endif

namespace {

using namespace ifport;

Criterion parse_criterion(const std::string& name) {
  for (Criterion c : kAllCriteria) {
    if (name == to_string(c)) return c;
  }
  if (name == "return" || name == "E") return Criterion::NegExpectedReturn;
  if (name == "V") return Criterion::Variance;
  if (name == "sharpe" || name == "Sr") return Criterion::NegSharpe;
  throw Error(ErrorKind::ConfigError, "unknown criterion '" + name + "'");
}

/// Each entry is either `<shape>` (all criteria) or `<criterion>=<shape>`.
std::map<Criterion, std::string> shape_map(const std::vector<std::string>& entries) {
  std::map<Criterion, std::string> out;
  for (const auto& e : entries) {
    const auto eq = e.find('=');
    if (eq == std::string::npos) {
      for (Criterion c : kAllCriteria) out[c] = e;
    } else {
      out[parse_criterion(e.substr(0, eq))] = e.substr(eq + 1);
    }
  }
  return out;
}

void write_json(const Json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void warn_repaired(const MarketModel& model) {
  if (model.repaired()) {
    std::cerr << "warning: covariance was not positive semidefinite and has been repaired by "
                 "eigenvalue clipping\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio selection with intuitionistic fuzzy goals"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value file with the same keys as the flags");

  RunConfig cfg;
  std::string problem = "mvs", mode = "fuzzy", objective = "phi";
  std::vector<std::string> mu, nu;
  double rf = 0.0;
  std::int64_t seed = static_cast<std::int64_t>(cfg.solver.seed);

  app.add_option("--model", cfg.model_path, "model file");
  app.add_option("--returns", cfg.returns_path, "returns CSV (header = asset labels)");
  auto* rf_opt = app.add_option("--rf", rf, "risk-free rate for --returns");
  app.add_option("--problem", problem, "mv | mvs")->check(CLI::IsMember({"mv", "mvs"}));
  app.add_option("--mode", mode, "crisp | fuzzy")->check(CLI::IsMember({"crisp", "fuzzy"}));
  app.add_option("--mu", mu, "membership shape: linear | exp:<k> | table:<s:v,...>, "
                             "optionally prefixed by <criterion>=");
  app.add_option("--nu", nu, "non-membership shape, same syntax as --mu");
  app.add_option("--seed", seed, "seed for solver starts and the oracle");
  app.add_option("--starts", cfg.solver.n_starts, "number of solver starts");
  app.add_option("--max-iters", cfg.solver.max_iters, "iteration budget per start");
  app.add_option("--out", cfg.out_path, "JSON output path");
  app.add_flag("--oracle-check", cfg.oracle_check, "cross-check the solution against the oracle");
  app.add_option("--grid", cfg.grid, "oracle grid resolution m (0 = use Dirichlet samples)");
  app.add_option("--samples", cfg.samples, "oracle Dirichlet sample count");
  app.add_option("--objective", objective, "oracle objective: phi | neg_return | variance | neg_sharpe")
      ->check(CLI::IsMember({"phi", "neg_return", "variance", "neg_sharpe"}));

  auto* bounds_cmd = app.add_subcommand("bounds", "aspiration bounds per criterion");
  auto* solve_cmd = app.add_subcommand("solve", "solve the crisp or fuzzy problem");
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force sampling baseline");
  auto* repro_cmd = app.add_subcommand("reproduce-paper", "rerun the seven-stock reference experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    cfg.problem = problem == "mv" ? ProblemKind::MV : ProblemKind::MVS;
    cfg.mode = mode == "crisp" ? Mode::Crisp : Mode::Fuzzy;
    cfg.mu_spec = shape_map(mu);
    cfg.nu_spec = shape_map(nu);
    if (*rf_opt) cfg.risk_free_rate = rf;
    cfg.solver.seed = static_cast<std::uint64_t>(seed);
    cfg.oracle_seed = static_cast<std::uint64_t>(seed);
    cfg.solver.validate();

    if (repro_cmd->parsed()) {
      if (cfg.model_path.empty() && cfg.returns_path.empty()) {
        cfg.model_path = std::string(IFPORT_DATA_DIR) + "/paper_instance.model";
      }
      const auto model = load_run_model(cfg);
      warn_repaired(model);
      const auto result = reproduce_reference(model, cfg, cfg.samples);
      std::cout << format_reproduction(result);
      if (!cfg.out_path.empty()) write_json(reproduction_json(result), cfg.out_path);
      return result.all_passed() ? kExitOk : kExitFailure;
    }

    const auto model = load_run_model(cfg);
    warn_repaired(model);

    if (bounds_cmd->parsed()) {
      const auto bounds = compute_bounds(model, criteria_of(cfg.problem), cfg.solver);
      std::cout << format_bounds(bounds, model);
      if (!cfg.out_path.empty()) {
        Json j;
        j["bounds"] = bounds_json(bounds, model);
        write_json(j, cfg.out_path);
      }
      return kExitOk;
    }

    if (solve_cmd->parsed()) {
      const auto report = run_solve(model, cfg);
      std::cout << format_run(report);
      if (!cfg.out_path.empty()) write_json(run_report_json(report), cfg.out_path);
      if (!report.solve.converged) {
        std::cerr << "solver did not converge within the iteration budget\n";
        return kExitSolver;
      }
      return kExitOk;
    }

    if (oracle_cmd->parsed()) {
      const auto scheme = cfg.grid > 0 ? SampleScheme::grid(cfg.grid)
                                       : SampleScheme::dirichlet(cfg.samples, cfg.oracle_seed);
      const auto cloud = sample(scheme, model.size());
      OracleResult result;
      if (objective == "phi") {
        const auto bounds = compute_bounds(model, criteria_of(cfg.problem), cfg.solver);
        const auto p = build_problem(model, cfg, bounds);
        result = oracle_min([&](const Vector& x) { return eval_phi(p, x).value; }, cloud);
      } else {
        Criterion c = Criterion::NegExpectedReturn;
        for (Criterion k : kAllCriteria) {
          if (objective == to_string(k)) c = k;
        }
        result = oracle_min([&](const Vector& x) { return eval(model, x, c); }, cloud);
      }
      write_json(oracle_fixture_json(scheme, objective, result), cfg.out_path);
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  }
  return kExitConfig;
}
