// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances are pinned here rather than taken from the library.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <sys/wait.h>

#include "ifport/pipeline.hpp"

using namespace ifport;

namespace {

constexpr double kGradRelTol = 1e-6;
constexpr double kFdStep = 1e-6;
constexpr double kExactTol = 1e-12;
constexpr double kVarianceOracleTol = 1e-5;
constexpr double kSoundTol = 1e-9;
constexpr double kOracleUpper = 1e-3;
constexpr double kOracleLower = 1e-9;
constexpr double kSpreadTol = 1e-6;
constexpr double kParetoTol = 1e-6;
constexpr double kIFTol = 1e-12;
constexpr std::uint64_t kSeed = 20240611;

const std::string kModelPath = IFPORT_DATA_DIR "/paper_instance.model";

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int failures = 0;

void report(int id, const std::string& what, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d  %-44s %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string num(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Vector interior(Rng& rng, Eigen::Index n) {
  return 1e-3 * Vector::Ones(n) + (1.0 - 1e-3 * static_cast<double>(n)) * sample_dirichlet(rng, n);
}

RunConfig cell(ProblemKind p, Mode m) {
  RunConfig cfg;
  cfg.model_path = kModelPath;
  cfg.problem = p;
  cfg.mode = m;
  return cfg;
}

}  // namespace

int main() {
  const auto model = load_model(kModelPath);
  const Eigen::Index n = model.size();

  {  // 1
    Timer t;
    Rng rng(kSeed);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector x = interior(rng, n);
      for (Criterion c : kAllCriteria) {
        const Vector g = grad(model, x, c);
        Vector fd(n);
        for (Eigen::Index k = 0; k < n; ++k) {
          Vector xp = x, xm = x;
          xp[k] += kFdStep;
          xm[k] -= kFdStep;
          fd[k] = (eval(model, xp, c) - eval(model, xm, c)) / (2 * kFdStep);
        }
        worst = std::max(worst, (g - fd).norm() / fd.norm());
      }
    }
    const double s = t.seconds();
    report(1, "analytic gradients vs central differences", worst <= kGradRelTol && s < 1.0,
           "max rel err " + num(worst) + ", " + num(s, "%.3f") + " s");
  }

  const auto bounds = compute_bounds(model);
  {  // 2
    Timer t;
    const auto& be = bounds[Criterion::NegExpectedReturn];
    const auto& bv = bounds[Criterion::Variance];
    auto var = [&](const Vector& x) { return eval(model, x, Criterion::Variance); };
    const double grid = oracle_min(var, sample(SampleScheme::grid(12), n)).value;
    const double dir = oracle_min(var, sample(SampleScheme::dirichlet(1'000'000, kSeed), n)).value;
    const double oracle = std::min(grid, dir);
    const double s = t.seconds();
    const bool exact = std::abs(be.y1 - -0.0462) <= kExactTol && std::abs(be.y0 - -0.0097) <= kExactTol &&
                       std::abs(bv.y0 - 0.0157) <= kExactTol;
    const bool close = std::abs(bv.y1 - oracle) <= kVarianceOracleTol;
    report(2, "aspiration bounds exact / variance vs oracle", exact && close && s < 30.0,
           "E* [" + num(be.y1) + ", " + num(be.y0) + "], V y0 " + num(bv.y0) + ", V y1 " + num(bv.y1, "%.8g") +
               " vs oracle " + num(oracle, "%.8g") + ", " + num(s, "%.1f") + " s");
  }

  {  // 3
    Rng rng(kSeed + 3);
    long outside = 0;
    for (int i = 0; i < 100'000; ++i) {
      const Vector x = sample_dirichlet(rng, n);
      for (Criterion c : kAllCriteria) {
        const double v = eval(model, x, c);
        if (v < bounds[c].y1 - kSoundTol || v > bounds[c].y0 + kSoundTol) ++outside;
      }
    }
    report(3, "criterion values inside [y1, y0]", outside == 0, std::to_string(outside) + " of 300000 outside");
  }

  const auto fuzzy_mvs = run_solve(model, cell(ProblemKind::MVS, Mode::Fuzzy));
  {  // 4
    const double E = fuzzy_mvs.expected_return, V = fuzzy_mvs.variance, Sr = *fuzzy_mvs.sharpe;
    const bool ok = std::abs(E - 0.0302) <= 0.10 * 0.0302 && std::abs(Sr - 0.3938) <= 0.05 * 0.3938 &&
                    std::abs(V - 0.0041) <= 0.25 * 0.0041;
    report(4, "fuzzy MVS E/Sr/V within published bands", ok,
           "E " + num(E, "%.5f") + " [0.02718,0.03322], Sr " + num(Sr, "%.5f") + " [0.37411,0.41349], V " +
               num(V, "%.5f") + " [0.003075,0.005125]");
  }

  Timer cloud_timer;
  const auto cloud = sample(SampleScheme::dirichlet(1'000'000, kSeed), n);
  {  // 5
    Timer t;
    const auto& p = fuzzy_mvs.problem;
    const auto o = oracle_min([&](const Vector& x) { return eval_phi(p, x).value; }, cloud);
    const double s = cloud_timer.seconds();
    const double phi = fuzzy_mvs.solve.objective;
    const bool ok = o.value <= phi + kOracleUpper && o.value >= phi - kOracleLower && s < 60.0;
    report(5, "solver Phi vs Dirichlet oracle", ok,
           "solver " + num(phi, "%.8f") + ", oracle " + num(o.value, "%.8f") + ", gap " +
               num(o.value - phi, "%.2e") + ", " + num(s, "%.1f") + " s");
  }

  {  // 6
    SolverConfig cfg;
    cfg.n_starts = 16;
    double worst = 0.0;
    bool all_converged = true;
    std::string detail;
    for (Criterion c : {Criterion::Variance, Criterion::NegSharpe}) {
      const auto r = minimize(CriterionObjective(model, c), cfg);
      double lo = r.starts.front().final_value, hi = lo;
      for (const auto& s : r.starts) {
        lo = std::min(lo, s.final_value);
        hi = std::max(hi, s.final_value);
        all_converged = all_converged && s.converged();
      }
      worst = std::max(worst, hi - lo);
      detail += std::string(to_string(c)) + " spread " + num(hi - lo, "%.2e") + "  ";
    }
    report(6, "16 starts agree for V and Sr*", worst <= kSpreadTol && all_converged, detail);
  }

  {  // 7
    Rng rng(kSeed + 7);
    long bad = 0;
    for (Criterion c : kAllCriteria) {
      for (int i = 0; i < 10'000; ++i) {
        const Vector x1 = sample_dirichlet(rng, n);
        const Vector x2 = sample_dirichlet(rng, n);
        if (!pseudoconvexity_witness(model, c, x1, x2)) ++bad;
      }
    }
    report(7, "pseudoconvexity implication on random pairs", bad == 0, std::to_string(bad) + " counterexamples");
  }

  {  // 8
    const bool ok = check_weak_pareto(model, fuzzy_mvs.solve.x_star.vector(), cloud, kParetoTol);
    report(8, "fuzzy MVS solution weakly Pareto", ok, "1e6 samples, eps 1e-6");
  }

  {  // 9
    const auto crisp = run_solve(model, cell(ProblemKind::MVS, Mode::Crisp));
    const double at_fuzzy = eval_phi(fuzzy_mvs.problem, fuzzy_mvs.solve.x_star.vector()).value;
    const double at_crisp = eval_phi(fuzzy_mvs.problem, crisp.solve.x_star.vector()).value;
    report(9, "Phi(fuzzy) <= Phi(crisp)", at_fuzzy <= at_crisp + kAttainmentTol,
           num(at_fuzzy, "%.10f") + " vs " + num(at_crisp, "%.10f"));
  }

  {  // 10
    double worst_excess = 0.0, worst_sum = 0.0;
    for (ProblemKind pk : {ProblemKind::MV, ProblemKind::MVS}) {
      const auto b = compute_bounds(model, criteria_of(pk));
      for (const auto& g : build_goals(cell(pk, Mode::Fuzzy), b)) {
        worst_excess = std::max(worst_excess, g.worst_violation().second);
        for (int i = 0; i < kIFGridPoints; ++i) {
          const double t = g.y1() + (g.y0() - g.y1()) * i / (kIFGridPoints - 1);
          const double mu = g.mu(t), nu = g.nu(t);
          if (mu < 0 || nu < 0 || mu + nu > 1.0 + kIFTol) worst_excess = std::max(worst_excess, mu + nu - 1.0);
          worst_sum = std::max(worst_sum, std::abs(mu + nu - 1.0));
        }
      }
    }
    report(10, "0 <= mu + nu <= 1, linear pairs sum to 1", worst_excess <= kIFTol && worst_sum <= kIFTol,
           "max excess " + num(worst_excess, "%.2e") + ", max |mu+nu-1| " + num(worst_sum, "%.2e"));
  }

  {  // 11
    Timer t;
    const std::string cmd = std::string(IFPORT_CLI) + " reproduce-paper --model " + kModelPath + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    const double s = t.seconds();
    report(11, "reproduce-paper under 2 min, exit 0", code == 0 && s < 120.0,
           "exit " + std::to_string(code) + ", " + num(s, "%.1f") + " s");
  }

  std::printf("\n%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
