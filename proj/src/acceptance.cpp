#include "virecon/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "virecon/benchmarks.hpp"
#include "virecon/experiment.hpp"
#include "virecon/output.hpp"
#include "virecon/trajectory_estimator.hpp"

namespace virecon {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

ExperimentConfig base_config(const std::string& problem) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  return cfg;
}

double energy_norm(const SpaceOperators& ops, const FeFunction& w) {
  const auto kw = ops.stiffness * w.coefficients();
  return std::sqrt(std::max(0.0, dot(w.coefficients(), kw)));
}

/// Runs and keeps every report so KKT and sign checks can sweep all of them.
struct Suite {
  std::ostream* log = nullptr;
  std::deque<std::pair<std::string, ConvergenceReport>> runs;
  std::vector<std::string> kkt_failures;  // trajectories stepped outside run_experiment

  const ConvergenceReport& run(const std::string& label, const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    runs.emplace_back(label, run_experiment(cfg, false));
    if (log) {
      *log << "[" << label << "] " << fmt(seconds_since(start)) << " s\n";
      print_report(*log, runs.back().second);
    }
    return runs.back().second;
  }
};

CriterionResult orthogonality(Suite& suite) {
  CriterionResult r{1, "orthogonality of the elliptic reconstruction", false, ""};
  const auto start = Clock::now();
  const ProblemSpec problem = benchmark("manufactured_obstacle");
  const auto space = build_space(
      std::make_shared<const Mesh>(build_structured_mesh(8, problem.domain)), 1);
  const auto ops = SpaceOperators::build(space);
  ExperimentConfig cfg = base_config(problem.name);
  const double tau = choose_tau(cfg, mesh_metrics(space->mesh()).max_h);
  const int steps = step_count(tau, cfg.final_time);
  TimeStepper stepper(problem, ops, tau);
  EstimatorOptions opts;
  opts.mode = SigmaMode::Consistent;
  opts.verification = true;
  opts.fine_depth = 2;
  TrajectoryEstimator estimator(problem, ops, tau, opts);
  StepState state = stepper.initial_state();
  estimator.start(state);
  double worst_ratio = 0.0;
  bool kkt = true;
  for (int n = 1; n <= steps; ++n) {
    state = stepper.step(state);
    kkt = kkt && check_kkt(state).ok();
    const auto& est = estimator.push(state);
    const double allowed = 1e-9 * (1.0 + energy_norm(ops, state.w));
    worst_ratio = std::max(worst_ratio, est.orthogonality / allowed);
  }
  const double secs = seconds_since(start);
  r.passed = worst_ratio <= 1.0 && secs <= 120.0;
  r.detail = std::to_string(steps) + " steps, max residual/tolerance = " + fmt(worst_ratio) +
             ", runtime " + fmt(secs) + " s";
  if (!kkt) suite.kkt_failures.push_back("orthogonality run");
  return r;
}

CriterionResult heat_reduction(Suite& suite, std::vector<double>& eta0_T, std::vector<double>& h) {
  CriterionResult r{3, "heat reduction with an inactive obstacle", false, ""};
  const auto start = Clock::now();
  const ProblemSpec problem = benchmark("heat_smooth");
  ExperimentConfig cfg = base_config(problem.name);
  cfg.levels = 3;
  double max_diff = 0.0;
  std::vector<double> final_err;
  MeshPtr mesh = std::make_shared<const Mesh>(build_structured_mesh(cfg.n, problem.domain));
  for (int l = 0; l < cfg.levels; ++l) {
    const auto space = build_space(mesh, cfg.degree);
    const auto ops = SpaceOperators::build(space);
    const double tau = choose_tau(cfg, mesh_metrics(*mesh).max_h);
    const int steps = step_count(tau, cfg.final_time);
    TimeStepper stepper(problem, ops, tau);
    StepState state = stepper.initial_state();
    bool kkt = true;
    FeFunction free_w = state.w;
    for (int n = 1; n <= steps; ++n) {
      free_w = stepper.unconstrained_step(free_w, n * tau);
      state = stepper.step(state);
      kkt = kkt && check_kkt(state).ok();
      for (std::size_t i = 0; i < free_w.size(); ++i)
        max_diff = std::max(max_diff, std::abs(free_w.coefficients()[i] - state.w.coefficients()[i]));
    }
    if (!kkt) suite.kkt_failures.push_back("heat reduction level " + std::to_string(l));
    final_err.push_back(l2_error(state.w, problem.exact_solution, cfg.final_time));
    if (l + 1 < cfg.levels) mesh = refine_uniform(mesh);
  }
  const double secs = seconds_since(start);
  std::vector<double> ratios;
  bool ok = max_diff <= 1e-10 && secs <= 60.0;
  for (std::size_t i = 1; i < final_err.size(); ++i) {
    ratios.push_back(final_err[i - 1] / final_err[i]);
    ok = ok && ratios.back() >= 3.4 && ratios.back() <= 4.6;
  }
  r.passed = ok;
  r.detail = "max |w - w_free| = " + fmt(max_diff) + ", final-time error ratios [" + join(ratios) +
             "], runtime " + fmt(secs) + " s";

  const auto& report = suite.run("heat_smooth uniform", cfg);
  for (const auto& lvl : report.levels) {
    eta0_T.push_back(lvl.eta0_T);
    h.push_back(lvl.h_max);
  }
  return r;
}

CriterionResult obstacle_convergence(const ConvergenceReport& report) {
  CriterionResult r{4, "manufactured obstacle convergence", false, ""};
  std::vector<double> err_ratios, sigma_err;
  bool ok = report.levels.size() == 3;
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& lvl = report.levels[i];
    sigma_err.push_back(lvl.sigma_error_T.value_or(NAN));
    if (i == 0) continue;
    const auto& prev = report.levels[i - 1];
    err_ratios.push_back(*prev.err_linf_l2 / *lvl.err_linf_l2);
    ok = ok && err_ratios.back() >= 1.8 && sigma_err[i] < sigma_err[i - 1];
  }
  r.passed = ok;
  r.detail = "error ratios [" + join(err_ratios) + "], sigma errors at T [" + join(sigma_err) + "]";
  return r;
}

CriterionResult effectivity(const ConvergenceReport& report) {
  CriterionResult r{5, "estimator reliability surrogate", false, ""};
  std::vector<double> eff;
  for (const auto& lvl : report.levels) eff.push_back(lvl.effectivity.value_or(NAN));
  const auto [lo, hi] = std::minmax_element(eff.begin(), eff.end());
  const bool all_finite = std::all_of(eff.begin(), eff.end(), [](double v) { return std::isfinite(v); });
  r.passed = eff.size() == 3 && all_finite && *lo >= 1.0 && *hi / *lo < 5.0;
  r.detail = "effectivities [" + join(eff) + "], spread " + fmt(*hi / *lo);
  return r;
}

CriterionResult estimator_decay(const std::vector<double>& eta0_T, const std::vector<double>& h) {
  CriterionResult r{6, "estimator zero data and decay", false, ""};
  const auto space =
      build_space(std::make_shared<const Mesh>(build_structured_mesh(4)), 1);
  const FeFunction zero(space);
  const double zero_total =
      eta0(zero, zero, zero, [](double, double, double) { return 0.0; }, 0.0).total;
  std::vector<double> orders;
  bool ok = zero_total == 0.0 && eta0_T.size() >= 2;
  for (std::size_t i = 1; i < eta0_T.size(); ++i) {
    orders.push_back(std::log(eta0_T[i - 1] / eta0_T[i]) / std::log(h[i - 1] / h[i]));
    ok = ok && orders.back() >= 1.5;
  }
  r.passed = ok;
  r.detail = "eta0(zero data) = " + fmt(zero_total) + ", heat_smooth eta0(T) orders [" +
             join(orders) + "]";
  return r;
}

CriterionResult hand_values() {
  CriterionResult r{7, "hand-computed estimator values", false, ""};
  const auto mesh = std::make_shared<const Mesh>(build_structured_mesh(1));
  const ScalarField one = [](double, double, double) { return 1.0; };
  double sum4 = 0.0, sum6 = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < mesh->num_triangles(); ++k) {
    const double hk = mesh->h_element(static_cast<int>(k));
    const double area = mesh->area(static_cast<int>(k));
    sum2 += hk * hk * area;
    sum4 += std::pow(hk, 4) * area;
    sum6 += std::pow(hk, 6) * area;
  }
  const auto p1 = build_space(mesh, 1);
  const auto p2 = build_space(mesh, 2);
  const FeFunction z1(p1), z2(p2);
  const double e0 = eta0(z1, z1, z1, one, 0.0).total_sq();
  const double e1 = eta1(z2, z2, z2, one, 0.0).total_sq();
  const double ev = eta_energy(z1, z1, z1, one, 0.0).total_sq();
  r.passed = std::abs(e0 - 4.0) <= 1e-12 && std::abs(ev - 2.0) <= 1e-12 &&
             std::abs(e1 - sum6) <= 1e-12 && std::abs(e0 - sum4) <= 1e-12 &&
             std::abs(ev - sum2) <= 1e-12;
  r.detail = "eta0^2 = " + fmt(e0) + ", eta1^2 = " + fmt(e1) + " (sum h^6|K| = " + fmt(sum6) +
             "; the quoted 16 does not equal this sum), eta_energy^2 = " + fmt(ev);
  return r;
}

CriterionResult adaptive_localization(Suite& suite) {
  CriterionResult r{9, "adaptive localization", false, ""};
  ExperimentConfig cfg = base_config("pyramid_adaptive");
  cfg.refinement = RefinementMode::Adaptive;
  cfg.theta = 0.5;
  cfg.max_dofs = 20000;
  const auto& report = suite.run("pyramid_adaptive", cfg);
  const auto& last = report.levels.back();
  double best = 0.0;
  for (const auto& lvl : report.levels) best = std::max(best, lvl.top_decile_share);
  r.passed = last.ndofs <= 20000 && last.top_decile_share >= 0.5;
  r.detail = std::to_string(report.levels.size()) + " levels, final " + std::to_string(last.ndofs) +
             " dofs, top-decile share of sum eta0^2 on the final mesh = " +
             fmt(last.top_decile_share) + " (max over levels " + fmt(best) + ")";
  return r;
}

CriterionResult kkt(const Suite& suite) {
  CriterionResult r{2, "discrete KKT conditions", false, ""};
  std::vector<std::string> problems;
  bool ok = suite.kkt_failures.empty();
  for (const auto& [label, report] : suite.runs) {
    for (const auto& lvl : report.levels) ok = ok && lvl.kkt_ok;
    if (std::find(problems.begin(), problems.end(), report.config.problem) == problems.end())
      problems.push_back(report.config.problem);
  }
  for (const auto& name : benchmark_names())
    ok = ok && std::find(problems.begin(), problems.end(), name) != problems.end();
  r.passed = ok;
  std::string covered;
  for (const auto& p : problems) covered += (covered.empty() ? "" : ", ") + p;
  r.detail = std::to_string(suite.runs.size() + 4) + " trajectories checked step by step (" +
             covered + ")";
  for (const auto& f : suite.kkt_failures) r.detail += "; violated in " + f;
  return r;
}

CriterionResult lumped_sign(const Suite& suite) {
  CriterionResult r{8, "lumped sign property", false, ""};
  double worst = 0.0;
  int levels = 0;
  for (const auto& [label, report] : suite.runs) {
    if (report.config.sigma_mode != SigmaMode::Lumped) continue;
    for (const auto& lvl : report.levels) {
      worst = std::max(worst, lvl.term_signeg);
      ++levels;
    }
  }
  r.passed = levels > 0 && worst <= 1e-8;
  r.detail = "max int ||sigma^-||^2_V* = " + fmt(worst) + " over " + std::to_string(levels) +
             " lumped levels";
  return r;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

CriterionResult determinism() {
  CriterionResult r{10, "deterministic output", false, ""};
  const int saved = num_threads();
  set_num_threads(1);
  const auto root = std::filesystem::temp_directory_path() /
                    ("virecon_determinism_" + std::to_string(Clock::now().time_since_epoch().count()));
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    ExperimentConfig cfg = base_config("manufactured_obstacle");
    cfg.levels = 2;
    cfg.output = (root / std::to_string(i)).string();
    run_experiment(cfg, true);
    csv[i] = read_file(root / std::to_string(i) / "convergence.csv");
  }
  set_num_threads(saved);
  std::error_code ec;
  std::filesystem::remove_all(root, ec);
  r.passed = !csv[0].empty() && csv[0] == csv[1];
  r.detail = "two runs, " + std::to_string(csv[0].size()) + " bytes, " +
             (csv[0] == csv[1] ? "identical" : "different");
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* log) {
  Suite suite;
  suite.log = log;
  std::vector<CriterionResult> results;

  results.push_back(orthogonality(suite));
  std::vector<double> eta0_T, h;
  results.push_back(heat_reduction(suite, eta0_T, h));

  ExperimentConfig man = base_config("manufactured_obstacle");
  man.levels = 3;
  const ConvergenceReport& man_report = suite.run("manufactured_obstacle uniform", man);
  results.push_back(obstacle_convergence(man_report));
  results.push_back(effectivity(man_report));
  results.push_back(estimator_decay(eta0_T, h));
  results.push_back(hand_values());
  results.push_back(adaptive_localization(suite));

  ExperimentConfig consistent = man;
  consistent.sigma_mode = SigmaMode::Consistent;
  consistent.levels = 2;
  suite.run("manufactured_obstacle consistent", consistent);

  results.push_back(kkt(suite));
  results.push_back(lumped_sign(suite));
  results.push_back(determinism());

  std::sort(results.begin(), results.end(),
            [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
  return results;
}

bool print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results) {
  bool all = !results.empty();
  for (const auto& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.name
        << "): " << r.detail << '\n';
    all = all && r.passed;
  }
  return all;
}

}  // namespace virecon
