#include "virecon/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "virecon/benchmarks.hpp"
#include "virecon/errors.hpp"
#include "virecon/output.hpp"
#include "virecon/trajectory_estimator.hpp"

namespace virecon {

namespace {

// Rethrows the active exception with level/step context, keeping its type.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConvergenceFailure& e) {
    throw ConvergenceFailure(context + ": " + e.what(), e.residual());
  } catch (const NumericError& e) {
    throw NumericError(context + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(context + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(context + ": " + e.what());
  }
}

}  // namespace

double choose_tau(const ExperimentConfig& cfg, double h_max) {
  if (cfg.fixed_tau) return *cfg.fixed_tau;
  const double steps = std::ceil(cfg.final_time / (h_max * h_max) - 1e-9);
  return cfg.final_time / std::max(1.0, steps);
}

namespace {

LevelResult run_level_unwrapped(const ProblemSpec& problem, const MeshPtr& mesh,
                                const ExperimentConfig& cfg, int level) {
  const auto start = std::chrono::steady_clock::now();
  LevelResult result;
  LevelReport& rep = result.report;
  rep.level = level;
  result.space = build_space(mesh, cfg.degree);
  const SpaceOperators ops = SpaceOperators::build(result.space);
  rep.h_max = mesh_metrics(*mesh).max_h;
  rep.ndofs = result.space->num_dofs();
  rep.elements = mesh->num_triangles();
  rep.tau = choose_tau(cfg, rep.h_max);
  rep.nsteps = step_count(rep.tau, cfg.final_time);

  TimeStepper stepper(problem, ops, rep.tau);
  EstimatorOptions eopts;
  eopts.mode = cfg.sigma_mode;
  eopts.form = cfg.residual;
  eopts.verification = cfg.verify;
  eopts.fine_depth = cfg.fine_depth;
  TrajectoryEstimator estimator(problem, ops, rep.tau, eopts);

  StepState state = stepper.initial_state();
  estimator.start(state);
  double max_err = 0.0;
  if (problem.has_exact_solution()) max_err = l2_error(state.w, problem.exact_solution, 0.0);
  double max_ortho = 0.0;

  for (int n = 1; n <= rep.nsteps; ++n) {
    try {
      state = stepper.step(state);
      state.time = n == rep.nsteps ? cfg.final_time : n * rep.tau;
      if (!check_kkt(state).ok()) rep.kkt_ok = false;
      if (state.fallback) ++rep.pdas_fallbacks;
      const StepEstimate& est = estimator.push(state);
      if (cfg.verify) max_ortho = std::max(max_ortho, est.orthogonality);
      if (problem.has_exact_solution())
        max_err = std::max(max_err, l2_error(state.w, problem.exact_solution, state.time));
    } catch (...) {
      rethrow_with_context("step " + std::to_string(n));
    }
  }

  const EstimatorBreakdown b = estimator.breakdown();
  rep.breakdown = b;
  rep.eta0_T = b.eta0;
  rep.eta_total = b.total;
  rep.term_signeg = b.sigma_minus_dual_sq;
  rep.term_comp = b.comp;
  rep.term_dual = b.dual_energy;
  rep.term_dual_l2 = estimator.dual_energy_l2();
  if (problem.has_exact_solution()) {
    rep.err_linf_l2 = max_err;
    if (max_err > 0.0) rep.effectivity = b.total / (0.5 * max_err);
  }
  if (problem.exact_multiplier)
    rep.sigma_error_T = l2_error(estimator.last_sigma().sigma, problem.exact_multiplier, cfg.final_time);
  if (cfg.verify) rep.ortho_resid = max_ortho;
  rep.top_decile_share = top_decile_share(b.eta0_element_sq);
  result.eta0_element_sq = b.eta0_element_sq;
  result.sigma = estimator.last_sigma().sigma;
  result.final_state = std::move(state);
  if (cfg.timings) {
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return result;
}

}  // namespace

LevelResult run_level(const ProblemSpec& problem, const MeshPtr& mesh, const ExperimentConfig& cfg,
                      int level) {
  try {
    return run_level_unwrapped(problem, mesh, cfg, level);
  } catch (...) {
    rethrow_with_context("level " + std::to_string(level));
  }
}

namespace {

std::vector<int> order_by_size(std::span<const double> v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
  return idx;
}

}  // namespace

std::vector<int> dorfler_mark(std::span<const double> indicator_sq, double theta) {
  const double total = std::accumulate(indicator_sq.begin(), indicator_sq.end(), 0.0);
  std::vector<int> marked;
  if (!(total > 0.0)) return marked;
  double sum = 0.0;
  for (int k : order_by_size(indicator_sq)) {
    if (sum >= theta * total) break;
    marked.push_back(k);
    sum += indicator_sq[k];
  }
  return marked;
}

double top_decile_share(std::span<const double> indicator_sq) {
  const double total = std::accumulate(indicator_sq.begin(), indicator_sq.end(), 0.0);
  if (!(total > 0.0)) return 0.0;
  const auto order = order_by_size(indicator_sq);
  const auto count = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(order.size())));
  double top = 0.0;
  for (std::size_t i = 0; i < count; ++i) top += indicator_sq[order[i]];
  return top / total;
}

ConvergenceReport run_experiment(const ExperimentConfig& cfg, bool write_files) {
  ProblemSpec problem = benchmark(cfg.problem);
  problem.final_time = cfg.final_time;
  ConvergenceReport report;
  report.config = cfg;
  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output + "': " + ec.message());
  }

  auto emit = [&](const LevelResult& res) {
    report.levels.push_back(res.report);
    if (!write_files) return;
    const std::string path =
        (std::filesystem::path(cfg.output) / ("solution_level" + std::to_string(res.report.level) + ".vtk"))
            .string();
    write_vtk(path, *res.space, res.final_state->w.coefficients(), res.sigma->coefficients(),
              res.final_state->chi, res.eta0_element_sq);
  };

  MeshPtr mesh = std::make_shared<const Mesh>(build_structured_mesh(cfg.n, problem.domain));
  if (cfg.refinement == RefinementMode::Uniform) {
    for (int l = 0; l < cfg.levels; ++l) {
      emit(run_level(problem, mesh, cfg, l));
      if (l + 1 < cfg.levels) mesh = refine_uniform(mesh);
    }
  } else {
    for (int l = 0;; ++l) {
      const LevelResult res = run_level(problem, mesh, cfg, l);
      emit(res);
      const auto marked = dorfler_mark(res.eta0_element_sq, cfg.theta);
      if (marked.empty()) break;
      auto next = std::make_shared<const Mesh>(refine(mesh, marked));
      if (build_space(next, cfg.degree)->num_dofs() > static_cast<std::size_t>(cfg.max_dofs)) break;
      mesh = std::move(next);
    }
  }

  if (write_files)
    write_convergence_csv(report, (std::filesystem::path(cfg.output) / "convergence.csv").string());
  return report;
}

}  // namespace virecon
