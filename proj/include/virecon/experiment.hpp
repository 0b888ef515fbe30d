#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "virecon/config.hpp"
#include "virecon/estimators.hpp"
#include "virecon/vi_stepper.hpp"

namespace virecon {

/// One row of convergence.csv plus diagnostics that only go to stdout.
struct LevelReport {
  int level = 0;
  double h_max = 0.0;
  std::size_t ndofs = 0;
  int nsteps = 0;
  double tau = 0.0;
  std::optional<double> err_linf_l2;  // max_n ||w_ex(t_n) - w_h(t_n)||_L2
  double eta0_T = 0.0;
  double eta_total = 0.0;
  double term_signeg = 0.0;  // int ||sigma^-||^2_{V*}
  double term_comp = 0.0;    // int |(sigma, w - chi)|
  double term_dual = 0.0;    // int ||sigma||_{V*} eta_V
  std::optional<double> effectivity;  // eta_total / (max error / 2)
  std::optional<double> ortho_resid;  // max over steps (verification runs)
  std::optional<double> seconds;

  // Diagnostics.
  EstimatorBreakdown breakdown;
  std::optional<double> sigma_error_T;  // ||sigma_h - sigma_ex||_L2 at T
  double term_dual_l2 = 0.0;            // int ||sigma||_L2 eta_V
  double top_decile_share = 0.0;        // share of sum eta0^2 in the top 10% of elements
  bool kkt_ok = true;
  int pdas_fallbacks = 0;
  std::size_t elements = 0;
};

struct ConvergenceReport {
  ExperimentConfig config;
  std::vector<LevelReport> levels;
};

/// Final state of one level, kept for output and marking.
struct LevelResult {
  LevelReport report;
  SpacePtr space;
  std::optional<StepState> final_state;
  std::optional<FeFunction> sigma;
  std::vector<double> eta0_element_sq;
};

/// tau = T / ceil(T / h^2) for the h^2-coupled rule, else the fixed value.
double choose_tau(const ExperimentConfig& cfg, double h_max);

/// Runs one mesh: trajectory, estimators, error against the exact solution.
LevelResult run_level(const ProblemSpec& problem, const MeshPtr& mesh, const ExperimentConfig& cfg,
                      int level);

/// Smallest set of elements (largest indicators first, ties by index) whose
/// squared indicators sum to at least theta times the total.
std::vector<int> dorfler_mark(std::span<const double> indicator_sq, double theta);
/// Fraction of sum(indicator_sq) held by the largest ceil(10%) of the entries.
double top_decile_share(std::span<const double> indicator_sq);

/// Drives all levels and, when `write_files`, writes convergence.csv and one
/// VTK file per level into cfg.output.
ConvergenceReport run_experiment(const ExperimentConfig& cfg, bool write_files = true);

}  // namespace virecon
