#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "virecon/estimators.hpp"
#include "virecon/multiplier.hpp"
#include "virecon/vi_stepper.hpp"

namespace virecon {

struct EstimatorOptions {
  SigmaMode mode = SigmaMode::Lumped;
  ResidualForm form = ResidualForm::Corrected;
  /// Compute the elliptic reconstruction on a nested fine mesh at every step.
  bool verification = false;
  int fine_depth = 2;
};

/// Per-step values. Quantities that are not available at a step are NaN
/// (eta_dt on the first step, orthogonality outside verification runs).
struct StepEstimate {
  double time = 0.0;
  double eta0 = 0.0;
  double eta_energy = 0.0;
  double sigma_dual = 0.0;           // ||sigma_h||_{V*}
  double sigma_l2 = 0.0;             // ||sigma_h||_{L2}
  double sigma_minus_dual_sq = 0.0;  // ||sigma_h^-||^2_{V*}
  double comp = 0.0;
  double neg = 0.0;
  double eta_dt = 0.0;
  double orthogonality = 0.0;
  double total = 0.0;  // bound at this time
};

/// Walks a trajectory one state at a time and accumulates every term of the
/// a posteriori bound. Only the last three states are kept, so long runs do
/// not need the whole trajectory in memory.
class TrajectoryEstimator {
 public:
  TrajectoryEstimator(const ProblemSpec& problem, const SpaceOperators& ops, double tau,
                      EstimatorOptions options = {});
  ~TrajectoryEstimator();

  void start(const StepState& initial);
  const StepEstimate& push(const StepState& state);

  /// Bound at the latest pushed time. Requires at least one push.
  EstimatorBreakdown breakdown() const;
  const std::vector<StepEstimate>& history() const { return history_; }
  const SigmaRecord& last_sigma() const { return *sigma_; }
  const Indicator& last_eta0() const { return eta0_; }
  /// Integral of ||sigma_h||_{L2} eta_V, the L2 variant of the dual term.
  double dual_energy_l2() const { return dual_energy_l2_.value(); }
  /// Number of steps where eta_dt could not be formed (missing history).
  int skipped_rate_steps() const { return skipped_rate_steps_; }

 private:
  ScalarField source_rate(double t_prev) const;

  const ProblemSpec& problem_;
  const SpaceOperators& ops_;
  double tau_;
  EstimatorOptions options_;
  std::unique_ptr<ReferenceReconstructor> reference_;

  std::optional<FeFunction> w_prev_, w_prev2_;
  std::optional<SigmaRecord> sigma_, sigma_prev_;
  Indicator eta0_, eta_dt_;
  int steps_ = 0;
  int skipped_rate_steps_ = 0;
  double initial_error_ = 0.0;
  double eta0_initial_ = 0.0;
  RunningIntegral sigma_minus_dual_sq_, comp_, neg_, dual_energy_, dual_energy_l2_, time_residual_sq_;
  std::vector<StepEstimate> history_;
  std::vector<double> dual_guess_, minus_guess_;  // warm starts for the dual-norm solves
};

}  // namespace virecon
