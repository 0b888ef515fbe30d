#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "virecon/assembly.hpp"

namespace virecon {

/// Data of a parabolic obstacle problem with homogeneous Dirichlet conditions.
struct ProblemSpec {
  std::string name;
  Rectangle domain;
  ScalarField source;
  ScalarField obstacle;  // must be <= 0 on the boundary
  ScalarField initial;   // evaluated at t = 0
  double final_time = 0.5;
  // Optional (empty when unknown).
  ScalarField exact_solution;
  ScalarField exact_multiplier;
  ScalarField source_rate;  // d/dt of the source

  bool has_exact_solution() const { return static_cast<bool>(exact_solution); }
};

struct PdasOptions {
  /// Active multipliers may dip to -active_tol * ||b||_inf.
  double active_tol = 1e-10;
  double linear_tol = 1e-12;
  /// Stopping tolerance on the increment of the projected Gauss-Seidel fallback.
  double fallback_tol = 1e-12;
  /// Active-set iterations before the fallback engages (0 = number of dofs + 1, the
  /// last one confirming the final set).
  int max_iterations = 0;
};

struct PdasResult {
  std::vector<double> w;
  std::vector<double> lambda;  // A w - b on active dofs, 0 elsewhere
  std::vector<char> active;
  int iterations = 0;
  bool fallback = false;
};

/// Solves the discrete complementarity problem
///   w >= chi,  lambda = A w - b >= 0,  lambda . (w - chi) = 0
/// by primal-dual active sets started from `init_active` (empty span = none).
/// A dof is active when lambda_i + A_ii (chi_i - w_i) > 0; ties stay inactive.
/// If an active set repeats without being a fixed point, or the iteration cap
/// is reached, projected Gauss-Seidel finishes the solve and `fallback` is set.
/// `init_w` (optional) seeds the inner linear solves.
PdasResult pdas_solve(const CsrMatrix& a, std::span<const double> b, std::span<const double> chi,
                      std::span<const char> init_active = {}, const PdasOptions& options = {},
                      std::span<const double> init_w = {});

struct StepState {
  double time = 0.0;
  FeFunction w;
  std::vector<double> chi;     // interpolated obstacle at `time`
  std::vector<double> lambda;  // discrete KKT multiplier
  std::vector<char> active;
  double rhs_scale = 0.0;  // ||b||_inf of the step system
  int pdas_iterations = 0;
  bool fallback = false;
};

struct Trajectory {
  double tau = 0.0;
  std::vector<StepState> states;
};

/// Backward Euler for the discrete obstacle problem: each step solves
///   (M/tau + K) w = M w_prev / tau + F(t + tau),  w >= chi_h(t + tau)
/// with boundary dofs fixed to zero by symmetric elimination.
class TimeStepper {
 public:
  TimeStepper(const ProblemSpec& problem, const SpaceOperators& ops, double tau,
              PdasOptions options = {});

  double tau() const { return tau_; }
  /// w_h(0) = max(I_h w0, chi_h(0)) dof-wise.
  StepState initial_state() const;
  StepState step(const StepState& prev) const;
  /// The same step with the constraint dropped (plain linear solve).
  FeFunction unconstrained_step(const FeFunction& prev, double t_next) const;

  const CsrMatrix& system_matrix() const { return system_; }
  std::vector<double> step_rhs(const FeFunction& prev, double t_next) const;

 private:
  std::vector<double> obstacle_at(double t) const;

  const ProblemSpec& problem_;
  const SpaceOperators& ops_;
  double tau_;
  PdasOptions options_;
  CsrMatrix system_;
};

StepState step(const StepState& prev, double tau, const ProblemSpec& problem,
               const SpaceOperators& ops);

/// Uniform backward-Euler trajectory on [0, T]. T / tau must be an integer to
/// within 1e-9.
Trajectory run_trajectory(const ProblemSpec& problem, const SpaceOperators& ops, double tau,
                          double final_time);

/// Number of uniform steps covering [0, T], or throws when T / tau is not integral.
int step_count(double tau, double final_time);

struct KktReport {
  double min_gap = 0.0;         // min_i (w - chi)_i
  double min_multiplier = 0.0;  // min_i lambda_i
  double complementarity = 0.0; // |lambda . (w - chi)|
  double gap_scale = 0.0;       // ||w - chi||_inf
  double multiplier_scale = 0.0;// ||lambda||_inf
  double chi_scale = 0.0;       // ||chi||_inf
  double rhs_scale = 0.0;

  bool feasible() const { return min_gap >= -1e-10 * (1.0 + chi_scale); }
  bool sign_ok() const { return min_multiplier >= -1e-9 * rhs_scale; }
  bool complementary() const {
    return complementarity <= 1e-9 * multiplier_scale * gap_scale;
  }
  bool ok() const { return feasible() && sign_ok() && complementary(); }
};

KktReport check_kkt(const StepState& state);

}  // namespace virecon
