#include "virecon/vi_stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "virecon/errors.hpp"

namespace virecon {

namespace {

// Projected Gauss-Seidel from the given start; x is projected onto x >= chi.
void projected_gauss_seidel(const CsrMatrix& a, std::span<const double> b,
                            std::span<const double> chi, std::vector<double>& x, double tol) {
  const std::size_t n = a.size();
  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  for (std::size_t i = 0; i < n; ++i) x[i] = std::max(x[i], chi[i]);
  constexpr int kMaxSweeps = 1'000'000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = b[i];
      double diag = 0.0;
      for (int p = rp[i]; p < rp[i + 1]; ++p) {
        if (cols[p] == static_cast<int>(i)) {
          diag = vals[p];
        } else {
          r -= vals[p] * x[cols[p]];
        }
      }
      const double updated = std::max(chi[i], r / diag);
      change = std::max(change, std::abs(updated - x[i]));
      x[i] = updated;
    }
    if (change <= tol * std::max(1.0, norm_inf(x))) return;
  }
  throw ConvergenceFailure("projected Gauss-Seidel did not converge", 0.0);
}

}  // namespace

PdasResult pdas_solve(const CsrMatrix& a, std::span<const double> b, std::span<const double> chi,
                      std::span<const char> init_active, const PdasOptions& options,
                      std::span<const double> init_w) {
  const std::size_t n = a.size();
  if (b.size() != n || chi.size() != n || (!init_w.empty() && init_w.size() != n))
    throw InvalidArgument("pdas_solve: size mismatch");
  const auto diag = a.diagonal_values();
  const double bscale = norm_inf(b);
  const int max_it = options.max_iterations > 0 ? options.max_iterations
                                                : static_cast<int>(n) + 1;

  PdasResult res;
  if (init_w.empty()) {
    res.w.assign(n, 0.0);
  } else {
    res.w.assign(init_w.begin(), init_w.end());
  }
  res.lambda.assign(n, 0.0);
  if (init_active.empty()) {
    res.active.assign(n, 0);
  } else {
    res.active.assign(init_active.begin(), init_active.end());
  }

  std::vector<std::vector<char>> visited;
  std::vector<char> free(n), next(n);
  std::vector<double> aw(n);
  bool converged = false;
  for (int it = 1; it <= max_it; ++it) {
    res.iterations = it;
    for (std::size_t i = 0; i < n; ++i) {
      free[i] = res.active[i] ? 0 : 1;
      if (res.active[i]) res.w[i] = chi[i];
    }
    conjugate_gradient(a, b, res.w, options.linear_tol, free);
    a.multiply(res.w, aw);
    for (std::size_t i = 0; i < n; ++i) {
      res.lambda[i] = res.active[i] ? aw[i] - b[i] : 0.0;
      next[i] = res.lambda[i] + diag[i] * (chi[i] - res.w[i]) > 0.0 ? 1 : 0;
    }
    if (next == res.active) {
      converged = true;
      break;
    }
    if (std::find(visited.begin(), visited.end(), next) != visited.end()) break;
    visited.push_back(res.active);
    res.active = next;
  }

  if (!converged) {
    res.fallback = true;
    projected_gauss_seidel(a, b, chi, res.w, options.fallback_tol);
    a.multiply(res.w, aw);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = aw[i] - b[i];
      res.active[i] = (res.w[i] == chi[i] && g > 0.0) ? 1 : 0;
      res.lambda[i] = res.active[i] ? g : 0.0;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (res.active[i] && res.lambda[i] < -options.active_tol * bscale) {
      std::ostringstream msg;
      msg << "active multiplier " << res.lambda[i] << " at dof " << i << " below tolerance";
      throw ConvergenceFailure(msg.str(), res.lambda[i]);
    }
  }
  return res;
}

int step_count(double tau, double final_time) {
  if (!(tau > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(final_time > 0.0)) throw InvalidArgument("final time must be positive");
  const double ratio = final_time / tau;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio) || rounded < 1.0)
    throw InvalidArgument("final time is not an integer multiple of the time step");
  return static_cast<int>(rounded);
}

TimeStepper::TimeStepper(const ProblemSpec& problem, const SpaceOperators& ops, double tau,
                         PdasOptions options)
    : problem_(problem), ops_(ops), tau_(tau), options_(options) {
  if (!(tau > 0.0)) throw InvalidArgument("time step must be positive");
  system_ = ops_.stiffness.axpy(1.0 / tau, ops_.mass);
  std::vector<double> dummy(ops_.num_dofs(), 0.0), zeros(ops_.num_dofs(), 0.0);
  std::vector<char> fixed(ops_.num_dofs());
  for (std::size_t i = 0; i < fixed.size(); ++i) fixed[i] = ops_.free[i] ? 0 : 1;
  eliminate_dofs(system_, dummy, fixed, zeros);
}

std::vector<double> TimeStepper::obstacle_at(double t) const {
  auto chi = interpolate(ops_.space, problem_.obstacle, t).vector();
  for (std::size_t i = 0; i < chi.size(); ++i) {
    if (!ops_.free[i] && chi[i] > 1e-12)
      throw InvalidArgument("obstacle must be non-positive on the boundary");
  }
  return chi;
}

StepState TimeStepper::initial_state() const {
  StepState s{0.0, interpolate(ops_.space, problem_.initial, 0.0), obstacle_at(0.0), {}, {}, 0.0, 0, false};
  auto w = s.w.coefficients();
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::max(w[i], s.chi[i]);
    if (!ops_.free[i]) w[i] = 0.0;
  }
  s.lambda.assign(w.size(), 0.0);
  s.active.assign(w.size(), 0);
  return s;
}

std::vector<double> TimeStepper::step_rhs(const FeFunction& prev, double t_next) const {
  auto b = assemble_load(*ops_.space, problem_.source, t_next);
  const auto mw = ops_.mass * prev.coefficients();
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = ops_.free[i] ? b[i] + mw[i] / tau_ : 0.0;
  }
  return b;
}

StepState TimeStepper::step(const StepState& prev) const {
  const double t = prev.time + tau_;
  const auto b = step_rhs(prev.w, t);
  auto chi = obstacle_at(t);
  auto res = pdas_solve(system_, b, chi, prev.active, options_, prev.w.coefficients());
  StepState s{t, FeFunction(ops_.space, std::move(res.w)), std::move(chi), std::move(res.lambda),
              std::move(res.active), norm_inf(b), res.iterations, res.fallback};
  return s;
}

FeFunction TimeStepper::unconstrained_step(const FeFunction& prev, double t_next) const {
  const auto b = step_rhs(prev, t_next);
  return FeFunction(ops_.space, solve_spd(system_, b, options_.linear_tol));
}

StepState step(const StepState& prev, double tau, const ProblemSpec& problem,
               const SpaceOperators& ops) {
  return TimeStepper(problem, ops, tau).step(prev);
}

Trajectory run_trajectory(const ProblemSpec& problem, const SpaceOperators& ops, double tau,
                          double final_time) {
  const int steps = step_count(tau, final_time);
  TimeStepper stepper(problem, ops, tau);
  Trajectory traj;
  traj.tau = tau;
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.push_back(stepper.initial_state());
  for (int n = 1; n <= steps; ++n) {
    traj.states.push_back(stepper.step(traj.states.back()));
    // Pin the last time exactly to T.
    if (n == steps) traj.states.back().time = final_time;
  }
  return traj;
}

KktReport check_kkt(const StepState& state) {
  KktReport r;
  const auto w = state.w.coefficients();
  r.min_gap = w.empty() ? 0.0 : w[0] - state.chi[0];
  r.min_multiplier = state.lambda.empty() ? 0.0 : state.lambda[0];
  double comp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double gap = w[i] - state.chi[i];
    r.min_gap = std::min(r.min_gap, gap);
    r.min_multiplier = std::min(r.min_multiplier, state.lambda[i]);
    r.gap_scale = std::max(r.gap_scale, std::abs(gap));
    r.multiplier_scale = std::max(r.multiplier_scale, std::abs(state.lambda[i]));
    r.chi_scale = std::max(r.chi_scale, std::abs(state.chi[i]));
    comp += state.lambda[i] * gap;
  }
  r.complementarity = std::abs(comp);
  r.rhs_scale = state.rhs_scale;
  return r;
}

}  // namespace virecon
