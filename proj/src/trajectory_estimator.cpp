#include "virecon/trajectory_estimator.hpp"

#include <cmath>
#include <limits>

#include "virecon/errors.hpp"

namespace virecon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

FeFunction difference(const FeFunction& a, const FeFunction& b, double scale) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = (a.coefficients()[i] - b.coefficients()[i]) * scale;
  return FeFunction(a.space_ptr(), std::move(d));
}

}  // namespace

TrajectoryEstimator::TrajectoryEstimator(const ProblemSpec& problem, const SpaceOperators& ops,
                                         double tau, EstimatorOptions options)
    : problem_(problem), ops_(ops), tau_(tau), options_(options) {
  if (!(tau > 0.0)) throw InvalidArgument("estimator: tau must be positive");
  if (options_.verification) {
    reference_ = std::make_unique<ReferenceReconstructor>(
        ops_.space, verification_space(*ops_.space, options_.fine_depth));
  }
}

TrajectoryEstimator::~TrajectoryEstimator() = default;

void TrajectoryEstimator::start(const StepState& initial) {
  w_prev_ = initial.w;
  w_prev2_.reset();
  sigma_.reset();
  sigma_prev_.reset();
  steps_ = 0;
  history_.clear();
  initial_error_ = l2_error(initial.w, [this](double x, double y, double) {
    return problem_.initial(x, y, 0.0);
  }, 0.0);
}

ScalarField TrajectoryEstimator::source_rate(double t_prev) const {
  if (problem_.source_rate) return problem_.source_rate;
  const ScalarField f = problem_.source;
  const double tau = tau_;
  return [f, tau, t_prev](double x, double y, double t) {
    (void)t;
    return (f(x, y, t_prev + tau) - f(x, y, t_prev)) / tau;
  };
}

const StepEstimate& TrajectoryEstimator::push(const StepState& state) {
  if (!w_prev_) throw InvalidArgument("estimator: start() must be called before push()");
  const double t = state.time;
  const FeFunction& w = state.w;

  std::optional<std::vector<double>> fine_load;
  if (reference_) fine_load = reference_->coarse_load(problem_.source, t);
  std::optional<std::span<const double>> load;
  if (fine_load) load = std::span<const double>(*fine_load);

  sigma_prev_ = std::move(sigma_);
  sigma_ = compute_sigma(ops_, w, *w_prev_, tau_, problem_.source, t, options_.mode, load);
  const SigmaRecord& sig = *sigma_;

  StepEstimate est;
  est.time = t;
  eta0_ = eta0(w, sig.wdot, sig.sigma, problem_.source, t, options_.form);
  est.eta0 = eta0_.total;
  est.eta_energy = eta_energy(w, sig.sigma, sig.wdot, problem_.source, t).total;
  est.sigma_dual = dual_norm(ops_, sig.sigma, dual_guess_);
  {
    const auto ms = ops_.mass * sig.sigma.coefficients();
    est.sigma_l2 = std::sqrt(std::max(0.0, dot(sig.sigma.coefficients(), ms)));
  }
  const double minus_dual = dual_norm(ops_, sig.sigma_minus, minus_guess_);
  est.sigma_minus_dual_sq = minus_dual * minus_dual;

  if (reference_) {
    const SigmaRecord consistent =
        options_.mode == SigmaMode::Consistent
            ? sig
            : compute_sigma(ops_, w, *w_prev_, tau_, problem_.source, t, SigmaMode::Consistent, load);
    const FeFunction rec =
        reference_->reconstruct({problem_.source, consistent.sigma, consistent.wdot, t});
    est.orthogonality = reference_->orthogonality_residual(rec, w);
    const auto terms = complementarity_terms(ops_, sig, w, state.chi, *reference_, rec);
    est.comp = terms.comp;
    est.neg = terms.neg;
  } else {
    est.orthogonality = kNaN;
    const auto terms = complementarity_terms(ops_, sig, w, state.chi, est.eta0);
    est.comp = terms.comp;
    est.neg = terms.neg;
  }

  if (steps_ == 0) {
    // No multiplier exists at t = 0; the first step's sigma_h and w_{h,t} stand in.
    eta0_initial_ = eta0(*w_prev_, sig.wdot, sig.sigma, problem_.source, 0.0, options_.form).total;
  }

  est.eta_dt = kNaN;
  if (w_prev2_ && sigma_prev_) {
    const FeFunction wddot = difference(sig.wdot, sigma_prev_->wdot, 1.0 / tau_);
    const FeFunction sdot = difference(sig.sigma, sigma_prev_->sigma, 1.0 / tau_);
    const ScalarField fdot = source_rate(t - tau_);
    eta_dt_ = ops_.space->degree() >= 2
                  ? eta1(sig.wdot, wddot, sdot, fdot, t, options_.form)
                  : eta0_of_rates(sig.wdot, wddot, sdot, fdot, t, options_.form);
    est.eta_dt = eta_dt_.total;
    time_residual_sq_.add(tau_, est.eta_dt * est.eta_dt);
  } else {
    ++skipped_rate_steps_;
  }

  sigma_minus_dual_sq_.add(tau_, est.sigma_minus_dual_sq);
  comp_.add(tau_, est.comp);
  neg_.add(tau_, est.neg);
  dual_energy_.add(tau_, est.sigma_dual * est.eta_energy);
  dual_energy_l2_.add(tau_, est.sigma_l2 * est.eta_energy);

  w_prev2_ = std::move(w_prev_);
  w_prev_ = w;
  ++steps_;
  history_.push_back(est);
  history_.back().total = breakdown().total;
  return history_.back();
}

EstimatorBreakdown TrajectoryEstimator::breakdown() const {
  if (steps_ == 0) throw InvalidArgument("estimator: no steps pushed");
  AccumulatedTerms acc;
  acc.sigma_minus_dual_sq = sigma_minus_dual_sq_.value();
  acc.comp = comp_.value();
  acc.neg = neg_.value();
  acc.dual_energy = dual_energy_.value();
  acc.time_residual_sq = time_residual_sq_.value();
  acc.eta0_now = eta0_.total;
  InitialTerms init{initial_error_, eta0_initial_};
  EstimatorBreakdown b = total_bound(acc, init, ops_.space->degree());
  b.eta0_element_sq = eta0_.element_sq;
  b.eta_dt_element_sq = eta_dt_.element_sq;
  return b;
}

}  // namespace virecon
