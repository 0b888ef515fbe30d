#pragma once

#include <array>
#include <optional>
#include <vector>

#include "virecon/assembly.hpp"
#include "virecon/multiplier.hpp"

namespace virecon {

/// Normal-flux jumps [[grad w . n]] on interior edges, sampled at the 3 edge
/// Gauss points. The sign follows the stored edge orientation; only squared
/// magnitudes enter the estimators.
struct EdgeJumps {
  std::vector<int> edges;
  std::vector<std::array<double, 3>> values;

  /// int_e J^2 for entry i.
  double squared_norm(std::size_t i, double edge_length) const;
  /// sum_e h_e^power int_e J^2.
  double weighted_sum(const Mesh& mesh, int power) const;
  double max_abs() const;
};

EdgeJumps jump_residual(const FeFunction& w);

/// Which residual the L2-type estimators evaluate. `Corrected` is the form
///   f + sigma_h + Lap w_h - w_{h,t}
/// obtained from the reconstruction identity -Lap W = f + sigma_h - w_{h,t};
/// `Printed` swaps the roles of w_h and w_{h,t} (f + sigma_h + Lap w_{h,t} - w_h)
/// and is kept for comparison.
enum class ResidualForm { Corrected, Printed };

/// Per-element squared contributions and the total (square root of their sum).
/// Interior-edge terms are split evenly between the two neighbours.
struct Indicator {
  std::vector<double> element_sq;
  double total = 0.0;

  double total_sq() const { return total * total; }
};

/// Generic residual indicator
///   sum_K h_K^element_power ||R||^2_K + sum_e h_e^edge_power ||[[grad u_jump . n]]||^2_e
/// with R = source(t) + sum c_i u_i + sum d_j Lap v_j.
struct ResidualTerms {
  ScalarField source;  // may be empty
  double time = 0.0;
  std::vector<std::pair<double, const FeFunction*>> values;
  std::vector<std::pair<double, const FeFunction*>> laplacians;
  const FeFunction* jump_field = nullptr;
  int element_power = 4;
  int edge_power = 3;
};

Indicator residual_indicator(const Space& space, const ResidualTerms& terms);

/// L2-norm estimator with h_K^4 / h_e^3 weights.
Indicator eta0(const FeFunction& w, const FeFunction& wdot, const FeFunction& sigma,
               const ScalarField& f, double t, ResidualForm form = ResidualForm::Corrected);

/// Dual-norm estimator of the time derivative (h_K^6 / h_e^5 weights) on the
/// differenced fields; needs degree >= 2.
Indicator eta1(const FeFunction& wdot, const FeFunction& wddot, const FeFunction& sigmadot,
               const ScalarField& fdot, double t, ResidualForm form = ResidualForm::Corrected);

/// Degree-1 replacement for eta1: the same differenced residual with the
/// h_K^4 / h_e^3 weights of eta0.
Indicator eta0_of_rates(const FeFunction& wdot, const FeFunction& wddot,
                        const FeFunction& sigmadot, const ScalarField& fdot, double t,
                        ResidualForm form = ResidualForm::Corrected);

/// Energy-norm residual estimator (h_K^2 / h_e weights, corrected residual).
Indicator eta_energy(const FeFunction& w, const FeFunction& sigma, const FeFunction& wdot,
                     const ScalarField& f, double t);

struct ComplementarityTerms {
  double comp = 0.0;  // |(sigma_h, w_h - chi_h)|
  double neg = 0.0;   // sigma_h^- term, surrogate or reference
};

/// Surrogate mode: neg = |(sigma^-, w - chi)| + ||sigma^-||_L2 * eta0_value.
ComplementarityTerms complementarity_terms(const SpaceOperators& ops, const SigmaRecord& sigma,
                                           const FeFunction& w, std::span<const double> chi,
                                           double eta0_value);
/// Verification mode: neg = |(sigma^-, W_ref - chi)| evaluated on the fine space.
ComplementarityTerms complementarity_terms(const SpaceOperators& ops, const SigmaRecord& sigma,
                                           const FeFunction& w, std::span<const double> chi,
                                           const ReferenceReconstructor& reference,
                                           const FeFunction& reconstruction);

/// Right-endpoint rectangle rule I_n = I_{n-1} + tau * value_n.
class RunningIntegral {
 public:
  void add(double tau, double value) { value_ += tau * value; }
  double value() const { return value_; }

 private:
  double value_ = 0.0;
};

double accumulate(std::span<const double> values, double tau);

/// Time integrals entering the bound at the current time. A component that has
/// not been supplied makes total_bound throw.
struct AccumulatedTerms {
  std::optional<double> sigma_minus_dual_sq;  // int ||sigma^-||^2_{V*}
  std::optional<double> comp;                 // int |(sigma, w - chi)|
  std::optional<double> neg;                  // int sigma^- term
  std::optional<double> dual_energy;          // int ||sigma||_{V*} eta_V
  std::optional<double> time_residual_sq;     // int eta_dt^2
  std::optional<double> eta0_now;             // eta0 at the current time
};

struct InitialTerms {
  std::optional<double> initial_error;  // ||w_h(0) - w0||_L2
  std::optional<double> eta0_initial;
};

struct EstimatorBreakdown {
  std::vector<double> eta0_element_sq;
  std::vector<double> eta_dt_element_sq;
  double sigma_minus_dual_sq = 0.0;
  double comp = 0.0;
  double neg = 0.0;
  double dual_energy = 0.0;
  double time_residual_sq = 0.0;
  double eta0 = 0.0;
  double initial_error = 0.0;
  double eta0_initial = 0.0;
  bool high_degree = false;  // true: eta_dt is eta1; false: eta0 of the rates
  double total = 0.0;

  /// Recomputes the total from the stored addends.
  double recombine() const;
};

EstimatorBreakdown total_bound(const AccumulatedTerms& accumulated, const InitialTerms& initial,
                               int degree);

}  // namespace virecon
