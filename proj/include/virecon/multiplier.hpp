#pragma once

#include <optional>
#include <span>
#include <vector>

#include "virecon/assembly.hpp"

namespace virecon {

enum class SigmaMode { Lumped, Consistent };

/// Discrete multiplier sigma_h, defined by testing the discrete residual
///   (sigma_h, v) = (w_t, v) + a(w, v) - (f, v)   for all v in V_h (zero on the boundary)
/// with a lumped or consistent mass on the left. Boundary coefficients are zero.
struct SigmaRecord {
  FeFunction sigma;
  FeFunction sigma_plus;
  FeFunction sigma_minus;
  FeFunction wdot;  // backward difference used as w_t
  SigmaMode mode;
};

/// `load` overrides the assembled (f(t), phi_i) when given; verification runs
/// pass a load integrated on a finer mesh so that the reconstruction and the
/// multiplier see the same source functional.
SigmaRecord compute_sigma(const SpaceOperators& ops, const FeFunction& w_curr,
                          const FeFunction& w_prev, double tau, const ScalarField& f, double t,
                          SigmaMode mode, std::optional<std::span<const double>> load = {});

/// Discrete H^{-1} norm: solves K z = M g on the free dofs and returns
/// sqrt(z^T M g).
double dual_norm(const SpaceOperators& ops, const FeFunction& g);
/// Same, with `z` used as the initial guess and overwritten by the solution.
double dual_norm(const SpaceOperators& ops, const FeFunction& g, std::vector<double>& z);
double dual_norm(const FeFunction& g);

/// Ingredients of the reconstruction right-hand side
///   v -> (f(t), v) + (sigma_h, v) - (w_t, v).
struct ReconstructionData {
  ScalarField source;
  FeFunction sigma;
  FeFunction wdot;
  double time = 0.0;
};

/// Elliptic reconstruction computed on a nested fine space, with the
/// orthogonality check against the coarse solution.
class ReferenceReconstructor {
 public:
  /// `fine` must refine the coarse space's mesh and share its degree.
  ReferenceReconstructor(SpacePtr coarse, SpacePtr fine);

  const SpaceOperators& fine_operators() const { return fine_; }
  const CsrMatrix& prolongation() const { return prolongation_; }

  /// (f(t), phi_i) for coarse basis functions, integrated on the fine mesh.
  std::vector<double> coarse_load(const ScalarField& f, double t) const;

  /// Solves (grad W, grad v) = <z_h, v> for all fine v vanishing on the boundary.
  FeFunction reconstruct(const ReconstructionData& data) const;

  /// max_i |a(W - w_h, phi_i)| over coarse basis functions of free dofs.
  double orthogonality_residual(const FeFunction& reconstruction, const FeFunction& w_h) const;

 private:
  SpacePtr coarse_;
  SpaceOperators fine_;
  CsrMatrix prolongation_;
  std::vector<char> coarse_free_;
};

FeFunction reconstruct_reference(const SpacePtr& fine_space, const ReconstructionData& data);
double check_orthogonality(const FeFunction& reconstruction, const FeFunction& w_h);

/// Fine space for verification runs: `levels` uniform halvings of the mesh.
SpacePtr verification_space(const Space& coarse, int levels);

}  // namespace virecon
