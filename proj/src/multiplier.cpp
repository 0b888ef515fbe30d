#include "virecon/multiplier.hpp"

#include <algorithm>
#include <cmath>

#include "virecon/errors.hpp"

namespace virecon {

SigmaRecord compute_sigma(const SpaceOperators& ops, const FeFunction& w_curr,
                          const FeFunction& w_prev, double tau, const ScalarField& f, double t,
                          SigmaMode mode, std::optional<std::span<const double>> load) {
  if (!(tau > 0.0)) throw InvalidArgument("compute_sigma: tau must be positive");
  if (w_curr.space_ptr() != w_prev.space_ptr() || w_curr.space_ptr() != ops.space)
    throw InvalidArgument("compute_sigma: functions live on different spaces");
  const std::size_t n = ops.num_dofs();

  std::vector<double> wdot(n);
  for (std::size_t i = 0; i < n; ++i)
    wdot[i] = (w_curr.coefficients()[i] - w_prev.coefficients()[i]) / tau;

  std::vector<double> assembled;
  std::span<const double> fload;
  if (load) {
    if (load->size() != n) throw InvalidArgument("compute_sigma: load has the wrong length");
    fload = *load;
  } else {
    assembled = assemble_load(*ops.space, f, t);
    fload = assembled;
  }

  const auto mw = ops.mass * wdot;
  const auto kw = ops.stiffness * w_curr.coefficients();
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) r[i] = ops.free[i] ? mw[i] + kw[i] - fload[i] : 0.0;

  std::vector<double> sigma(n, 0.0);
  if (mode == SigmaMode::Lumped) {
    for (std::size_t i = 0; i < n; ++i) sigma[i] = ops.free[i] ? r[i] / ops.lumped_mass[i] : 0.0;
  } else {
    conjugate_gradient(ops.mass, r, sigma, 1e-13, ops.free);
  }

  std::vector<double> plus(n), minus(n);
  for (std::size_t i = 0; i < n; ++i) {
    plus[i] = std::max(sigma[i], 0.0);
    minus[i] = std::max(-sigma[i], 0.0);
  }
  return SigmaRecord{FeFunction(ops.space, std::move(sigma)), FeFunction(ops.space, std::move(plus)),
                     FeFunction(ops.space, std::move(minus)), FeFunction(ops.space, std::move(wdot)),
                     mode};
}

double dual_norm(const SpaceOperators& ops, const FeFunction& g) {
  std::vector<double> z;
  return dual_norm(ops, g, z);
}

double dual_norm(const SpaceOperators& ops, const FeFunction& g, std::vector<double>& z) {
  const std::size_t n = ops.num_dofs();
  if (z.size() != n) z.assign(n, 0.0);
  auto mg = ops.mass * g.coefficients();
  for (std::size_t i = 0; i < n; ++i)
    if (!ops.free[i]) mg[i] = 0.0;
  conjugate_gradient(ops.stiffness, mg, z, 1e-12, ops.free);
  return std::sqrt(std::max(0.0, dot(z, mg)));
}

double dual_norm(const FeFunction& g) { return dual_norm(SpaceOperators::build(g.space_ptr()), g); }

ReferenceReconstructor::ReferenceReconstructor(SpacePtr coarse, SpacePtr fine)
    : coarse_(std::move(coarse)), fine_(SpaceOperators::build(fine)) {
  if (fine->degree() != coarse_->degree())
    throw InvalidArgument("reconstruction space must share the coarse degree");
  if (fine->mesh().generations_below(coarse_->mesh()) <= 0)
    throw InvalidArgument("reconstruction space is not a refinement of the coarse space");
  prolongation_ = prolongation_matrix(*coarse_, *fine);
  coarse_free_.resize(coarse_->num_dofs());
  for (std::size_t i = 0; i < coarse_free_.size(); ++i)
    coarse_free_[i] = coarse_->is_boundary_dof(static_cast<int>(i)) ? 0 : 1;
}

std::vector<double> ReferenceReconstructor::coarse_load(const ScalarField& f, double t) const {
  const auto fine_load = assemble_load(*fine_.space, f, t);
  std::vector<double> out(coarse_->num_dofs());
  prolongation_.multiply_transpose(fine_load, out);
  return out;
}

FeFunction ReferenceReconstructor::reconstruct(const ReconstructionData& data) const {
  if (data.sigma.space_ptr() != coarse_ || data.wdot.space_ptr() != coarse_)
    throw InvalidArgument("reconstruction data does not live on the coarse space");
  const std::size_t n = fine_.num_dofs();
  std::vector<double> z(n);
  {
    const auto s = prolongation_ * data.sigma.coefficients();
    const auto d = prolongation_ * data.wdot.coefficients();
    for (std::size_t i = 0; i < n; ++i) z[i] = s[i] - d[i];
  }
  auto rhs = fine_.mass * z;
  const auto fl = assemble_load(*fine_.space, data.source, data.time);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = fine_.free[i] ? rhs[i] + fl[i] : 0.0;
  std::vector<double> w(n, 0.0);
  conjugate_gradient(fine_.stiffness, rhs, w, 1e-13, fine_.free);
  return FeFunction(fine_.space, std::move(w));
}

double ReferenceReconstructor::orthogonality_residual(const FeFunction& reconstruction,
                                                      const FeFunction& w_h) const {
  if (reconstruction.space_ptr() != fine_.space || w_h.space_ptr() != coarse_)
    throw InvalidArgument("orthogonality check: spaces do not match the reconstructor");
  const auto pw = prolongation_ * w_h.coefficients();
  std::vector<double> diff(fine_.num_dofs());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = reconstruction.coefficients()[i] - pw[i];
  const auto kd = fine_.stiffness * diff;
  std::vector<double> coarse(coarse_->num_dofs());
  prolongation_.multiply_transpose(kd, coarse);
  double worst = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i)
    if (coarse_free_[i]) worst = std::max(worst, std::abs(coarse[i]));
  return worst;
}

FeFunction reconstruct_reference(const SpacePtr& fine_space, const ReconstructionData& data) {
  return ReferenceReconstructor(data.sigma.space_ptr(), fine_space).reconstruct(data);
}

double check_orthogonality(const FeFunction& reconstruction, const FeFunction& w_h) {
  return ReferenceReconstructor(w_h.space_ptr(), reconstruction.space_ptr())
      .orthogonality_residual(reconstruction, w_h);
}

SpacePtr verification_space(const Space& coarse, int levels) {
  if (levels < 1) throw InvalidArgument("verification needs at least one refinement level");
  return build_space(refine_uniform(coarse.mesh_ptr(), levels), coarse.degree());
}

}  // namespace virecon
