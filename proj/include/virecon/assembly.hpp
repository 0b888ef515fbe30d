#pragma once

#include <span>
#include <vector>

#include "virecon/sparse.hpp"
#include "virecon/space.hpp"

namespace virecon {

/// Thread cap for the element kernels. Defaults to 1. Results do not depend on
/// the thread count: local contributions are computed in parallel and merged
/// serially in element order.
void set_num_threads(int n);
int num_threads();

/// Sparsity pattern of the dof-to-dof coupling of a space (sorted rows).
CsrMatrix sparsity_pattern(const Space& space);

/// Stiffness matrix a(phi_j, phi_i) = int grad phi_j . grad phi_i, no
/// boundary conditions applied.
CsrMatrix assemble_stiffness(const Space& space);
/// Consistent mass matrix, or its row-sum lumped diagonal when `lumped`.
CsrMatrix assemble_mass(const Space& space, bool lumped = false);
/// Load vector int f(., t) phi_i with the 6-point rule. Throws NumericError on
/// a non-finite sample of f.
std::vector<double> assemble_load(const Space& space, const ScalarField& f, double t);

/// Single-threaded reference kernels with a different accumulation path
/// (per-entry map). Kept for cross-checking the production kernels.
namespace reference {
CsrMatrix assemble_stiffness(const Space& space);
CsrMatrix assemble_mass(const Space& space, bool lumped = false);
std::vector<double> assemble_load(const Space& space, const ScalarField& f, double t);
}  // namespace reference

/// Nodal interpolant. Throws NumericError on a non-finite sample.
FeFunction interpolate(const SpacePtr& space, const ScalarField& g, double t);

/// Sparse matrix P with P_ji = phi^coarse_i(x^fine_j). The fine mesh must be a
/// refinement descendant of the coarse mesh and both spaces must share the degree.
CsrMatrix prolongation_matrix(const Space& coarse, const Space& fine);
FeFunction prolong(const FeFunction& u, const SpacePtr& fine);

enum class NormKind { L2, H1Semi };
double norm(const FeFunction& u, NormKind which);
/// L2 distance between u and an analytic field, by element quadrature.
double l2_error(const FeFunction& u, const ScalarField& g, double t);

/// Operators of a space reused across a time loop. `free` flags the
/// non-Dirichlet dofs.
struct SpaceOperators {
  SpacePtr space;
  CsrMatrix stiffness;
  CsrMatrix mass;
  std::vector<double> lumped_mass;
  std::vector<char> free;

  static SpaceOperators build(SpacePtr space);
  std::size_t num_dofs() const { return lumped_mass.size(); }
};

}  // namespace virecon
