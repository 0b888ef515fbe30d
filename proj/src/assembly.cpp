#include "virecon/assembly.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>

#include "virecon/errors.hpp"

namespace virecon {

namespace {

std::atomic<int> g_threads{1};

// Computes `per` numbers for every element in parallel. The buffer is laid
// out by element so the serial merge below visits contributions in the same
// order for any thread count.
template <class Kernel>
std::vector<double> element_buffers(int elements, std::size_t per, Kernel&& kernel) {
  std::vector<double> buf(static_cast<std::size_t>(elements) * per, 0.0);
  const int threads = num_threads();
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k < elements; ++k) {
    kernel(k, std::span<double>(buf.data() + static_cast<std::size_t>(k) * per, per));
  }
  return buf;
}

void local_stiffness(const Space& space, int k, std::span<double> out) {
  const int deg = space.degree();
  const int n = local_dof_count(deg);
  const auto g = element_geometry(space.mesh(), k);
  std::array<Point, 6> grad{};
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& q : triangle_rule()) {
    basis_gradients(deg, q.bary, g, grad);
    const double w = q.weight * g.area;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] += w * dot(grad[i], grad[j]);
  }
}

void local_mass(const Space& space, int k, std::span<double> out) {
  const int deg = space.degree();
  const int n = local_dof_count(deg);
  const double area = space.mesh().area(k);
  std::array<double, 6> phi{};
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& q : triangle_rule()) {
    basis_values(deg, q.bary, phi);
    const double w = q.weight * area;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] += w * phi[i] * phi[j];
  }
}

// Row sums for P1. P2 vertex functions integrate to zero, so P2 uses diagonal
// scaling that preserves the element mass instead.
void lump(int degree, int n, double area, std::span<const double> local, std::span<double> out) {
  if (degree == 1) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += local[i * n + j];
      out[i] = s;
    }
    return;
  }
  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += local[i * n + i];
  for (int i = 0; i < n; ++i) out[i] = local[i * n + i] * area / trace;
}

void local_load(const Space& space, const ScalarField& f, double t, int k, std::span<double> out) {
  const int deg = space.degree();
  const int n = local_dof_count(deg);
  const auto g = element_geometry(space.mesh(), k);
  std::array<double, 6> phi{};
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& q : triangle_rule()) {
    const Point x = g.map(q.bary);
    const double fx = f(x.x, x.y, t);
    if (!std::isfinite(fx)) throw NumericError("non-finite source value at a quadrature point");
    basis_values(deg, q.bary, phi);
    const double w = q.weight * g.area * fx;
    for (int i = 0; i < n; ++i) out[i] += w * phi[i];
  }
}

}  // namespace

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads; }

CsrMatrix sparsity_pattern(const Space& space) {
  const std::size_t ndof = space.num_dofs();
  std::vector<std::vector<int>> rows(ndof);
  const int nt = static_cast<int>(space.mesh().num_triangles());
  for (int k = 0; k < nt; ++k) {
    const auto dofs = space.element_dofs(k);
    for (int i : dofs)
      for (int j : dofs) rows[i].push_back(j);
  }
  std::vector<int> rp(ndof + 1, 0), cols;
  for (std::size_t i = 0; i < ndof; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    cols.insert(cols.end(), r.begin(), r.end());
    rp[i + 1] = static_cast<int>(cols.size());
  }
  return CsrMatrix(ndof, std::move(rp), std::move(cols));
}

namespace {

CsrMatrix merge_matrices(const Space& space, std::span<const double> buf) {
  CsrMatrix a = sparsity_pattern(space);
  const int n = space.dofs_per_element();
  const int nt = static_cast<int>(space.mesh().num_triangles());
  for (int k = 0; k < nt; ++k) {
    const auto dofs = space.element_dofs(k);
    const double* local = buf.data() + static_cast<std::size_t>(k) * n * n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a.add(dofs[i], dofs[j], local[i * n + j]);
  }
  return a;
}

}  // namespace

CsrMatrix assemble_stiffness(const Space& space) {
  const auto n = static_cast<std::size_t>(space.dofs_per_element());
  const auto buf = element_buffers(static_cast<int>(space.mesh().num_triangles()), n * n,
                                   [&](int k, std::span<double> out) { local_stiffness(space, k, out); });
  return merge_matrices(space, buf);
}

CsrMatrix assemble_mass(const Space& space, bool lumped) {
  const int n = space.dofs_per_element();
  const auto nn = static_cast<std::size_t>(n) * n;
  const int nt = static_cast<int>(space.mesh().num_triangles());
  if (!lumped) {
    const auto buf = element_buffers(nt, nn, [&](int k, std::span<double> out) { local_mass(space, k, out); });
    return merge_matrices(space, buf);
  }
  const auto buf = element_buffers(nt, static_cast<std::size_t>(n), [&](int k, std::span<double> out) {
    std::array<double, 36> local{};
    local_mass(space, k, std::span<double>(local.data(), nn));
    lump(space.degree(), n, space.mesh().area(k), std::span<const double>(local.data(), nn), out);
  });
  std::vector<double> diag(space.num_dofs(), 0.0);
  for (int k = 0; k < nt; ++k) {
    const auto dofs = space.element_dofs(k);
    for (int i = 0; i < n; ++i) diag[dofs[i]] += buf[static_cast<std::size_t>(k) * n + i];
  }
  return CsrMatrix::diagonal(diag);
}

std::vector<double> assemble_load(const Space& space, const ScalarField& f, double t) {
  const int n = space.dofs_per_element();
  const int nt = static_cast<int>(space.mesh().num_triangles());
  // Exceptions must not escape an OpenMP region; record and rethrow.
  std::atomic<bool> bad{false};
  const auto buf = element_buffers(nt, static_cast<std::size_t>(n), [&](int k, std::span<double> out) {
    try {
      local_load(space, f, t, k, out);
    } catch (const NumericError&) {
      bad = true;
    }
  });
  if (bad) throw NumericError("non-finite source value at a quadrature point");
  std::vector<double> b(space.num_dofs(), 0.0);
  for (int k = 0; k < nt; ++k) {
    const auto dofs = space.element_dofs(k);
    for (int i = 0; i < n; ++i) b[dofs[i]] += buf[static_cast<std::size_t>(k) * n + i];
  }
  return b;
}

namespace reference {

namespace {

CsrMatrix from_map(std::size_t ndof, const std::map<std::pair<int, int>, double>& entries) {
  std::vector<int> rp(ndof + 1, 0), cols;
  std::vector<double> vals;
  for (const auto& [ij, v] : entries) {
    rp[ij.first + 1]++;
    cols.push_back(ij.second);
    vals.push_back(v);
  }
  for (std::size_t i = 0; i < ndof; ++i) rp[i + 1] += rp[i];
  CsrMatrix a(ndof, std::move(rp), std::move(cols));
  std::copy(vals.begin(), vals.end(), a.values().begin());
  return a;
}

}  // namespace

CsrMatrix assemble_stiffness(const Space& space) {
  std::map<std::pair<int, int>, double> entries;
  const int deg = space.degree();
  const int n = space.dofs_per_element();
  std::array<Point, 6> grad{};
  for (int k = 0; k < static_cast<int>(space.mesh().num_triangles()); ++k) {
    const auto g = element_geometry(space.mesh(), k);
    const auto dofs = space.element_dofs(k);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (const auto& q : triangle_rule()) {
          basis_gradients(deg, q.bary, g, grad);
          s += q.weight * g.area * dot(grad[i], grad[j]);
        }
        entries[{dofs[i], dofs[j]}] += s;
      }
    }
  }
  return from_map(space.num_dofs(), entries);
}

CsrMatrix assemble_mass(const Space& space, bool lumped) {
  std::map<std::pair<int, int>, double> entries;
  const int deg = space.degree();
  const int n = space.dofs_per_element();
  std::array<double, 6> phi{};
  for (int k = 0; k < static_cast<int>(space.mesh().num_triangles()); ++k) {
    const double area = space.mesh().area(k);
    const auto dofs = space.element_dofs(k);
    std::array<double, 36> local{};
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (const auto& q : triangle_rule()) {
          basis_values(deg, q.bary, phi);
          local[i * n + j] += q.weight * area * phi[i] * phi[j];
        }
      }
    }
    if (lumped) {
      std::array<double, 6> d{};
      lump(deg, n, area, local, d);
      for (int i = 0; i < n; ++i) entries[{dofs[i], dofs[i]}] += d[i];
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) entries[{dofs[i], dofs[j]}] += local[i * n + j];
    }
  }
  return from_map(space.num_dofs(), entries);
}

std::vector<double> assemble_load(const Space& space, const ScalarField& f, double t) {
  std::vector<double> b(space.num_dofs(), 0.0);
  const int n = space.dofs_per_element();
  for (int k = 0; k < static_cast<int>(space.mesh().num_triangles()); ++k) {
    std::array<double, 6> local{};
    local_load(space, f, t, k, std::span<double>(local.data(), static_cast<std::size_t>(n)));
    const auto dofs = space.element_dofs(k);
    for (int i = 0; i < n; ++i) b[dofs[i]] += local[i];
  }
  return b;
}

}  // namespace reference

FeFunction interpolate(const SpacePtr& space, const ScalarField& g, double t) {
  std::vector<double> c(space->num_dofs());
  const auto coords = space->dof_coordinates();
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = g(coords[i].x, coords[i].y, t);
    if (!std::isfinite(c[i])) throw NumericError("non-finite value while interpolating");
  }
  return FeFunction(space, std::move(c));
}

CsrMatrix prolongation_matrix(const Space& coarse, const Space& fine) {
  if (coarse.degree() != fine.degree())
    throw InvalidArgument("prolongation needs spaces of the same degree");
  if (fine.mesh().generations_below(coarse.mesh()) < 0)
    throw InvalidArgument("fine mesh is not a refinement of the coarse mesh");
  const int deg = coarse.degree();
  const int n = local_dof_count(deg);
  const std::size_t nf = fine.num_dofs();
  std::vector<std::vector<std::pair<int, double>>> rows(nf);
  std::vector<char> done(nf, 0);
  const auto coords = fine.dof_coordinates();
  std::array<double, 6> phi{};
  for (int kf = 0; kf < static_cast<int>(fine.mesh().num_triangles()); ++kf) {
    const int kc = fine.mesh().ancestor_element(coarse.mesh(), kf);
    const auto g = element_geometry(coarse.mesh(), kc);
    const auto cdofs = coarse.element_dofs(kc);
    for (int j : fine.element_dofs(kf)) {
      if (done[j]) continue;
      done[j] = 1;
      basis_values(deg, g.barycentric(coords[j]), phi);
      for (int i = 0; i < n; ++i) {
        if (std::abs(phi[i]) > 1e-14) rows[j].push_back({cdofs[i], phi[i]});
      }
      std::sort(rows[j].begin(), rows[j].end());
    }
  }
  std::vector<int> rp(nf + 1, 0), cols;
  std::vector<double> vals;
  for (std::size_t j = 0; j < nf; ++j) {
    for (const auto& [c, v] : rows[j]) {
      cols.push_back(c);
      vals.push_back(v);
    }
    rp[j + 1] = static_cast<int>(cols.size());
  }
  // Rectangular: stored with n = fine dofs, columns index coarse dofs.
  CsrMatrix p(nf, std::move(rp), std::move(cols));
  std::copy(vals.begin(), vals.end(), p.values().begin());
  return p;
}

FeFunction prolong(const FeFunction& u, const SpacePtr& fine) {
  const CsrMatrix p = prolongation_matrix(u.space(), *fine);
  return FeFunction(fine, p * u.coefficients());
}

double norm(const FeFunction& u, NormKind which) {
  const CsrMatrix a =
      which == NormKind::L2 ? assemble_mass(u.space()) : assemble_stiffness(u.space());
  const auto au = a * u.coefficients();
  return std::sqrt(std::max(0.0, dot(u.coefficients(), au)));
}

double l2_error(const FeFunction& u, const ScalarField& g, double t) {
  const Space& space = u.space();
  double sum = 0.0;
  for (int k = 0; k < static_cast<int>(space.mesh().num_triangles()); ++k) {
    const auto geo = element_geometry(space.mesh(), k);
    for (const auto& q : triangle_rule()) {
      const Point x = geo.map(q.bary);
      const double d = u.value(k, q.bary) - g(x.x, x.y, t);
      sum += q.weight * geo.area * d * d;
    }
  }
  return std::sqrt(sum);
}

SpaceOperators SpaceOperators::build(SpacePtr space) {
  SpaceOperators ops;
  ops.stiffness = assemble_stiffness(*space);
  ops.mass = assemble_mass(*space);
  ops.lumped_mass = assemble_mass(*space, true).diagonal_values();
  ops.free.resize(space->num_dofs());
  for (std::size_t i = 0; i < ops.free.size(); ++i) ops.free[i] = space->is_boundary_dof(static_cast<int>(i)) ? 0 : 1;
  ops.space = std::move(space);
  return ops;
}

}  // namespace virecon
