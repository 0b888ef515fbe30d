#include "virecon/space.hpp"

#include <cmath>

#include "virecon/errors.hpp"

namespace virecon {

namespace {

constexpr double kA1 = 0.44594849091596488632;
constexpr double kA2 = 0.09157621350977074346;
constexpr double kW1 = 0.22338158967801146570;
constexpr double kW2 = 0.10995174365532186764;

constexpr std::array<QuadPoint, 6> kTriangleRule{{
    {{1.0 - 2.0 * kA1, kA1, kA1}, kW1},
    {{kA1, 1.0 - 2.0 * kA1, kA1}, kW1},
    {{kA1, kA1, 1.0 - 2.0 * kA1}, kW1},
    {{1.0 - 2.0 * kA2, kA2, kA2}, kW2},
    {{kA2, 1.0 - 2.0 * kA2, kA2}, kW2},
    {{kA2, kA2, 1.0 - 2.0 * kA2}, kW2},
}};

const std::array<EdgeQuadPoint, 3> kEdgeRule{{
    {0.5 - 0.5 * std::sqrt(0.6), 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 + 0.5 * std::sqrt(0.6), 5.0 / 18.0},
}};

}  // namespace

std::span<const QuadPoint> triangle_rule() { return kTriangleRule; }
std::span<const EdgeQuadPoint> edge_rule() { return kEdgeRule; }

Barycentric ElementGeometry::barycentric(Point p) const {
  Barycentric b;
  for (int i = 0; i < 3; ++i) b[i] = dot(grad_lambda[i], p - vertex[(i + 1) % 3]);
  // lambda_i vanishes on the opposite edge, so the affine formula above is exact.
  return b;
}

ElementGeometry element_geometry(const Mesh& mesh, int k) {
  ElementGeometry g;
  const auto& tri = mesh.triangles()[k];
  for (int i = 0; i < 3; ++i) g.vertex[i] = mesh.vertices()[tri[i]];
  g.area = mesh.area(k);
  const double twice_area = 2.0 * g.area;
  for (int i = 0; i < 3; ++i) {
    const Point a = g.vertex[(i + 1) % 3];
    const Point b = g.vertex[(i + 2) % 3];
    // Inward normal of the opposite edge scaled by 1/height.
    g.grad_lambda[i] = {-(b.y - a.y) / twice_area, (b.x - a.x) / twice_area};
  }
  return g;
}

int local_dof_count(int degree) { return degree == 1 ? 3 : 6; }

void basis_values(int degree, const Barycentric& b, std::span<double> out) {
  if (degree == 1) {
    out[0] = b[0];
    out[1] = b[1];
    out[2] = b[2];
    return;
  }
  for (int i = 0; i < 3; ++i) {
    out[i] = b[i] * (2.0 * b[i] - 1.0);
    out[3 + i] = 4.0 * b[(i + 1) % 3] * b[(i + 2) % 3];
  }
}

void basis_gradients(int degree, const Barycentric& b, const ElementGeometry& g,
                     std::span<Point> out) {
  if (degree == 1) {
    for (int i = 0; i < 3; ++i) out[i] = g.grad_lambda[i];
    return;
  }
  for (int i = 0; i < 3; ++i) {
    const int p = (i + 1) % 3, q = (i + 2) % 3;
    out[i] = (4.0 * b[i] - 1.0) * g.grad_lambda[i];
    out[3 + i] = 4.0 * (b[p] * g.grad_lambda[q] + b[q] * g.grad_lambda[p]);
  }
}

void basis_laplacians(int degree, const ElementGeometry& g, std::span<double> out) {
  if (degree == 1) {
    out[0] = out[1] = out[2] = 0.0;
    return;
  }
  for (int i = 0; i < 3; ++i) {
    const int p = (i + 1) % 3, q = (i + 2) % 3;
    out[i] = 4.0 * dot(g.grad_lambda[i], g.grad_lambda[i]);
    out[3 + i] = 8.0 * dot(g.grad_lambda[p], g.grad_lambda[q]);
  }
}

Space::Space(MeshPtr mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
  if (!mesh_) throw InvalidArgument("space needs a mesh");
  if (degree != 1 && degree != 2) throw InvalidArgument("only degrees 1 and 2 are supported");
  const Mesh& m = *mesh_;
  const int nv = static_cast<int>(m.num_vertices());
  const int nt = static_cast<int>(m.num_triangles());
  const int per = local_dof_count(degree);

  coords_.assign(m.vertices().begin(), m.vertices().end());
  boundary_.assign(m.num_vertices(), 0);
  for (int v = 0; v < nv; ++v) boundary_[v] = m.is_boundary_vertex(v) ? 1 : 0;
  if (degree == 2) {
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
      const auto& ed = m.edges()[e];
      coords_.push_back(0.5 * (m.vertices()[ed[0]] + m.vertices()[ed[1]]));
      boundary_.push_back(m.is_boundary_edge(static_cast<int>(e)) ? 1 : 0);
    }
  }

  element_dofs_.resize(static_cast<std::size_t>(nt) * per);
  for (int k = 0; k < nt; ++k) {
    int* dofs = element_dofs_.data() + static_cast<std::size_t>(k) * per;
    for (int i = 0; i < 3; ++i) dofs[i] = m.triangles()[k][i];
    if (degree == 2) {
      for (int i = 0; i < 3; ++i) dofs[3 + i] = nv + m.triangle_edges()[k][i];
    }
  }
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    if (boundary_[i]) boundary_dofs_.push_back(static_cast<int>(i));
  }
}

SpacePtr build_space(MeshPtr mesh, int degree) {
  return std::make_shared<const Space>(std::move(mesh), degree);
}

FeFunction::FeFunction(SpacePtr space) : space_(std::move(space)) {
  if (!space_) throw InvalidArgument("function needs a space");
  coeffs_.assign(space_->num_dofs(), 0.0);
}

FeFunction::FeFunction(SpacePtr space, std::vector<double> coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients)) {
  if (!space_) throw InvalidArgument("function needs a space");
  if (coeffs_.size() != space_->num_dofs())
    throw InvalidArgument("coefficient vector length does not match the space");
}

double FeFunction::value(int element, const Barycentric& b) const {
  const int deg = space_->degree();
  std::array<double, 6> phi{};
  basis_values(deg, b, phi);
  const auto dofs = space_->element_dofs(element);
  double v = 0.0;
  for (std::size_t i = 0; i < dofs.size(); ++i) v += coeffs_[dofs[i]] * phi[i];
  return v;
}

Point FeFunction::gradient(int element, const Barycentric& b) const {
  const int deg = space_->degree();
  const auto g = element_geometry(space_->mesh(), element);
  std::array<Point, 6> grad{};
  basis_gradients(deg, b, g, grad);
  const auto dofs = space_->element_dofs(element);
  Point v;
  for (std::size_t i = 0; i < dofs.size(); ++i) v = v + coeffs_[dofs[i]] * grad[i];
  return v;
}

double FeFunction::laplacian(int element) const {
  const int deg = space_->degree();
  if (deg == 1) return 0.0;
  const auto g = element_geometry(space_->mesh(), element);
  std::array<double, 6> lap{};
  basis_laplacians(deg, g, lap);
  const auto dofs = space_->element_dofs(element);
  double v = 0.0;
  for (std::size_t i = 0; i < dofs.size(); ++i) v += coeffs_[dofs[i]] * lap[i];
  return v;
}

}  // namespace virecon
