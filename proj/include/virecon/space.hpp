#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "virecon/mesh.hpp"

namespace virecon {

/// Scalar field f(x, y, t).
using ScalarField = std::function<double(double, double, double)>;

using Barycentric = std::array<double, 3>;

struct QuadPoint {
  Barycentric bary;
  double weight;  // weights sum to 1; multiply by the element area
};

/// Symmetric 6-point rule, exact for polynomials of degree 4.
std::span<const QuadPoint> triangle_rule();

struct EdgeQuadPoint {
  double s;       // position along the edge in [0, 1]
  double weight;  // weights sum to 1; multiply by the edge length
};

/// 3-point Gauss-Legendre rule on a segment (degree 5).
std::span<const EdgeQuadPoint> edge_rule();

/// Affine data of one triangle. Barycentric gradients are constant.
struct ElementGeometry {
  std::array<Point, 3> vertex;
  double area = 0.0;
  std::array<Point, 3> grad_lambda;

  Point map(const Barycentric& b) const {
    return b[0] * vertex[0] + b[1] * vertex[1] + b[2] * vertex[2];
  }
  Barycentric barycentric(Point p) const;
};

ElementGeometry element_geometry(const Mesh& mesh, int k);

/// Local Lagrange basis on one triangle. Degree 1 has the three vertex
/// functions. Degree 2 appends three edge functions, local edge i being the
/// edge opposite local vertex i.
int local_dof_count(int degree);
void basis_values(int degree, const Barycentric& b, std::span<double> out);
void basis_gradients(int degree, const Barycentric& b, const ElementGeometry& g,
                     std::span<Point> out);
/// Laplacians are constant per element for degree <= 2.
void basis_laplacians(int degree, const ElementGeometry& g, std::span<double> out);

/// Continuous piecewise-polynomial Lagrange space of degree 1 or 2.
///
/// Dof numbering: mesh vertices first, then (degree 2) one dof per mesh edge
/// located at the edge midpoint.
class Space {
 public:
  Space(MeshPtr mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  std::size_t num_dofs() const { return coords_.size(); }
  int dofs_per_element() const { return local_dof_count(degree_); }

  std::span<const int> element_dofs(int k) const {
    const auto n = static_cast<std::size_t>(dofs_per_element());
    return {element_dofs_.data() + static_cast<std::size_t>(k) * n, n};
  }
  std::span<const Point> dof_coordinates() const { return coords_; }
  bool is_boundary_dof(int i) const { return boundary_[i] != 0; }
  std::span<const char> boundary_mask() const { return boundary_; }
  std::span<const int> boundary_dofs() const { return boundary_dofs_; }

 private:
  MeshPtr mesh_;
  int degree_;
  std::vector<int> element_dofs_;
  std::vector<Point> coords_;
  std::vector<char> boundary_;
  std::vector<int> boundary_dofs_;
};

using SpacePtr = std::shared_ptr<const Space>;

SpacePtr build_space(MeshPtr mesh, int degree);

/// Coefficient vector over the dofs of a space.
class FeFunction {
 public:
  explicit FeFunction(SpacePtr space);
  FeFunction(SpacePtr space, std::vector<double> coefficients);

  const Space& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  std::span<const double> coefficients() const { return coeffs_; }
  std::span<double> coefficients() { return coeffs_; }
  const std::vector<double>& vector() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  double value(int element, const Barycentric& b) const;
  Point gradient(int element, const Barycentric& b) const;
  double laplacian(int element) const;

 private:
  SpacePtr space_;
  std::vector<double> coeffs_;
};

}  // namespace virecon
