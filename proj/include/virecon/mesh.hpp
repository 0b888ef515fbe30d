#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace virecon {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double distance(Point a, Point b);

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rectangle {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double area() const { return (x1 - x0) * (y1 - y0); }
  double diameter() const;
  bool on_boundary(Point p, double tol) const;
};

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

/// Conforming triangulation of a rectangle.
///
/// Triangles are stored counterclockwise as (newest, a, b); the edge a-b is the
/// refinement edge used by newest-vertex bisection. Local edge i of a triangle
/// is the edge opposite local vertex i. Boundary edges have a single adjacent
/// element, recorded with -1 in the second slot of edge_elements().
///
/// A mesh produced by refine() remembers the mesh it was refined from and, for
/// every element, the index of the coarse element that contains it. This is
/// what nested prolongation walks.
class Mesh {
 public:
  /// Builds topology from raw triangles. Orientation is normalised to
  /// counterclockwise and the refinement edge of every triangle is set to its
  /// longest edge (ties broken by lowest local index).
  static Mesh from_triangles(std::vector<Point> vertices,
                             std::vector<std::array<int, 3>> triangles,
                             Rectangle domain);

  const Rectangle& domain() const { return domain_; }
  std::span<const Point> vertices() const { return vertices_; }
  std::span<const std::array<int, 3>> triangles() const { return triangles_; }
  std::span<const std::array<int, 2>> edges() const { return edges_; }
  std::span<const std::array<int, 3>> triangle_edges() const { return triangle_edges_; }
  std::span<const std::array<int, 2>> edge_elements() const { return edge_elements_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
  bool is_boundary_edge(int e) const { return edge_elements_[e][1] < 0; }

  /// Element diameter (longest edge).
  double h_element(int k) const { return h_element_[k]; }
  double h_edge(int e) const { return h_edge_[e]; }
  double area(int k) const { return area_[k]; }
  std::span<const double> element_sizes() const { return h_element_; }
  std::span<const double> edge_sizes() const { return h_edge_; }

  /// Unique identity used to test refinement ancestry.
  std::uint64_t id() const { return id_; }
  /// Mesh this one was refined from, or null for a root mesh.
  const MeshPtr& coarser() const { return coarser_; }
  /// Index in coarser() of the element containing element k.
  int parent(int k) const { return parent_[k]; }

  /// Index of `ancestor` in the refinement chain (0 = this mesh, 1 = coarser(), ...)
  /// or -1 when `ancestor` is not an ancestor of this mesh.
  int generations_below(const Mesh& ancestor) const;
  /// Element of `ancestor` containing element k. Requires generations_below >= 0.
  int ancestor_element(const Mesh& ancestor, int k) const;

  /// Returns an empty string when all structural invariants hold, otherwise a
  /// description of the first violation found.
  std::string check_invariants() const;

 private:
  friend Mesh refine_impl(const MeshPtr&, std::span<const int>, bool);
  Mesh() = default;
  void build_topology();

  Rectangle domain_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::array<int, 2>> edge_elements_;
  std::vector<char> boundary_vertex_;
  std::vector<double> h_element_, h_edge_, area_;
  std::vector<int> parent_;
  MeshPtr coarser_;
  std::uint64_t id_ = 0;
};

/// n x n grid of rectangles, each split along the diagonal from its
/// lower-left to its upper-right corner.
Mesh build_structured_mesh(int n, Rectangle domain = {});

/// Newest-vertex bisection of the marked elements plus the closure needed to
/// keep the mesh conforming. Every marked element is bisected at least once.
Mesh refine(const MeshPtr& mesh, std::span<const int> marked);
/// One bisection pass over every element.
Mesh refine_all(const MeshPtr& mesh);
/// Two bisection passes: halves every element diameter.
MeshPtr refine_uniform(const MeshPtr& mesh, int levels = 1);

struct MeshMetrics {
  std::vector<double> h_element;
  std::vector<double> h_edge;
  double max_h = 0.0;
  double min_h = 0.0;
};

MeshMetrics mesh_metrics(const Mesh& mesh);

}  // namespace virecon
