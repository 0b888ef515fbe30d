#include "virecon/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "virecon/errors.hpp"

namespace virecon {

namespace {

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter++;
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double signed_area(Point a, Point b, Point c) { return 0.5 * cross(b - a, c - a); }

}  // namespace

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Rectangle::diameter() const { return std::hypot(x1 - x0, y1 - y0); }

bool Rectangle::on_boundary(Point p, double tol) const {
  const bool in_x = p.x >= x0 - tol && p.x <= x1 + tol;
  const bool in_y = p.y >= y0 - tol && p.y <= y1 + tol;
  if (!in_x || !in_y) return false;
  return std::abs(p.x - x0) <= tol || std::abs(p.x - x1) <= tol || std::abs(p.y - y0) <= tol ||
         std::abs(p.y - y1) <= tol;
}

Mesh Mesh::from_triangles(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
                          Rectangle domain) {
  Mesh m;
  m.domain_ = domain;
  m.vertices_ = std::move(vertices);
  m.triangles_ = std::move(triangles);
  const int nv = static_cast<int>(m.vertices_.size());
  for (auto& t : m.triangles_) {
    for (int v : t) {
      if (v < 0 || v >= nv) throw InvalidArgument("triangle references a missing vertex");
    }
    if (signed_area(m.vertices_[t[0]], m.vertices_[t[1]], m.vertices_[t[2]]) < 0.0)
      std::swap(t[1], t[2]);
    int longest = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
      const double len = distance(m.vertices_[t[(i + 1) % 3]], m.vertices_[t[(i + 2) % 3]]);
      if (len > best) {
        best = len;
        longest = i;
      }
    }
    std::rotate(t.begin(), t.begin() + longest, t.end());
  }
  m.parent_.assign(m.triangles_.size(), -1);
  m.id_ = next_mesh_id();
  m.build_topology();
  return m;
}

void Mesh::build_topology() {
  const std::size_t nt = triangles_.size();
  edges_.clear();
  edge_elements_.clear();
  triangle_edges_.assign(nt, {-1, -1, -1});
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(3 * nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& t = triangles_[k];
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3];
      const int b = t[(i + 2) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_elements_.push_back({static_cast<int>(k), -1});
      } else {
        auto& adj = edge_elements_[it->second];
        if (adj[1] >= 0) throw InvalidArgument("edge shared by more than two triangles");
        adj[1] = static_cast<int>(k);
      }
      triangle_edges_[k][i] = it->second;
    }
  }

  boundary_vertex_.assign(vertices_.size(), 0);
  h_edge_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    h_edge_[e] = distance(vertices_[edges_[e][0]], vertices_[edges_[e][1]]);
    if (edge_elements_[e][1] < 0) {
      boundary_vertex_[edges_[e][0]] = 1;
      boundary_vertex_[edges_[e][1]] = 1;
    }
  }
  h_element_.resize(nt);
  area_.resize(nt);
  for (std::size_t k = 0; k < nt; ++k) {
    const auto& te = triangle_edges_[k];
    h_element_[k] = std::max({h_edge_[te[0]], h_edge_[te[1]], h_edge_[te[2]]});
    const auto& t = triangles_[k];
    area_[k] = signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
  }
}

int Mesh::generations_below(const Mesh& ancestor) const {
  int depth = 0;
  for (const Mesh* m = this; m != nullptr; m = m->coarser_.get(), ++depth) {
    if (m->id_ == ancestor.id_) return depth;
  }
  return -1;
}

int Mesh::ancestor_element(const Mesh& ancestor, int k) const {
  const Mesh* m = this;
  while (m->id_ != ancestor.id_) {
    if (!m->coarser_) throw InvalidArgument("mesh is not a refinement of the given ancestor");
    k = m->parent_[k];
    m = m->coarser_.get();
  }
  return k;
}

std::string Mesh::check_invariants() const {
  std::ostringstream msg;
  const double scale = domain_.diameter();
  const double tol = 1e-12 * scale;
  double total_area = 0.0;
  for (std::size_t k = 0; k < triangles_.size(); ++k) {
    if (!(area_[k] > 0.0)) {
      msg << "triangle " << k << " has non-positive area " << area_[k];
      return msg.str();
    }
    total_area += area_[k];
    for (int i = 0; i < 3; ++i) {
      if (h_edge_[triangle_edges_[k][i]] > h_element_[k]) {
        msg << "edge longer than element diameter on triangle " << k;
        return msg.str();
      }
    }
  }
  if (std::abs(total_area - domain_.area()) > 1e-12 * domain_.area()) {
    msg << "triangle areas sum to " << total_area << ", domain area is " << domain_.area();
    return msg.str();
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& adj = edge_elements_[e];
    if (adj[0] < 0) {
      msg << "edge " << e << " has no adjacent triangle";
      return msg.str();
    }
    if (adj[1] < 0) {
      // A single-sided edge away from the boundary means a hanging vertex.
      const Point a = vertices_[edges_[e][0]];
      const Point b = vertices_[edges_[e][1]];
      if (!domain_.on_boundary(a, tol) || !domain_.on_boundary(b, tol) ||
          !domain_.on_boundary(0.5 * (a + b), tol)) {
        msg << "interior edge " << e << " has only one adjacent triangle";
        return msg.str();
      }
    }
  }
  return {};
}

Mesh build_structured_mesh(int n, Rectangle domain) {
  if (n < 1) throw InvalidArgument("structured mesh needs n >= 1");
  if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0))
    throw InvalidArgument("degenerate rectangle");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  const double dx = (domain.x1 - domain.x0) / n;
  const double dy = (domain.y1 - domain.y0) / n;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      // Pin the last row/column to the exact rectangle bounds.
      const double x = i == n ? domain.x1 : domain.x0 + i * dx;
      const double y = j == n ? domain.y1 : domain.y0 + j * dy;
      vertices.push_back({x, y});
    }
  }
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  auto index = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int ll = index(i, j), lr = index(i + 1, j);
      const int ul = index(i, j + 1), ur = index(i + 1, j + 1);
      triangles.push_back({ll, lr, ur});
      triangles.push_back({ll, ur, ul});
    }
  }
  return Mesh::from_triangles(std::move(vertices), std::move(triangles), domain);
}

namespace {

struct PendingTriangle {
  std::array<int, 3> v;
  // Coarse edge id opposite each local vertex, -1 for edges created by bisection.
  std::array<int, 3> e;
  int root;
};

}  // namespace

Mesh refine_impl(const MeshPtr& mesh, std::span<const int> marked, bool all) {
  if (!mesh) throw InvalidArgument("refine: null mesh");
  const Mesh& coarse = *mesh;
  const int nt = static_cast<int>(coarse.num_triangles());
  const int ne = static_cast<int>(coarse.num_edges());

  std::vector<char> edge_marked(ne, 0);
  if (all) {
    for (int k = 0; k < nt; ++k) edge_marked[coarse.triangle_edges_[k][0]] = 1;
  } else {
    for (int k : marked) {
      if (k < 0 || k >= nt) throw InvalidArgument("refine: element id out of range");
      edge_marked[coarse.triangle_edges_[k][0]] = 1;
    }
  }

  // Closure: an element with any marked edge must bisect its refinement edge first.
  for (bool changed = true; changed;) {
    changed = false;
    for (int k = 0; k < nt; ++k) {
      const auto& te = coarse.triangle_edges_[k];
      if (!edge_marked[te[0]] && (edge_marked[te[1]] || edge_marked[te[2]])) {
        edge_marked[te[0]] = 1;
        changed = true;
      }
    }
  }

  Mesh fine;
  fine.domain_ = coarse.domain_;
  fine.vertices_.assign(coarse.vertices_.begin(), coarse.vertices_.end());
  std::vector<int> midpoint(ne, -1);
  for (int e = 0; e < ne; ++e) {
    if (!edge_marked[e]) continue;
    const auto& ed = coarse.edges_[e];
    midpoint[e] = static_cast<int>(fine.vertices_.size());
    fine.vertices_.push_back(0.5 * (coarse.vertices_[ed[0]] + coarse.vertices_[ed[1]]));
  }

  fine.triangles_.reserve(static_cast<std::size_t>(nt) * 2);
  fine.parent_.reserve(static_cast<std::size_t>(nt) * 2);
  std::vector<PendingTriangle> stack;
  for (int k = 0; k < nt; ++k) {
    stack.push_back({coarse.triangles_[k], coarse.triangle_edges_[k], k});
    while (!stack.empty()) {
      const PendingTriangle t = stack.back();
      stack.pop_back();
      const int refinement_edge = t.e[0];
      if (refinement_edge < 0 || !edge_marked[refinement_edge]) {
        fine.triangles_.push_back(t.v);
        fine.parent_.push_back(t.root);
        continue;
      }
      const int p = midpoint[refinement_edge];
      const auto [v0, v1, v2] = t.v;
      // Pushed in reverse so the (p, v0, v1) child is emitted first.
      stack.push_back({{p, v2, v0}, {t.e[1], -1, -1}, t.root});
      stack.push_back({{p, v0, v1}, {t.e[2], -1, -1}, t.root});
    }
  }
  fine.coarser_ = mesh;
  fine.id_ = next_mesh_id();
  fine.build_topology();
  return fine;
}

Mesh refine(const MeshPtr& mesh, std::span<const int> marked) {
  return refine_impl(mesh, marked, false);
}

Mesh refine_all(const MeshPtr& mesh) { return refine_impl(mesh, {}, true); }

MeshPtr refine_uniform(const MeshPtr& mesh, int levels) {
  MeshPtr current = mesh;
  for (int l = 0; l < levels; ++l) {
    current = std::make_shared<const Mesh>(refine_all(current));
    current = std::make_shared<const Mesh>(refine_all(current));
  }
  return current;
}

MeshMetrics mesh_metrics(const Mesh& mesh) {
  MeshMetrics m;
  m.h_element.assign(mesh.element_sizes().begin(), mesh.element_sizes().end());
  m.h_edge.assign(mesh.edge_sizes().begin(), mesh.edge_sizes().end());
  if (!m.h_element.empty()) {
    const auto [lo, hi] = std::minmax_element(m.h_element.begin(), m.h_element.end());
    m.min_h = *lo;
    m.max_h = *hi;
  }
  return m;
}

}  // namespace virecon
