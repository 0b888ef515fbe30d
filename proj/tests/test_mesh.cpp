#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "virecon/mesh.hpp"

using namespace virecon;

namespace {

MeshPtr share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

double total_area(const Mesh& m) {
  double s = 0.0;
  for (std::size_t k = 0; k < m.num_triangles(); ++k) s += m.area(static_cast<int>(k));
  return s;
}

// Independent conformity check: every undirected edge is used by at most two
// triangles, and an edge used once lies on the boundary of the domain.
// A hanging node shows up as a once-used interior edge.
bool conforming(const Mesh& m) {
  std::map<std::pair<int, int>, int> uses;
  for (const auto& t : m.triangles()) {
    for (int i = 0; i < 3; ++i) {
      int a = t[i], b = t[(i + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  }
  const auto& d = m.domain();
  for (const auto& [e, n] : uses) {
    if (n > 2) return false;
    if (n == 1) {
      const Point p = m.vertices()[e.first], q = m.vertices()[e.second];
      const bool vertical = (p.x == d.x0 && q.x == d.x0) || (p.x == d.x1 && q.x == d.x1);
      const bool horizontal = (p.y == d.y0 && q.y == d.y0) || (p.y == d.y1 && q.y == d.y1);
      if (!vertical && !horizontal) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("structured mesh counts") {
  const Mesh m1 = build_structured_mesh(1);
  CHECK(m1.num_triangles() == 2);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.num_edges() == 5);
  int interior = 0;
  for (std::size_t e = 0; e < m1.num_edges(); ++e) interior += m1.is_boundary_edge(static_cast<int>(e)) ? 0 : 1;
  CHECK(interior == 1);

  for (int n : {2, 3, 5}) {
    const Mesh m = build_structured_mesh(n);
    // horizontal + vertical grid lines plus one diagonal per cell
    const std::size_t edges = 2 * n * (n + 1) + n * n;
    CHECK(m.num_triangles() == static_cast<std::size_t>(2 * n * n));
    CHECK(m.num_vertices() == static_cast<std::size_t>((n + 1) * (n + 1)));
    CHECK(m.num_edges() == edges);
    CHECK(m.check_invariants().empty());
  }
}

TEST_CASE("structured mesh on a rectangle") {
  const Mesh m = build_structured_mesh(1, Rectangle{0.0, 0.0, 2.0, 1.0});
  double longest = 0.0;
  for (std::size_t e = 0; e < m.num_edges(); ++e) longest = std::max(longest, m.h_edge(static_cast<int>(e)));
  CHECK(longest == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(total_area(m) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("invalid structured mesh arguments") {
  CHECK_THROWS_AS(build_structured_mesh(0), std::invalid_argument);
  CHECK_THROWS_AS(build_structured_mesh(2, Rectangle{0.0, 0.0, 0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("from_triangles normalises orientation") {
  const Mesh m = Mesh::from_triangles({{0, 0}, {1, 0}, {0, 1}}, {{{0, 2, 1}}}, Rectangle{0, 0, 1, 1});
  CHECK(m.area(0) == doctest::Approx(0.5));
  CHECK(m.h_element(0) == doctest::Approx(std::sqrt(2.0)));
  const auto t = m.triangles()[0];
  const Point a = m.vertices()[t[0]], b = m.vertices()[t[1]], c = m.vertices()[t[2]];
  CHECK((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) > 0.0);
  // refinement edge (local edge 0) is the hypotenuse
  CHECK(std::hypot(b.x - c.x, b.y - c.y) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("mesh metrics") {
  const auto m = build_structured_mesh(2);
  const auto metrics = mesh_metrics(m);
  CHECK(metrics.max_h == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-15));
  for (std::size_t k = 0; k < m.num_triangles(); ++k) {
    for (int e : m.triangle_edges()[k]) CHECK(m.h_edge(e) <= m.h_element(static_cast<int>(k)) + 1e-15);
  }
}

TEST_CASE("refine all and uniform") {
  const auto coarse = share(build_structured_mesh(1));
  const auto once = refine_all(coarse);
  CHECK(once.num_triangles() >= 4);
  CHECK(conforming(once));
  CHECK(mesh_metrics(once).max_h < mesh_metrics(*coarse).max_h);

  for (int n : {1, 2, 3}) {
    const auto base = share(build_structured_mesh(n));
    const auto fine = refine_uniform(base);
    CHECK(mesh_metrics(*fine).max_h <= 0.5 * mesh_metrics(*base).max_h + 1e-15);
    CHECK(fine->generations_below(*base) > 0);
    CHECK(fine->check_invariants().empty());
  }
}

TEST_CASE("refine with empty marks is a no-op") {
  const auto m = share(build_structured_mesh(3));
  const Mesh r = refine(m, {});
  CHECK(r.num_triangles() == m->num_triangles());
  CHECK(r.num_vertices() == m->num_vertices());
  for (std::size_t k = 0; k < r.num_triangles(); ++k) CHECK(r.triangles()[k] == m->triangles()[k]);
}

TEST_CASE("refining one element keeps the mesh conforming") {
  const auto m = share(build_structured_mesh(2));
  const std::vector<int> marked{3};
  const Mesh r = refine(m, marked);
  CHECK(conforming(r));
  CHECK(r.check_invariants().empty());
  CHECK(r.num_triangles() > m->num_triangles());
  // the marked element is split: none of its fine descendants has its area
  for (std::size_t k = 0; k < r.num_triangles(); ++k) {
    if (r.ancestor_element(*m, static_cast<int>(k)) == 3) CHECK(r.area(static_cast<int>(k)) < m->area(3));
  }
}

TEST_CASE("random refinement sequences stay conforming") {
  std::mt19937 rng(20240611);
  for (int seq = 0; seq < 100; ++seq) {
    auto mesh = share(build_structured_mesh(1 + seq % 3, seq % 2 ? Rectangle{-1, -1, 1, 1} : Rectangle{}));
    const double domain_area = mesh->domain().area();
    const int steps = 1 + seq % 4;
    for (int s = 0; s < steps; ++s) {
      std::vector<int> marks;
      std::bernoulli_distribution pick(0.25);
      for (std::size_t k = 0; k < mesh->num_triangles(); ++k)
        if (pick(rng)) marks.push_back(static_cast<int>(k));
      const auto prev = mesh;
      mesh = share(refine(prev, marks));
      REQUIRE(conforming(*mesh));
      REQUIRE(mesh->check_invariants().empty());
      CHECK(std::abs(total_area(*mesh) - domain_area) <= 1e-12 * domain_area);
      // coarse vertices persist at the same indices
      for (std::size_t v = 0; v < prev->num_vertices(); ++v) {
        CHECK(mesh->vertices()[v].x == prev->vertices()[v].x);
        CHECK(mesh->vertices()[v].y == prev->vertices()[v].y);
      }
      for (int k : marks) {
        for (std::size_t f = 0; f < mesh->num_triangles(); ++f) {
          if (mesh->parent(static_cast<int>(f)) == k) CHECK(mesh->area(static_cast<int>(f)) < prev->area(k));
        }
      }
    }
  }
}

TEST_CASE("invariant checker detects a hanging node") {
  // Two triangles on the left half, the right half split at (1, 0.5) only on one side.
  std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0}, {2, 1}, {1, 0.5}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {0, 2, 3}, {1, 4, 6}, {6, 4, 5}, {6, 5, 2}};
  const Mesh m = Mesh::from_triangles(v, t, Rectangle{0, 0, 2, 1});
  CHECK_FALSE(m.check_invariants().empty());
  CHECK_FALSE(conforming(m));
}
