#include <cmath>
#include <random>

#include "doctest.h"
#include "virecon/assembly.hpp"
#include "virecon/errors.hpp"

using namespace virecon;

namespace {

using Dense = std::vector<std::vector<double>>;

MeshPtr share(Mesh m) { return std::make_shared<const Mesh>(std::move(m)); }

SpacePtr unit_space(int n, int k) { return build_space(share(build_structured_mesh(n)), k); }

SpacePtr single_triangle() {
  return build_space(share(Mesh::from_triangles({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}},
                                                Rectangle{0, 0, 1, 1})),
                     1);
}

Dense to_dense(const CsrMatrix& a) {
  Dense d(a.size(), std::vector<double>(a.size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int p = a.row_ptr()[i]; p < a.row_ptr()[i + 1]; ++p) d[i][a.cols()[p]] = a.values()[p];
  return d;
}

// P1 stiffness assembled densely from the explicit formula
// K_ij = (b_i b_j + c_i c_j) / (4|T|) with b, c from vertex coordinate differences.
Dense p1_stiffness_oracle(const Mesh& m) {
  const std::size_t n = m.num_vertices();
  Dense d(n, std::vector<double>(n, 0.0));
  for (const auto& t : m.triangles()) {
    const Point p[3] = {m.vertices()[t[0]], m.vertices()[t[1]], m.vertices()[t[2]]};
    double b[3], c[3];
    for (int i = 0; i < 3; ++i) {
      b[i] = p[(i + 1) % 3].y - p[(i + 2) % 3].y;
      c[i] = p[(i + 2) % 3].x - p[(i + 1) % 3].x;
    }
    const double area = 0.5 * std::abs(b[0] * c[1] - b[1] * c[0]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d[t[i]][t[j]] += (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
  }
  return d;
}

std::vector<double> cholesky_solve(Dense a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) a[j][j] -= a[j][k] * a[j][k];
    a[j][j] = std::sqrt(a[j][j]);
    for (std::size_t i = j + 1; i < n; ++i) {
      for (std::size_t k = 0; k < j; ++k) a[i][j] -= a[i][k] * a[j][k];
      a[i][j] /= a[j][j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
    b[i] /= a[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k][i] * b[k];
    b[i] /= a[i][i];
  }
  return b;
}

CsrMatrix dense_to_csr(const Dense& d) {
  const std::size_t n = d.size();
  std::vector<int> rp{0}, cols;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cols.push_back(static_cast<int>(j));
    rp.push_back(static_cast<int>(cols.size()));
  }
  CsrMatrix a(n, rp, cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a.add(static_cast<int>(i), static_cast<int>(j), d[i][j]);
  return a;
}

double max_abs_entry(const CsrMatrix& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

// Largest eigenvalue of the symmetric pencil (E, B), B SPD, both 3x3.
double pencil_max_eigenvalue(const double e[3][3], const double b[3][3]) {
  double l[3][3] = {};
  for (int j = 0; j < 3; ++j) {
    double s = b[j][j];
    for (int k = 0; k < j; ++k) s -= l[j][k] * l[j][k];
    l[j][j] = std::sqrt(s);
    for (int i = j + 1; i < 3; ++i) {
      double t = b[i][j];
      for (int k = 0; k < j; ++k) t -= l[i][k] * l[j][k];
      l[i][j] = t / l[j][j];
    }
  }
  // C = L^{-1} E L^{-T}, then power iteration (C is PSD).
  double linv[3][3] = {};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 3; ++i) {
      double s = i == c ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= l[i][k] * linv[k][c];
      linv[i][c] = s / l[i][i];
    }
  }
  double cm[3][3] = {};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) cm[i][j] += linv[i][p] * e[p][q] * linv[j][q];
  double v[3] = {1.0, 0.7, 0.3}, lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    double w[3] = {};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) w[i] += cm[i][j] * v[j];
    const double nrm = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
    lambda = nrm;
    for (int i = 0; i < 3; ++i) v[i] = w[i] / nrm;
  }
  return lambda;
}

}  // namespace

TEST_CASE("space dof counts") {
  CHECK(unit_space(1, 1)->num_dofs() == 4);
  CHECK(unit_space(1, 2)->num_dofs() == 9);
  const auto s = unit_space(2, 1);
  CHECK(s->boundary_dofs().size() == 8);
  CHECK_FALSE(s->is_boundary_dof(4));
  CHECK_THROWS_AS(unit_space(1, 3), InvalidArgument);
  for (int k : {1, 2}) {
    const auto sp = unit_space(3, k);
    const Rectangle d = sp->mesh().domain();
    for (int i : sp->boundary_dofs()) CHECK(d.on_boundary(sp->dof_coordinates()[i], 1e-14));
  }
}

TEST_CASE("shared P2 edges share their midpoint dof") {
  const auto s = unit_space(2, 2);
  const Mesh& m = s->mesh();
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const auto adj = m.edge_elements()[e];
    if (adj[1] < 0) continue;
    auto mid_dof = [&](int k) {
      for (int i = 0; i < 3; ++i)
        if (m.triangle_edges()[k][i] == static_cast<int>(e)) return s->element_dofs(k)[3 + i];
      return -1;
    };
    CHECK(mid_dof(adj[0]) == mid_dof(adj[1]));
    CHECK(mid_dof(adj[0]) >= 0);
  }
}

TEST_CASE("single element matrices") {
  const auto s = single_triangle();
  const auto k = to_dense(assemble_stiffness(*s));
  const auto mass = to_dense(assemble_mass(*s));
  const auto lumped = to_dense(assemble_mass(*s, true));
  const double kex[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
  // dof i sits at vertex i of the input; the stored triangle may be rotated
  const Point origin{0, 0}, ex{1, 0};
  int idx[3];
  for (int i = 0; i < 3; ++i) {
    const Point p = s->dof_coordinates()[i];
    idx[i] = (p.x == origin.x && p.y == origin.y) ? 0 : (p.x == ex.x && p.y == ex.y ? 1 : 2);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(k[i][j] == doctest::Approx(kex[idx[i]][idx[j]]).epsilon(1e-14));
      CHECK(mass[i][j] == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0).epsilon(1e-14));
      CHECK(lumped[i][j] == doctest::Approx(i == j ? 1.0 / 6.0 : 0.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("stiffness matches the dense oracle and annihilates constants") {
  const auto s = unit_space(2, 1);
  const auto k = assemble_stiffness(*s);
  const auto oracle = p1_stiffness_oracle(s->mesh());
  const auto d = to_dense(k);
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) CHECK(d[i][j] == doctest::Approx(oracle[i][j]).epsilon(1e-13));
  CHECK(k.at(4, 4) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(oracle[4][4] == doctest::Approx(4.0).epsilon(1e-14));

  for (int deg : {1, 2}) {
    const auto sp = unit_space(3, deg);
    const auto kk = assemble_stiffness(*sp);
    const std::vector<double> one(sp->num_dofs(), 1.0);
    CHECK(norm_inf(kk * one) <= 1e-13);
  }
}

TEST_CASE("mass total and load identities") {
  for (int deg : {1, 2}) {
    const auto s = unit_space(3, deg);
    const auto m = assemble_mass(*s);
    const auto ml = assemble_mass(*s, true);
    const std::vector<double> one(s->num_dofs(), 1.0);
    CHECK(dot(one, m * one) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(dot(one, ml * one) == doctest::Approx(1.0).epsilon(1e-13));
    for (double v : ml.diagonal_values()) CHECK(v > 0.0);

    const auto zero = assemble_load(*s, [](double, double, double) { return 0.0; }, 0.0);
    CHECK(norm_inf(zero) == 0.0);
    const auto f1 = assemble_load(*s, [](double, double, double) { return 1.0; }, 0.0);
    const auto rs = m.row_sums();
    for (std::size_t i = 0; i < f1.size(); ++i) CHECK(f1[i] == doctest::Approx(rs[i]).epsilon(1e-13));
    const auto fx = assemble_load(*s, [](double x, double, double) { return x; }, 0.0);
    double sum = 0.0;
    for (double v : fx) sum += v;
    CHECK(sum == doctest::Approx(0.5).epsilon(1e-13));
  }
  const auto s = unit_space(2, 1);
  CHECK_THROWS_AS(assemble_load(*s, [](double, double, double) { return NAN; }, 0.0), NumericError);
}

TEST_CASE("interpolation reproduces polynomials") {
  const auto s1 = unit_space(3, 1);
  const auto c = interpolate(s1, [](double, double, double) { return 2.5; }, 0.0);
  for (double v : c.coefficients()) CHECK(v == 2.5);
  const ScalarField affine = [](double x, double y, double) { return 1.0 + 2.0 * x - 3.0 * y; };
  CHECK(l2_error(interpolate(s1, affine, 0.0), affine, 0.0) <= 1e-12);
  const ScalarField quad = [](double x, double y, double) { return x * x - x * y + 3.0 * y * y + x; };
  CHECK(l2_error(interpolate(unit_space(3, 2), quad, 0.0), quad, 0.0) <= 1e-12);
  CHECK_THROWS_AS(interpolate(s1, [](double, double, double) { return INFINITY; }, 0.0), NumericError);
}

TEST_CASE("norms of the interpolant of x") {
  const auto s = unit_space(4, 1);
  const FeFunction zero(s);
  CHECK(norm(zero, NormKind::L2) == 0.0);
  const auto u = interpolate(s, [](double x, double, double) { return x; }, 0.0);
  CHECK(norm(u, NormKind::L2) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-13));
  CHECK(norm(u, NormKind::H1Semi) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("prolongation represents the same function") {
  for (int deg : {1, 2}) {
    const auto coarse_mesh = share(build_structured_mesh(2));
    const auto coarse = build_space(coarse_mesh, deg);
    std::vector<int> marks{0, 5};
    const auto fine_mesh = share(refine(refine_uniform(coarse_mesh), marks));
    const auto fine = build_space(fine_mesh, deg);

    const auto one = interpolate(coarse, [](double, double, double) { return 1.0; }, 0.0);
    const auto pone = prolong(one, fine);
    for (double v : pone.coefficients()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> coeffs(coarse->num_dofs());
    for (auto& v : coeffs) v = dist(rng);
    const FeFunction u(coarse, coeffs);
    const auto pu = prolong(u, fine);
    CHECK(norm(pu, NormKind::L2) == doctest::Approx(norm(u, NormKind::L2)).epsilon(1e-12));
    CHECK(norm(pu, NormKind::H1Semi) == doctest::Approx(norm(u, NormKind::H1Semi)).epsilon(1e-12));
    // pointwise agreement at fine quadrature points
    const Mesh& fm = fine->mesh();
    for (std::size_t k = 0; k < fm.num_triangles(); k += 7) {
      const auto g = element_geometry(fm, static_cast<int>(k));
      const int ck = fm.ancestor_element(coarse->mesh(), static_cast<int>(k));
      const auto cg = element_geometry(coarse->mesh(), ck);
      for (const auto& q : triangle_rule()) {
        const Point x = g.map(q.bary);
        CHECK(pu.value(static_cast<int>(k), q.bary) ==
              doctest::Approx(u.value(ck, cg.barycentric(x))).epsilon(1e-12));
      }
    }
  }
  const auto a = unit_space(2, 1);
  const auto b = unit_space(4, 1);  // not a refinement descendant
  CHECK_THROWS_AS(prolongation_matrix(*a, *b), InvalidArgument);
}

TEST_CASE("conjugate gradients") {
  const auto id = CsrMatrix::identity(5);
  const std::vector<double> b{1, -2, 3, 0.5, 4};
  const auto x = solve_spd(id, b);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(x[i] == doctest::Approx(b[i]));
  const auto z = solve_spd(id, std::vector<double>(5, 0.0));
  CHECK(norm_inf(z) == 0.0);

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Dense g(10, std::vector<double>(10));
    for (auto& row : g)
      for (auto& v : row) v = dist(rng);
    Dense a(10, std::vector<double>(10, 0.0));
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        for (int k = 0; k < 10; ++k) a[i][j] += g[i][k] * g[j][k];
        if (i == j) a[i][j] += 0.5;
      }
    std::vector<double> rhs(10);
    for (auto& v : rhs) v = dist(rng);
    const auto oracle = cholesky_solve(a, rhs);
    const auto sol = solve_spd(dense_to_csr(a), rhs, 1e-14);
    for (int i = 0; i < 10; ++i) CHECK(std::abs(sol[i] - oracle[i]) <= 1e-10);
  }

  const Dense indefinite{{1, 2}, {2, 1}};
  CHECK_THROWS_AS(solve_spd(dense_to_csr(indefinite), std::vector<double>{1, 0}), ConvergenceFailure);
}

TEST_CASE("dirichlet elimination keeps symmetry") {
  const auto s = unit_space(3, 1);
  auto k = assemble_stiffness(*s);
  std::vector<double> b = assemble_load(*s, [](double, double, double) { return 1.0; }, 0.0);
  std::vector<double> values(s->num_dofs(), 0.0);
  for (int i : s->boundary_dofs()) values[i] = 0.25;
  eliminate_dofs(k, b, s->boundary_mask(), values);
  CHECK(k.max_asymmetry() == 0.0);
  const auto x = solve_spd(k, b);
  for (int i : s->boundary_dofs()) CHECK(x[i] == doctest::Approx(0.25));
}

TEST_CASE("symmetry and semi-definiteness") {
  std::mt19937 rng(3);
  std::normal_distribution<double> dist;
  for (int deg : {1, 2}) {
    const auto base = share(build_structured_mesh(3));
    std::vector<int> marks{1, 4, 9};
    const auto s = build_space(share(refine(base, marks)), deg);
    for (const auto& a : {assemble_stiffness(*s), assemble_mass(*s)}) {
      CHECK(a.max_asymmetry() <= 1e-14 * max_abs_entry(a));
      for (int r = 0; r < 100; ++r) {
        std::vector<double> v(s->num_dofs());
        for (auto& x : v) x = dist(rng);
        CHECK(dot(v, a * v) / dot(v, v) >= -1e-12);
      }
    }
  }
}

TEST_CASE("parallel kernels agree with the reference kernels") {
  for (int deg : {1, 2}) {
    const auto base = share(build_structured_mesh(4));
    std::vector<int> marks{0, 3, 17};
    const auto s = build_space(share(refine(base, marks)), deg);
    const ScalarField f = [](double x, double y, double t) { return std::sin(3 * x) * std::exp(y) + t; };
    for (int threads : {1, 4}) {
      set_num_threads(threads);
      const auto pairs = {std::pair{assemble_stiffness(*s), reference::assemble_stiffness(*s)},
                          std::pair{assemble_mass(*s), reference::assemble_mass(*s)},
                          std::pair{assemble_mass(*s, true), reference::assemble_mass(*s, true)}};
      for (const auto& [a, r] : pairs) {
        const auto da = to_dense(a), dr = to_dense(r);
        const double scale = max_abs_entry(r);
        for (std::size_t i = 0; i < da.size(); ++i)
          for (std::size_t j = 0; j < da.size(); ++j) CHECK(std::abs(da[i][j] - dr[i][j]) <= 1e-13 * scale);
      }
      const auto la = assemble_load(*s, f, 0.3);
      const auto lr = reference::assemble_load(*s, f, 0.3);
      for (std::size_t i = 0; i < la.size(); ++i) CHECK(std::abs(la[i] - lr[i]) <= 1e-13 * norm_inf(lr));
    }
    set_num_threads(1);
  }
}

TEST_CASE("discrete trace inequality") {
  std::mt19937 rng(11);
  std::normal_distribution<double> dist;
  auto mesh = share(build_structured_mesh(2));
  double previous_sup = INFINITY;
  for (int level = 0; level < 3; ++level) {
    const auto s = build_space(mesh, 1);
    const Mesh& m = *mesh;
    double sampled = 0.0, sup = 0.0;
    std::vector<FeFunction> samples;
    for (int r = 0; r < 100; ++r) {
      std::vector<double> c(s->num_dofs());
      for (auto& v : c) v = dist(rng);
      samples.emplace_back(s, std::move(c));
    }
    for (std::size_t k = 0; k < m.num_triangles(); ++k) {
      const int kk = static_cast<int>(k);
      const auto g = element_geometry(m, kk);
      // local matrices for the pencil bound
      double mk[3][3], kk3[3][3];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          mk[i][j] = g.area * (i == j ? 2.0 : 1.0) / 12.0;
          kk3[i][j] = g.area * dot(g.grad_lambda[i], g.grad_lambda[j]);
        }
      for (int le = 0; le < 3; ++le) {
        const int e = m.triangle_edges()[kk][le];
        const double he = m.h_edge(e);
        double em[3][3] = {}, bm[3][3];
        // edge opposite local vertex le: mass of the two other barycentrics
        const int a = (le + 1) % 3, b = (le + 2) % 3;
        em[a][a] = em[b][b] = he / 3.0;
        em[a][b] = em[b][a] = he / 6.0;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) bm[i][j] = mk[i][j] / he + he * kk3[i][j];
        sup = std::max(sup, pencil_max_eigenvalue(em, bm));
        for (const auto& v : samples) {
          double edge = 0.0;
          for (const auto& q : edge_rule()) {
            Barycentric bc{};
            bc[a] = 1.0 - q.s;
            bc[b] = q.s;
            const double val = v.value(kk, bc);
            edge += q.weight * he * val * val;
          }
          double l2 = 0.0;
          for (const auto& q : triangle_rule()) {
            const double val = v.value(kk, q.bary);
            l2 += q.weight * g.area * val * val;
          }
          const Point grad = v.gradient(kk, {1.0 / 3, 1.0 / 3, 1.0 / 3});
          const double h1 = g.area * dot(grad, grad);
          sampled = std::max(sampled, edge / (l2 / he + he * h1));
        }
      }
    }
    CHECK(sampled <= sup * (1.0 + 1e-12));
    CHECK(sampled <= 10.0);
    CHECK(sup <= previous_sup * (1.0 + 1e-12));
    previous_sup = sup;
    mesh = refine_uniform(mesh);
  }
}

TEST_CASE("P1 interpolation converges at second order") {
  const ScalarField g = [](double x, double y, double) { return std::sin(M_PI * x) * std::cos(2 * y); };
  auto mesh = share(build_structured_mesh(4));
  std::vector<double> err, h;
  for (int l = 0; l < 3; ++l) {
    err.push_back(l2_error(interpolate(build_space(mesh, 1), g, 0.0), g, 0.0));
    h.push_back(mesh_metrics(*mesh).max_h);
    mesh = refine_uniform(mesh);
  }
  for (int l = 1; l < 3; ++l) CHECK(std::log(err[l - 1] / err[l]) / std::log(h[l - 1] / h[l]) >= 1.9);
}
