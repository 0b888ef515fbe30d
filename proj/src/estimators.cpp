#include "virecon/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "virecon/errors.hpp"

namespace virecon {

double EdgeJumps::squared_norm(std::size_t i, double edge_length) const {
  double s = 0.0;
  const auto rule = edge_rule();
  for (std::size_t q = 0; q < rule.size(); ++q) s += rule[q].weight * values[i][q] * values[i][q];
  return s * edge_length;
}

double EdgeJumps::weighted_sum(const Mesh& mesh, int power) const {
  double s = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double h = mesh.h_edge(edges[i]);
    s += std::pow(h, power) * squared_norm(i, h);
  }
  return s;
}

double EdgeJumps::max_abs() const {
  double m = 0.0;
  for (const auto& v : values)
    for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

namespace {

std::array<double, 3> edge_jump(const FeFunction& w, int e) {
  const Mesh& mesh = w.space().mesh();
  const auto& ed = mesh.edges()[e];
  const auto& adj = mesh.edge_elements()[e];
  const Point a = mesh.vertices()[ed[0]];
  const Point b = mesh.vertices()[ed[1]];
  const Point t = b - a;
  const double len = mesh.h_edge(e);
  const Point normal{t.y / len, -t.x / len};
  const auto g1 = element_geometry(mesh, adj[0]);
  const auto g2 = element_geometry(mesh, adj[1]);
  std::array<double, 3> out{};
  const auto rule = edge_rule();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Point x = a + rule[q].s * t;
    const Point d = w.gradient(adj[0], g1.barycentric(x)) - w.gradient(adj[1], g2.barycentric(x));
    out[q] = dot(d, normal);
  }
  return out;
}

}  // namespace

EdgeJumps jump_residual(const FeFunction& w) {
  const Mesh& mesh = w.space().mesh();
  EdgeJumps j;
  for (int e = 0; e < static_cast<int>(mesh.num_edges()); ++e) {
    if (!mesh.is_boundary_edge(e)) j.edges.push_back(e);
  }
  j.values.resize(j.edges.size());
  const int ne = static_cast<int>(j.edges.size());
  const int threads = num_threads();
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int i = 0; i < ne; ++i) j.values[i] = edge_jump(w, j.edges[i]);
  return j;
}

Indicator residual_indicator(const Space& space, const ResidualTerms& terms) {
  const Mesh& mesh = space.mesh();
  const int ne = static_cast<int>(mesh.num_edges());
  const int nt = static_cast<int>(mesh.num_triangles());
  const int threads = num_threads();

  std::vector<double> edge_term(mesh.num_edges(), 0.0);
  if (terms.jump_field != nullptr) {
    const auto rule = edge_rule();
#pragma omp parallel for num_threads(threads) schedule(static)
    for (int e = 0; e < ne; ++e) {
      if (mesh.is_boundary_edge(e)) continue;
      const auto j = edge_jump(*terms.jump_field, e);
      double s = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) s += rule[q].weight * j[q] * j[q];
      const double h = mesh.h_edge(e);
      edge_term[e] = std::pow(h, terms.edge_power) * s * h;
    }
  }

  Indicator ind;
  ind.element_sq.assign(mesh.num_triangles(), 0.0);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k < nt; ++k) {
    const auto g = element_geometry(mesh, k);
    double lap = 0.0;
    for (const auto& [c, v] : terms.laplacians) lap += c * v->laplacian(k);
    double r2 = 0.0;
    for (const auto& q : triangle_rule()) {
      double r = lap;
      if (terms.source) {
        const Point x = g.map(q.bary);
        r += terms.source(x.x, x.y, terms.time);
      }
      for (const auto& [c, v] : terms.values) r += c * v->value(k, q.bary);
      r2 += q.weight * g.area * r * r;
    }
    double edges = 0.0;
    for (int e : mesh.triangle_edges()[k]) edges += 0.5 * edge_term[e];
    ind.element_sq[k] = std::pow(mesh.h_element(k), terms.element_power) * r2 + edges;
  }
  double sum = 0.0;
  for (double v : ind.element_sq) sum += v;
  ind.total = std::sqrt(sum);
  return ind;
}

Indicator eta0(const FeFunction& w, const FeFunction& wdot, const FeFunction& sigma,
               const ScalarField& f, double t, ResidualForm form) {
  ResidualTerms terms;
  terms.source = f;
  terms.time = t;
  if (form == ResidualForm::Corrected) {
    terms.values = {{1.0, &sigma}, {-1.0, &wdot}};
    terms.laplacians = {{1.0, &w}};
  } else {
    terms.values = {{1.0, &sigma}, {-1.0, &w}};
    terms.laplacians = {{1.0, &wdot}};
  }
  terms.jump_field = &w;
  terms.element_power = 4;
  terms.edge_power = 3;
  return residual_indicator(w.space(), terms);
}

namespace {

ResidualTerms rate_terms(const FeFunction& wdot, const FeFunction& wddot,
                         const FeFunction& sigmadot, const ScalarField& fdot, double t,
                         ResidualForm form) {
  ResidualTerms terms;
  terms.source = fdot;
  terms.time = t;
  if (form == ResidualForm::Corrected) {
    terms.values = {{1.0, &sigmadot}, {-1.0, &wddot}};
    terms.laplacians = {{1.0, &wdot}};
  } else {
    terms.values = {{1.0, &sigmadot}, {-1.0, &wdot}};
    terms.laplacians = {{1.0, &wddot}};
  }
  terms.jump_field = &wdot;
  return terms;
}

}  // namespace

Indicator eta1(const FeFunction& wdot, const FeFunction& wddot, const FeFunction& sigmadot,
               const ScalarField& fdot, double t, ResidualForm form) {
  if (wdot.space().degree() < 2)
    throw InvalidArgument("eta1 needs degree >= 2; use eta0_of_rates for degree 1");
  auto terms = rate_terms(wdot, wddot, sigmadot, fdot, t, form);
  terms.element_power = 6;
  terms.edge_power = 5;
  return residual_indicator(wdot.space(), terms);
}

Indicator eta0_of_rates(const FeFunction& wdot, const FeFunction& wddot,
                        const FeFunction& sigmadot, const ScalarField& fdot, double t,
                        ResidualForm form) {
  auto terms = rate_terms(wdot, wddot, sigmadot, fdot, t, form);
  terms.element_power = 4;
  terms.edge_power = 3;
  return residual_indicator(wdot.space(), terms);
}

Indicator eta_energy(const FeFunction& w, const FeFunction& sigma, const FeFunction& wdot,
                     const ScalarField& f, double t) {
  ResidualTerms terms;
  terms.source = f;
  terms.time = t;
  terms.values = {{1.0, &sigma}, {-1.0, &wdot}};
  terms.laplacians = {{1.0, &w}};
  terms.jump_field = &w;
  terms.element_power = 2;
  terms.edge_power = 1;
  return residual_indicator(w.space(), terms);
}

ComplementarityTerms complementarity_terms(const SpaceOperators& ops, const SigmaRecord& sigma,
                                           const FeFunction& w, std::span<const double> chi,
                                           double eta0_value) {
  const std::size_t n = ops.num_dofs();
  std::vector<double> gap(n);
  for (std::size_t i = 0; i < n; ++i) gap[i] = w.coefficients()[i] - chi[i];
  const auto mgap = ops.mass * gap;
  const auto msm = ops.mass * sigma.sigma_minus.coefficients();
  ComplementarityTerms out;
  out.comp = std::abs(dot(sigma.sigma.coefficients(), mgap));
  const double minus_l2 = std::sqrt(std::max(0.0, dot(sigma.sigma_minus.coefficients(), msm)));
  out.neg = std::abs(dot(sigma.sigma_minus.coefficients(), mgap)) + minus_l2 * eta0_value;
  return out;
}

ComplementarityTerms complementarity_terms(const SpaceOperators& ops, const SigmaRecord& sigma,
                                           const FeFunction& w, std::span<const double> chi,
                                           const ReferenceReconstructor& reference,
                                           const FeFunction& reconstruction) {
  ComplementarityTerms out = complementarity_terms(ops, sigma, w, chi, 0.0);
  const auto& p = reference.prolongation();
  const auto minus_fine = p * sigma.sigma_minus.coefficients();
  const auto chi_fine = p * chi;
  std::vector<double> gap(chi_fine.size());
  for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = reconstruction.coefficients()[i] - chi_fine[i];
  const auto mgap = reference.fine_operators().mass * gap;
  out.neg = std::abs(dot(minus_fine, mgap));
  return out;
}

double accumulate(std::span<const double> values, double tau) {
  RunningIntegral integral;
  for (double v : values) integral.add(tau, v);
  return integral.value();
}

double EstimatorBreakdown::recombine() const {
  return std::sqrt(sigma_minus_dual_sq) + std::sqrt(comp) + std::sqrt(neg) +
         std::sqrt(dual_energy) + 0.5 * eta0 + std::sqrt(time_residual_sq) +
         0.5 * initial_error + 0.5 * eta0_initial;
}

EstimatorBreakdown total_bound(const AccumulatedTerms& acc, const InitialTerms& init,
                               int degree) {
  auto need = [](const std::optional<double>& v, const char* name) {
    if (!v) throw InvalidArgument(std::string("total_bound: missing component ") + name);
    if (!std::isfinite(*v) || *v < 0.0)
      throw InvalidArgument(std::string("total_bound: invalid component ") + name);
    return *v;
  };
  EstimatorBreakdown b;
  b.sigma_minus_dual_sq = need(acc.sigma_minus_dual_sq, "sigma_minus_dual_sq");
  b.comp = need(acc.comp, "comp");
  b.neg = need(acc.neg, "neg");
  b.dual_energy = need(acc.dual_energy, "dual_energy");
  b.time_residual_sq = need(acc.time_residual_sq, "time_residual_sq");
  b.eta0 = need(acc.eta0_now, "eta0_now");
  b.initial_error = need(init.initial_error, "initial_error");
  b.eta0_initial = need(init.eta0_initial, "eta0_initial");
  b.high_degree = degree >= 2;
  b.total = b.recombine();
  return b;
}

}  // namespace virecon
