#include "virecon/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "virecon/errors.hpp"

namespace virecon {

namespace {

constexpr double kPi = std::numbers::pi;

// exp(-t) sin(pi x) sin(pi y), a Dirichlet eigenfunction with the obstacle far below.
ProblemSpec heat_smooth() {
  ProblemSpec p;
  p.name = "heat_smooth";
  p.domain = {0.0, 0.0, 1.0, 1.0};
  auto exact = [](double x, double y, double t) {
    return std::exp(-t) * std::sin(kPi * x) * std::sin(kPi * y);
  };
  const double c = 2.0 * kPi * kPi - 1.0;
  p.exact_solution = exact;
  p.source = [exact, c](double x, double y, double t) { return c * exact(x, y, t); };
  p.source_rate = [exact, c](double x, double y, double t) { return -c * exact(x, y, t); };
  p.obstacle = [](double, double, double) { return -10.0; };
  p.initial = [exact](double x, double y, double) { return exact(x, y, 0.0); };
  p.exact_multiplier = [](double, double, double) { return 0.0; };
  return p;
}

// w = exp(-t) phi(x) sin(pi y) with phi = ((x - 1/4)(3/4 - x))^2 on (1/4, 3/4) and
// zero outside; the solution rests on chi = 0 for x outside (1/4, 3/4), where
// the multiplier is exp(-t) sin(pi y).
ProblemSpec manufactured_obstacle() {
  ProblemSpec p;
  p.name = "manufactured_obstacle";
  p.domain = {0.0, 0.0, 1.0, 1.0};
  auto inside = [](double x) { return x > 0.25 && x < 0.75; };
  auto phi = [inside](double x) {
    if (!inside(x)) return 0.0;
    const double g = (x - 0.25) * (0.75 - x);
    return g * g;
  };
  auto phi_xx = [inside](double x) {
    if (!inside(x)) return 0.0;
    const double g = (x - 0.25) * (0.75 - x);
    const double gx = 1.0 - 2.0 * x;
    return 2.0 * gx * gx - 4.0 * g;
  };
  p.exact_solution = [phi](double x, double y, double t) {
    return std::exp(-t) * phi(x) * std::sin(kPi * y);
  };
  p.exact_multiplier = [inside](double x, double y, double t) {
    return inside(x) ? 0.0 : std::exp(-t) * std::sin(kPi * y);
  };
  auto source = [inside, phi, phi_xx](double x, double y, double t) {
    const double s = std::exp(-t) * std::sin(kPi * y);
    if (!inside(x)) return -s;
    const double ph = phi(x);
    return s * (-ph - phi_xx(x) + kPi * kPi * ph);
  };
  p.source = source;
  p.source_rate = [source](double x, double y, double t) { return -source(x, y, t); };
  p.obstacle = [](double, double, double) { return 0.0; };
  p.initial = [phi](double x, double y, double) { return phi(x) * std::sin(kPi * y); };
  return p;
}

// Pyramid obstacle of height 3/4 on (-1,1)^2, no source, no exact solution.
ProblemSpec pyramid_adaptive() {
  ProblemSpec p;
  p.name = "pyramid_adaptive";
  p.domain = {-1.0, -1.0, 1.0, 1.0};
  auto chi = [](double x, double y, double) {
    return 1.0 - std::max(std::abs(x), std::abs(y)) - 0.25;
  };
  p.obstacle = chi;
  p.source = [](double, double, double) { return 0.0; };
  p.source_rate = [](double, double, double) { return 0.0; };
  p.initial = [chi](double x, double y, double) { return std::max(0.0, chi(x, y, 0.0)); };
  return p;
}

}  // namespace

ProblemSpec benchmark(const std::string& name) {
  if (name == "heat_smooth") return heat_smooth();
  if (name == "manufactured_obstacle") return manufactured_obstacle();
  if (name == "pyramid_adaptive") return pyramid_adaptive();
  throw InvalidArgument("unknown benchmark '" + name + "'");
}

std::vector<std::string> benchmark_names() {
  return {"heat_smooth", "manufactured_obstacle", "pyramid_adaptive"};
}

}  // namespace virecon
