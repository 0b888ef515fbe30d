#include "virecon/output.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "virecon/errors.hpp"

namespace virecon {

namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) { return v ? number(*v) : std::string(); }

std::ofstream open_for_writing(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace

std::string convergence_csv(const ConvergenceReport& report) {
  std::string s = kConvergenceHeader;
  s += '\n';
  for (const auto& r : report.levels) {
    s += std::to_string(r.level) + ',' + number(r.h_max) + ',' + std::to_string(r.ndofs) + ',' +
         std::to_string(r.nsteps) + ',' + optional_number(r.err_linf_l2) + ',' + number(r.eta0_T) +
         ',' + number(r.eta_total) + ',' + number(r.term_signeg) + ',' + number(r.term_comp) + ',' +
         number(r.term_dual) + ',' + optional_number(r.effectivity) + ',' +
         optional_number(r.ortho_resid) + ',' + optional_number(r.seconds) + '\n';
  }
  return s;
}

void write_convergence_csv(const ConvergenceReport& report, const std::string& path) {
  auto out = open_for_writing(path);
  out << convergence_csv(report);
  check_written(out, path);
}

void write_vtk(const std::string& path, const Space& space, std::span<const double> w,
               std::span<const double> sigma, std::span<const double> chi,
               std::span<const double> eta0_sq) {
  const std::size_t n = space.num_dofs();
  const std::size_t nt = space.mesh().num_triangles();
  if (w.size() != n || sigma.size() != n || chi.size() != n || eta0_sq.size() != nt)
    throw InvalidArgument("write_vtk: field sizes do not match the space");
  const int per = space.dofs_per_element();
  // VTK quadratic triangles order the midside nodes as edges (0,1), (1,2), (2,0);
  // our local edge i is opposite vertex i.
  const std::array<int, 6> order = per == 3 ? std::array<int, 6>{0, 1, 2, 0, 0, 0}
                                            : std::array<int, 6>{0, 1, 2, 5, 3, 4};

  auto out = open_for_writing(path);
  out << "# vtk DataFile Version 3.0\nvirecon solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (const Point& p : space.dof_coordinates()) out << number(p.x) << ' ' << number(p.y) << " 0\n";
  out << "CELLS " << nt << ' ' << nt * (per + 1) << '\n';
  for (std::size_t k = 0; k < nt; ++k) {
    const auto dofs = space.element_dofs(static_cast<int>(k));
    out << per;
    for (int i = 0; i < per; ++i) out << ' ' << dofs[order[i]];
    out << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t k = 0; k < nt; ++k) out << (per == 3 ? 5 : 22) << '\n';
  out << "POINT_DATA " << n << '\n';
  auto field = [&](const char* name, std::span<const double> v) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) out << number(x) << '\n';
  };
  field("w", w);
  field("sigma", sigma);
  field("chi", chi);
  out << "CELL_DATA " << nt << '\n';
  field("eta0_sq", eta0_sq);
  check_written(out, path);
}

void print_report(std::ostream& out, const ConvergenceReport& report) {
  const auto& cfg = report.config;
  out << "problem " << cfg.problem << ", k=" << cfg.degree << ", T=" << cfg.final_time << '\n';
  out << std::left << std::setw(6) << "level" << std::setw(12) << "h_max" << std::setw(8) << "ndofs"
      << std::setw(8) << "nsteps" << std::setw(13) << "err" << std::setw(13) << "eta0_T"
      << std::setw(13) << "total" << std::setw(10) << "effect." << std::setw(13) << "sigma_err"
      << std::setw(8) << "top10" << "kkt\n";
  auto opt = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v) s << std::setprecision(5) << *v;
    else s << '-';
    return s.str();
  };
  for (const auto& r : report.levels) {
    std::ostringstream row;
    row << std::left << std::setprecision(5) << std::setw(6) << r.level << std::setw(12) << r.h_max
        << std::setw(8) << r.ndofs << std::setw(8) << r.nsteps << std::setw(13) << opt(r.err_linf_l2)
        << std::setw(13) << r.eta0_T << std::setw(13) << r.eta_total << std::setw(10)
        << opt(r.effectivity) << std::setw(13) << opt(r.sigma_error_T) << std::setw(8)
        << std::setprecision(3) << r.top_decile_share << (r.kkt_ok ? "ok" : "FAIL");
    out << row.str() << '\n';
  }
  out << "bound components (last level):\n";
  if (!report.levels.empty()) {
    const auto& b = report.levels.back().breakdown;
    out << "  int ||sigma^-||^2_V*   " << b.sigma_minus_dual_sq << '\n'
        << "  int comp               " << b.comp << '\n'
        << "  int neg                " << b.neg << '\n'
        << "  int ||sigma||_V* eta_V " << b.dual_energy << '\n'
        << "  int eta_dt^2           " << b.time_residual_sq << '\n'
        << "  eta0(T)                " << b.eta0 << '\n'
        << "  ||w_h(0) - w0||        " << b.initial_error << '\n'
        << "  eta0(0)                " << b.eta0_initial << '\n'
        << "  top-decile share       " << report.levels.back().top_decile_share << '\n';
  }
}

}  // namespace virecon
