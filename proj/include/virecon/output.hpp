#pragma once

#include <ostream>
#include <span>
#include <string>

#include "virecon/experiment.hpp"

namespace virecon {

inline constexpr const char* kConvergenceHeader =
    "level,h_max,ndofs,nsteps,err_LinfL2,eta0_T,eta_total,term_signeg,term_comp,term_dual,"
    "effectivity,ortho_resid,seconds";

/// CSV text with the fixed header; unavailable fields are empty and numbers
/// carry 17 significant digits.
std::string convergence_csv(const ConvergenceReport& report);
void write_convergence_csv(const ConvergenceReport& report, const std::string& path);

/// Legacy ASCII VTK unstructured grid with point fields w, sigma, chi and the
/// cell field eta0_sq. Degree 2 spaces are written as quadratic triangles.
void write_vtk(const std::string& path, const Space& space, std::span<const double> w,
               std::span<const double> sigma, std::span<const double> chi,
               std::span<const double> eta0_sq);

/// Human-readable table of a report.
void print_report(std::ostream& out, const ConvergenceReport& report);

}  // namespace virecon
