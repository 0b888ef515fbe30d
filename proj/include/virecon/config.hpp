#pragma once

#include <optional>
#include <string>

#include "virecon/estimators.hpp"
#include "virecon/multiplier.hpp"

namespace virecon {

enum class RefinementMode { Uniform, Adaptive };

/// Experiment settings, parsed from `key=value` lines. Recognised keys:
///
///   problem       benchmark name (required)
///   k             polynomial degree, 1 or 2                    (1)
///   n             initial grid size                            (4)
///   levels        uniform refinement levels, >= 1              (3)
///   tau           "h2" (tau = h_max^2, rounded to divide T) or a positive number (h2)
///   T             final time                                   (0.5)
///   sigma_mode    lumped | consistent                          (lumped)
///   residual      corrected | printed                          (corrected)
///   verify        true | false, fine-mesh reconstruction       (false)
///   fine_depth    uniform halvings of the verification mesh    (2)
///   theta         Doerfler fraction in (0, 1]                  (0.5)
///   refinement    uniform | adaptive                           (uniform)
///   max_dofs      dof budget of the adaptive loop              (20000)
///   timings       true | false, fill the seconds column        (false)
///   output        output directory                             (out)
struct ExperimentConfig {
  std::string problem;
  int degree = 1;
  int n = 4;
  int levels = 3;
  std::optional<double> fixed_tau;  // empty: tau = h^2
  double final_time = 0.5;
  SigmaMode sigma_mode = SigmaMode::Lumped;
  ResidualForm residual = ResidualForm::Corrected;
  bool verify = false;
  int fine_depth = 2;
  double theta = 0.5;
  RefinementMode refinement = RefinementMode::Uniform;
  int max_dofs = 20000;
  bool timings = false;
  std::string output = "out";
};

/// Throws ParseError (with the offending line number) on malformed lines,
/// unknown keys, out-of-range values or a missing `problem`.
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace virecon
