#pragma once

#include <string>
#include <vector>

#include "virecon/vi_stepper.hpp"

namespace virecon {

/// Registered problems: heat_smooth, manufactured_obstacle, pyramid_adaptive.
ProblemSpec benchmark(const std::string& name);
std::vector<std::string> benchmark_names();

}  // namespace virecon
