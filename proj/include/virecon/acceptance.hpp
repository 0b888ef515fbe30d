#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace virecon {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the acceptance suite (criteria 1-10) and returns one result per criterion.
std::vector<CriterionResult> run_acceptance(std::ostream* log = nullptr);

/// Prints one "PASS"/"FAIL" line per criterion; returns true when all passed.
bool print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace virecon
