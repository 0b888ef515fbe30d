#include <iostream>

#include "virecon/acceptance.hpp"
#include "virecon/assembly.hpp"

int main(int argc, char** argv) {
  virecon::set_num_threads(1);
  const bool verbose = argc > 1 && std::string(argv[1]) == "-v";
  const auto results = virecon::run_acceptance(verbose ? &std::cerr : nullptr);
  return virecon::print_acceptance(std::cout, results) ? 0 : 1;
}
