#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "virecon/acceptance.hpp"
#include "virecon/assembly.hpp"
#include "virecon/config.hpp"
#include "virecon/errors.hpp"
#include "virecon/experiment.hpp"
#include "virecon/output.hpp"

namespace {

int threads_from_env() {
  const char* env = std::getenv("VIRECON_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    std::size_t used = 0;
    const int n = std::stoi(env, &used);
    if (used == std::string(env).size() && n >= 1) return n;
  } catch (const std::exception&) {
  }
  throw virecon::ParseError(std::string("VIRECON_THREADS must be a positive integer, got '") + env +
                            "'", 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parabolic obstacle problem solver with a posteriori estimators"};
  app.require_subcommand(1);
  std::string config_path;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Path to a key=value config file")->required();
  run->add_flag("-q,--quiet", quiet, "Do not echo the report");
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
  bool verbose = false;
  selftest->add_flag("-v,--verbose", verbose, "Print per-level diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    virecon::set_num_threads(threads_from_env());
    if (run->parsed()) {
      const auto cfg = virecon::load_config_file(config_path);
      const auto report = virecon::run_experiment(cfg);
      if (!quiet) virecon::print_report(std::cout, report);
      return 0;
    }
    const auto results = virecon::run_acceptance(verbose ? &std::cerr : nullptr);
    return virecon::print_acceptance(std::cout, results) ? 0 : 1;
  } catch (const virecon::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
