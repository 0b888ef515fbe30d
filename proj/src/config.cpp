#include "virecon/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "virecon/benchmarks.hpp"
#include "virecon/errors.hpp"

namespace virecon {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ParseError("expected a number, got '" + v + "'", line);
  return out;
}

int parse_int(const std::string& v, int line) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ParseError("expected an integer, got '" + v + "'", line);
  return out;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ParseError("expected true or false, got '" + v + "'", line);
}

}  // namespace

ExperimentConfig load_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_problem = false;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", line);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line);
    if (value.empty()) throw ParseError("empty value for '" + key + "'", line);

    if (key == "problem") {
      const auto names = benchmark_names();
      if (std::find(names.begin(), names.end(), value) == names.end())
        throw ParseError("unknown problem '" + value + "'", line);
      cfg.problem = value;
      have_problem = true;
    } else if (key == "k") {
      cfg.degree = parse_int(value, line);
      if (cfg.degree != 1 && cfg.degree != 2) throw ParseError("k must be 1 or 2", line);
    } else if (key == "n") {
      cfg.n = parse_int(value, line);
      if (cfg.n < 1) throw ParseError("n must be >= 1", line);
    } else if (key == "levels" || key == "L") {
      cfg.levels = parse_int(value, line);
      if (cfg.levels < 1) throw ParseError("levels must be >= 1", line);
    } else if (key == "tau") {
      if (value == "h2") {
        cfg.fixed_tau.reset();
      } else {
        const double tau = parse_double(value, line);
        if (!(tau > 0.0)) throw ParseError("tau must be positive", line);
        cfg.fixed_tau = tau;
      }
    } else if (key == "T") {
      cfg.final_time = parse_double(value, line);
      if (!(cfg.final_time > 0.0)) throw ParseError("T must be positive", line);
    } else if (key == "sigma_mode") {
      if (value == "lumped") {
        cfg.sigma_mode = SigmaMode::Lumped;
      } else if (value == "consistent") {
        cfg.sigma_mode = SigmaMode::Consistent;
      } else {
        throw ParseError("sigma_mode must be lumped or consistent", line);
      }
    } else if (key == "residual") {
      if (value == "corrected") {
        cfg.residual = ResidualForm::Corrected;
      } else if (value == "printed") {
        cfg.residual = ResidualForm::Printed;
      } else {
        throw ParseError("residual must be corrected or printed", line);
      }
    } else if (key == "verify") {
      cfg.verify = parse_bool(value, line);
    } else if (key == "fine_depth") {
      cfg.fine_depth = parse_int(value, line);
      if (cfg.fine_depth < 1) throw ParseError("fine_depth must be >= 1", line);
    } else if (key == "theta") {
      cfg.theta = parse_double(value, line);
      if (!(cfg.theta > 0.0 && cfg.theta <= 1.0)) throw ParseError("theta must lie in (0, 1]", line);
    } else if (key == "refinement") {
      if (value == "uniform") {
        cfg.refinement = RefinementMode::Uniform;
      } else if (value == "adaptive") {
        cfg.refinement = RefinementMode::Adaptive;
      } else {
        throw ParseError("refinement must be uniform or adaptive", line);
      }
    } else if (key == "max_dofs") {
      cfg.max_dofs = parse_int(value, line);
      if (cfg.max_dofs < 1) throw ParseError("max_dofs must be >= 1", line);
    } else if (key == "timings") {
      cfg.timings = parse_bool(value, line);
    } else if (key == "output") {
      cfg.output = value;
    } else {
      throw ParseError("unknown key '" + key + "'", line);
    }
  }
  if (!have_problem) throw ParseError("missing problem", 0);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return load_config(text.str());
}

}  // namespace virecon
