#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nss/params.hpp"

namespace nss {

/// Configuration or validation problem; message carries key names and line
/// numbers. The CLI maps it to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PotentialKind { linear, quadratic, double_well, tabulated };
enum class InitialKind { uniform, equilibrium, perturbed_equilibrium,
                         tabulated };

struct GridSpec {
  int dim = 1;
  double x_lo = 0.0, x_hi = 1.0;
  int nx = 0;
  double y_lo = 0.0, y_hi = 1.0;
  int ny = 0;
};

struct PotentialSpec {
  PotentialKind kind = PotentialKind::linear;
  bool bounded = true;
  double g = 1.0;        // linear: Phi = g (x_last - lo_last)
  double k = 1.0;        // quadratic: Phi = k/2 |x - center|^2
  double center = 0.0;   // quadratic center (all axes)
  double scale = 1.0;    // double well: Phi = scale ((x_last)^2 - 1)^2
  std::string file;      // tabulated: one value per cell, row-major
};

struct InitialSpec {
  InitialKind kind = InitialKind::uniform;
  double rho0 = 1.0, eta0 = 1.0;       // uniform
  double mass_rho = 0.0, mass_eta = 0.0;  // equilibrium / perturbed
  double amplitude = 0.0;              // perturbed, in (0, 0.5]
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool mollify = false;                // optional 3-cell box filter
  std::string file;            // tabulated: rho, u..., eta per cell, row-major
};

struct RunSpec {
  double t_end = 1.0;
  int sample_every = 50;
  std::string out_dir = "out";
};

struct ToleranceSpec {
  double picard_tol = 1e-11;
  int picard_max = 80;
  double linear_tol = 1e-10;
  double energy_slack_rel = 1e-10;  // per step, relative to |E(0)|
  double asym_dist_rel = 1e-3;
  double asym_kinetic_abs = 1e-6;
};

struct RunConfig {
  GridSpec grid;
  PhysParams params;
  std::vector<double> delta_schedule;  // sweep runs; strictly decreasing
  PotentialSpec potential;
  InitialSpec initial;
  RunSpec run;
  ToleranceSpec tol;
};

/// Parses the flat key=value format ([section] headers, # comments).
/// Unknown sections/keys, duplicate keys, malformed values and violated
/// constraints all throw ConfigError with key names and line numbers.
RunConfig parse_config(const std::string& text,
                       const std::string& origin = "<string>");
RunConfig parse_config_file(const std::string& path);

/// Effective configuration (defaults filled) as valid config text at 17
/// significant digits; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const RunConfig& c);

}  // namespace nss
