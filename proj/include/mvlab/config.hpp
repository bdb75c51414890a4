#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvlab/drift.hpp"
#include "mvlab/kernels.hpp"
#include "mvlab/particle.hpp"
#include "mvlab/stable_noise.hpp"

namespace mvlab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything an experiment reads. Step sizes are stored as step counts:
/// h = horizon / steps, always a power of two.
struct ExperimentConfig {
  std::string experiment;
  std::string name;

  double alpha = 0.8;
  double beta = 0.7;
  int dim = 1;
  double horizon = 0.5;

  std::string noise = "cylindrical";  // cylindrical | isotropic | discrete
  std::vector<double> noise_scales;   // cylindrical, one per axis (or one broadcast)
  double noise_scale = 1.0;           // isotropic
  std::vector<SphericalAtom> atoms;   // discrete

  std::string kernel = "power_capped";  // zero | power_capped | gaussian_gradient | tabulated
  double kernel_strength = -1.0;
  double kernel_cap = 1.0;
  double kernel_width = 0.5;
  std::vector<double> kernel_radii;
  std::vector<double> kernel_profile;

  std::string initial = "gaussian";  // point | uniform | gaussian
  double initial_spread = 0.5;

  std::vector<std::size_t> sizes;
  std::vector<std::size_t> steps;
  std::size_t reference_steps = 4096;
  std::size_t points = 100000;  // M
  double p = 2.0;
  std::size_t checkpoints = 64;
  std::size_t pool = 8192;
  DriftMethod drift = DriftMethod::Auto;
  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path out = "runs";

  double tol = 1e-2;
  std::size_t max_iter = 8;

  double pde_half_length = 16.0;
  std::size_t pde_n = 2048;
  bool control = true;

  double gamma = 0.4;
  double besov_half_length = 3.141592653589793;
  std::size_t besov_n = 16384;
  double besov_horizon = 0.0625;
  std::size_t besov_steps = 512;
  std::size_t besov_times = 13;

  std::size_t cf_draws = 1000000;
  std::vector<double> xi = {0.5, 1.0, 2.0};
  std::vector<double> moment_q = {0.4, 2.0};
  std::vector<int> moment_levels = {6, 7, 8, 9, 10, 11, 12};
  std::size_t moment_draws = 100000;

  /// Benchmark defaults of a subcommand.
  static ExperimentConfig defaults(const std::string& experiment);

  bool weak_regime() const noexcept { return beta > 1.0 - alpha; }
  bool strong_regime() const noexcept { return beta > 1.0 - 0.5 * alpha; }

  StableSpec make_noise() const;
  Kernel make_kernel() const;
  InitialLaw make_initial() const;
  SchemeConfig scheme(std::size_t fine_steps, std::size_t checkpoints) const;

  /// Throws ConfigError.
  void validate() const;

  nlohmann::json to_json() const;
  nlohmann::json regime_json() const;
  /// Hash of the settings that determine results (threads and out excluded).
  std::uint64_t hash() const;
};

/// INI-style key=value text with optional [section] tables over the
/// subcommand defaults. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::string& experiment);
ExperimentConfig load_config(const std::filesystem::path& file, const std::string& experiment);

DriftMethod parse_drift_method(const std::string& s);

}  // namespace mvlab
