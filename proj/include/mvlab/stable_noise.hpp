#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvlab/rate_table.hpp"
#include "mvlab/rng.hpp"

namespace mvlab {

/// Symmetric alpha-stable sample with characteristic function exp(-|u|^alpha)
/// from the Chambers-Mallows-Stuck transform of an angle theta in
/// (-pi/2, pi/2) and a unit-mean exponential w. Odd in theta.
double cms_symmetric(double alpha, double theta, double w) noexcept;

/// Same, drawing (theta, w) from two open uniforms.
double sample_sym_stable_1d(double alpha, double u_angle, double u_exp) noexcept;

/// Positive (a)-stable sample with Laplace transform exp(-lambda^a), 0<a<1
/// (Kanter's representation).
double sample_positive_stable(double a, double u_angle, double u_exp) noexcept;

/// One atom of a discrete spherical measure.
struct SphericalAtom {
  std::vector<double> direction;
  double weight = 1.0;
};

enum class NoiseStructure { Cylindrical, Isotropic, DiscreteSpherical };

enum class NdPolicy { Require, Unchecked };

/// Law of the driving noise: alpha in (0,1) plus the structure of the
/// spherical measure. Calibration constants are computed at construction.
class StableSpec {
 public:
  static StableSpec cylindrical(double alpha, std::vector<double> axis_scales);
  static StableSpec isotropic(double alpha, int dim, double scale = 1.0);
  static StableSpec discrete(double alpha, std::vector<SphericalAtom> atoms,
                             NdPolicy policy = NdPolicy::Require);

  double alpha() const noexcept { return alpha_; }
  int dim() const noexcept { return dim_; }
  NoiseStructure structure() const noexcept { return structure_; }

  const std::vector<double>& axis_scales() const noexcept { return axis_scales_; }
  double isotropic_scale() const noexcept { return iso_scale_; }
  /// Gaussian multiplier sigma(1) of the subordinated sampler, fixed by
  /// characteristic-function matching.
  double isotropic_sigma_unit() const noexcept { return iso_sigma_unit_; }

  /// Stored atoms, symmetrized: both +theta and -theta with equal weight.
  const std::vector<SphericalAtom>& atoms() const noexcept { return atoms_; }
  /// One representative per symmetric pair, with its 1-D scale constant c(w)
  /// such that the pair contributes c(w)|theta.xi|^alpha to the exponent.
  const std::vector<SphericalAtom>& pair_representatives() const noexcept { return pairs_; }
  const std::vector<double>& pair_scale_constants() const noexcept { return pair_c_; }

  /// Levy exponent psi(xi): E exp(i xi.(L_{t+h}-L_t)) = exp(-h psi(xi)).
  /// Also the Fourier symbol of minus the generator.
  double symbol(std::span<const double> xi) const;

  /// Number of counter slots consumed by one increment.
  std::uint32_t slots() const noexcept;

  /// Increment over a step of length h drawn from cell (path, step) of rng.
  void increment(double h, const CounterRng& rng, std::uint32_t path, std::uint32_t step,
                 std::span<double> out) const;

  std::string describe() const;

 private:
  StableSpec() = default;

  double alpha_ = 0.5;
  int dim_ = 1;
  NoiseStructure structure_ = NoiseStructure::Cylindrical;
  std::vector<double> axis_scales_;
  double iso_scale_ = 1.0;
  double iso_sigma_unit_ = 0.0;
  std::vector<SphericalAtom> atoms_;
  std::vector<SphericalAtom> pairs_;
  std::vector<double> pair_c_;
};

/// I(alpha) = int_0^inf (1 - cos u) u^{-1-alpha} du evaluated by numerical
/// Fourier quadrature; the exponent of one symmetric atom pair of weight w is
/// 2 w I(alpha) |theta.xi|^alpha.
double levy_radial_integral(double alpha);

/// Calibrates sigma(1) for the isotropic subordinated sampler so that the
/// characteristic function at |xi|=1, h=1 equals exp(-1). Bisection on the
/// Rao-Blackwellized estimate mean_i exp(-sigma^2 S_i / 2) with a fixed
/// calibration stream.
double calibrate_isotropic_sigma(double alpha, std::size_t draws = std::size_t{1} << 20,
                                 double rel_tol = 1e-6);

/// Increment of L over [step*h, (step+1)*h] for the given path.
std::vector<double> increment(const StableSpec& spec, double h, std::uint32_t path,
                              std::uint32_t step, std::uint64_t seed);

struct NdReport {
  bool nondegenerate = false;
  int rank = 0;
  std::optional<std::vector<double>> null_direction;
};

/// Non-degeneracy of the spherical measure: the atom directions span R^d.
NdReport check_nd(const StableSpec& spec);

/// Fine-grid noise field. Cell (path j, fine step k) is a pure function of
/// (seed, j, k); nothing is stored.
class NoiseGrid {
 public:
  NoiseGrid(StableSpec spec, std::uint64_t seed, std::size_t n_paths, double horizon,
            std::size_t fine_steps);

  const StableSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  int dim() const noexcept { return spec_.dim(); }
  double horizon() const noexcept { return horizon_; }
  std::size_t fine_steps() const noexcept { return fine_steps_; }
  double h_min() const noexcept { return horizon_ / static_cast<double>(fine_steps_); }

  void fine_increment(std::size_t path, std::size_t step, std::span<double> out) const;

 private:
  StableSpec spec_;
  std::uint64_t seed_;
  std::size_t n_paths_;
  double horizon_;
  std::size_t fine_steps_;
  CounterRng rng_;
};

/// Dense table of increments: values[(path * steps + step) * dim + i].
struct IncrementTable {
  std::size_t n_paths = 0;
  std::size_t steps = 0;
  int dim = 1;
  double h = 0.0;
  std::vector<double> values;

  std::span<const double> at(std::size_t path, std::size_t step) const {
    return {values.data() + (path * steps + step) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

/// Coarse increments: cell k is the sum of fine cells [k r, (k+1) r) added in
/// fine-step order, r = fine_steps / coarse_steps. Throws std::invalid_argument
/// when coarse_steps does not divide fine_steps.
IncrementTable aggregate(const NoiseGrid& grid, std::size_t coarse_steps, int threads = 1);

/// Empirical E[|dL_h|^q ^ 1] per h with a log-log fit.
RateTable increment_moment_check(const StableSpec& spec, double q, std::span<const double> hs,
                                 std::size_t draws, std::uint64_t seed, int threads = 1);

/// Draws `count` increments of step h (paths 0..count-1, step 0) into a
/// count x dim row-major buffer.
std::vector<double> draw_increments(const StableSpec& spec, double h, std::size_t count,
                                    std::uint64_t seed, int threads = 1,
                                    std::uint32_t step = 0);

/// mean cos(xi . X) over rows of a count x dim sample.
double empirical_cf(std::span<const double> samples, int dim, std::span<const double> xi);

/// Hill estimator of the tail index from the largest `top_fraction` of |x|.
double hill_tail_index(std::span<const double> magnitudes, double top_fraction = 0.01);

}  // namespace mvlab
