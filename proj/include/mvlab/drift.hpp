#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvlab/kernels.hpp"

namespace mvlab {

/// Evaluation strategy for x -> (K * eta)(x) against a fixed source cloud.
///
///   Pairwise  direct sum over sources in index order (reference)
///   Window    d = 1: sorted sources; exact sum over |x - X_i| < r_far plus
///             counted constant far-field contributions
///   Binned    d = 1: cloud-in-cell deposit, FFT convolution with the kernel
///             sampled on the grid, linear interpolation; targets outside the
///             bulk of the cloud fall back to the window sum. Approximate.
///   Auto      Pairwise for N <= 4096 or d > 1, Binned otherwise
enum class DriftMethod { Auto, Pairwise, Window, Binned };

struct DriftOptions {
  DriftMethod method = DriftMethod::Auto;
  int threads = 1;
  /// Half-period of a periodic box [-L, L)^d; 0 means free space. On the
  /// box, displacements are reduced to their nearest image.
  double period_half_length = 0.0;
};

const char* to_string(DriftMethod m) noexcept;

class DriftOperator {
 public:
  DriftOperator(const Kernel& kernel, std::span<const double> sources, int dim,
                DriftOptions options = {});

  DriftMethod method() const noexcept { return method_; }
  std::size_t n_sources() const noexcept { return n_; }

  void eval(std::span<const double> x, std::span<double> out) const;
  double eval1(double x) const;
  /// Drift at every row of a (count x d) target array.
  void eval_all(std::span<const double> targets, std::span<double> out) const;

 private:
  double pairwise1(double x) const;
  double window1(double x) const;
  double binned1(double x) const;
  void build_window();
  void build_binned();
  void build_binned_periodic();
  double wrap(double v) const noexcept;

  Kernel kernel_;
  int dim_;
  DriftOptions options_;
  DriftMethod method_ = DriftMethod::Pairwise;
  std::size_t n_ = 0;
  double inv_n_ = 0.0;
  std::vector<double> sources_;
  std::vector<double> sorted_;
  double far_radius_ = 0.0;
  double far_value_ = 0.0;
  // binned grid
  double grid_origin_ = 0.0;
  double grid_step_ = 0.0;
  double core_lo_ = 0.0;
  double core_hi_ = 0.0;
  double outside_term_ = 0.0;
  std::vector<double> grid_values_;
};

/// Kernel K restricted to the periodic box: K evaluated at the nearest image
/// of x, with the two-sided value 0 at the half-period in 1-D.
double periodic_kernel1(const Kernel& k, double x, double half_length) noexcept;

}  // namespace mvlab
