#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mvlab/cloud.hpp"

namespace mvlab {

enum class KernelKind { Zero, PowerCapped, GaussianGradient, Tabulated };

/// Bounded radial interaction kernel K(x) = g(|x|) x/|x|, K(0) = 0.
///
///   PowerCapped       g(r) = strength * min(r, R)^beta     (strength < 0 attracts)
///   GaussianGradient  K(x) = -x/w^2 exp(-|x|^2 / 2w^2)
///   Tabulated         g linear between samples (r_k, g_k), constant past r_max
class Kernel {
 public:
  static Kernel zero(int dim = 1);
  static Kernel power_capped(int dim, double beta, double cap, double strength);
  static Kernel gaussian_gradient(int dim, double width);
  static Kernel tabulated(int dim, std::vector<double> radii, std::vector<double> profile);

  KernelKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }
  double cap() const noexcept { return cap_; }
  double strength() const noexcept { return strength_; }
  double width() const noexcept { return width_; }

  /// Radial profile g(r), r >= 0.
  double profile(double r) const noexcept;

  /// sup |K|, rounded up so that averages of kernel values never exceed it.
  double sup_norm() const noexcept { return sup_; }

  /// Radius past which g is constant (for GaussianGradient: numerically zero).
  double far_radius() const noexcept;
  double far_value() const noexcept { return profile(far_radius()); }
  /// Grid spacing that resolves the profile for binned summation.
  double resolution() const noexcept;

  void eval(std::span<const double> x, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> x) const;
  /// d = 1 signed value K(x).
  double eval1(double x) const noexcept {
    if (x > 0.0) return profile(x);
    if (x < 0.0) return -profile(-x);
    return 0.0;
  }

  std::string describe() const;

 private:
  Kernel() = default;

  KernelKind kind_ = KernelKind::Zero;
  int dim_ = 1;
  double beta_ = 0.0;
  double cap_ = 1.0;
  double strength_ = 0.0;
  double width_ = 1.0;
  double capped_value_ = 0.0;
  std::vector<double> radii_;
  std::vector<double> values_;
  double sup_ = 0.0;
};

/// (K * eta)(x) = (1/N) sum_i K(x - X_i), summed in index order.
void convolve_empirical(const Kernel& k, const Cloud& cloud, std::span<const double> x,
                        std::span<double> out);
std::vector<double> convolve_empirical(const Kernel& k, const Cloud& cloud,
                                       std::span<const double> x);

/// Empirical sup |K(x) - K(y)| / |x - y|^beta over n_pairs deterministic
/// pairs in the box [-half_width, half_width]^d. Pair i does not depend on
/// n_pairs, so the estimate is nondecreasing in n_pairs. Half the pairs are
/// uniform, half are local with log-uniform separations down to 1e-8.
double holder_seminorm(const Kernel& k, double beta, double half_width, std::size_t n_pairs);

}  // namespace mvlab
