#pragma once

#include <cstddef>
#include <vector>

#include "mvlab/cloud.hpp"
#include "mvlab/kernels.hpp"
#include "mvlab/spectral.hpp"
#include "mvlab/stable_noise.hpp"

namespace mvlab {

/// Density on the periodic box with its conservation diagnostics.
struct DensityField {
  GridField rho;
  double initial_mass = 0.0;
  double mass = 0.0;
  double min_value = 0.0;
  std::size_t steps = 0;

  double mass_drift() const noexcept { return mass - initial_mass; }
};

/// Normalized Gaussian density (mass 1 in the grid quadrature).
GridField gaussian_density(double half_length, std::size_t n, int dim, double sigma);
/// Dirac mass at the origin approximated by a Gaussian of width 4 dx.
GridField dirac_density(double half_length, std::size_t n, int dim);
double dirac_width(double half_length, std::size_t n) noexcept;

/// Pseudo-spectral solver of
///   d/dt rho = -psi(D) rho - div((K * rho) rho)
/// on [-L, L)^d, d in {1, 2}. K is periodized by nearest images. Strang
/// splitting: exact multiplier half steps and an RK4 step for the
/// conservative transport with 2/3-rule dealiasing.
class FpeSolver {
 public:
  FpeSolver(const Kernel& kernel, const StableSpec& noise, GridField rho0);

  const DensityField& state() const noexcept { return state_; }
  double time() const noexcept { return time_; }

  /// One step; requires h <= dx / (2 ||K||_inf).
  void step(double h);
  void advance(double horizon, double h);

  /// v = K * rho on the grid, one field per dimension.
  std::vector<GridField> velocity() const;

 private:
  void transport_rhs(const std::vector<std::complex<double>>& rho_hat,
                     std::vector<std::complex<double>>& out) const;
  void refresh(const std::vector<std::complex<double>>& rho_hat);

  Kernel kernel_;
  StableSpec noise_;
  DensityField state_;
  double time_ = 0.0;
  int dim_;
  std::size_t total_;
  std::vector<std::vector<std::complex<double>>> kernel_hat_;
  std::vector<std::vector<double>> xi_;
  std::vector<double> symbol_;
  std::vector<double> keep_;
  std::complex<double> zero_mode_;
  mutable FftPlan plan_;
};

/// W1 on the box between the particle marginal (positions reduced into the
/// box) and the density, whose quantile function is sampled at the
/// particle count. In 2-D: mean of the two coordinate-marginal distances.
double compare_with_particles(const GridField& rho, const Cloud& cloud);

}  // namespace mvlab
