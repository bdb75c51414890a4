#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mvlab/kernels.hpp"
#include "mvlab/rate_table.hpp"
#include "mvlab/spectral.hpp"
#include "mvlab/stable_noise.hpp"

namespace mvlab {

/// C^infinity radial cutoff: 1 for r <= 1, 0 for r >= 3/2, exponential
/// smoothstep in between.
double lp_cutoff(double r) noexcept;

/// Dyadic masks on the grid wavenumbers xi = pi m / L:
/// psi_{-1}(xi) = chi(2 xi), psi_j(xi) = chi(2^{-j} xi) - chi(2^{1-j} xi).
/// masks[j + 1] holds psi_j at every flat FFT index; j_max = ceil(log2 |xi|_max).
struct BlockMasks {
  std::size_t n = 0;
  int dim = 1;
  double half_length = 1.0;
  int j_max = 0;
  std::vector<std::vector<double>> masks;

  int blocks() const noexcept { return j_max + 2; }
  const std::vector<double>& psi(int j) const { return masks.at(static_cast<std::size_t>(j + 1)); }
};

BlockMasks build_masks(std::size_t n, int dim, double half_length);

/// max over grid wavenumbers of |sum_j psi_j - 1|.
double partition_error(const BlockMasks& masks);

/// R_j f for j = -1..j_max (index j + 1).
std::vector<GridField> block_decompose(const GridField& f, const BlockMasks& masks);
std::vector<GridField> block_decompose(const GridField& f);

/// Grid L^p norm; p = infinity is the grid maximum, finite p uses the
/// periodic trapezoidal rule.
double grid_lp_norm(const GridField& f, double p);

/// Block norms ||R_j f||_p for j = -1..j_max.
struct BesovProfile {
  double p = 0.0;
  std::vector<int> j;
  std::vector<double> norms;
};

BesovProfile besov_profile(const GridField& f, double p);
BesovProfile besov_profile(const GridField& f, double p, const BlockMasks& masks);

/// sup_j 2^{s max(j,0)} ||R_j f||_p (the low block carries weight 1).
double besov_norm(const BesovProfile& profile, double s);
double besov_norm(const GridField& f, double s, double p);
/// sum_j 2^{s max(j,0)} ||R_j f||_p.
double besov_norm_l1(const BesovProfile& profile, double s);

struct BernsteinReport {
  std::vector<int> j;
  std::vector<double> ratio;  // ||grad^k R_j f||_p2 / (2^{(k + d(1/p1-1/p2)) j} ||R_j f||_p1)
  double max_ratio = 0.0;
  double constant = 0.0;
  bool pass = true;
};

/// Bernstein quotients per block; blocks with ||R_j f|| below 1e-13 of the
/// largest block are skipped. constant = 1.5 is sharp for p1 = p2 = infinity.
BernsteinReport bernstein_check(const GridField& f, int k, double p1, double p2,
                                double constant = 1.5);

struct InterpolationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double constant = 0.0;
  bool pass = true;
};

/// ||f||_{B^{theta s1 + (1-theta) s2}_{p,1}} against
/// ||f||^theta_{B^{s1}_{p,inf}} ||f||^{1-theta}_{B^{s2}_{p,inf}}, s1 > s2.
/// Default constant: the geometric-series bound
/// 1/(1-2^{-(1-theta) D}) + 1/(1-2^{-theta D}) + 1, D = s1 - s2.
InterpolationReport interpolation_check(const GridField& f, double s1, double s2, double theta,
                                        double p, std::optional<double> constant = {});

double interpolation_constant(double s1, double s2, double theta);

/// Weierstrass-type field sum_{k=0}^{k_max} 2^{-beta k} cos(2^k pi x / L).
GridField weierstrass_field(double half_length, std::size_t n, double beta, int k_max = -1);

/// Fields of u_t = -psi(D) u - lambda u + b.grad u + f at the requested times.
/// psi is the Levy exponent of `noise` (the symbol of minus the generator).
/// Strang splitting: exact multiplier half steps around an RK4 transport step
/// with 2/3-rule dealiasing. Requires h <= dx / (2 ||b||_inf) and every
/// requested time to be a multiple of h.
std::vector<GridField> linear_pde_evolve(const GridField& u0, const std::vector<GridField>& b,
                                         const GridField* f, double lambda,
                                         const StableSpec& noise, double h,
                                         const std::vector<double>& times);

struct SmoothingFit {
  std::vector<double> times;
  std::vector<double> norms;  // ||u(t)||_{B^{beta+gamma}_{inf,inf}}
  RateTable table;
  double exponent = 0.0;
};

/// Fits log ||u(t)||_{B^{beta+gamma}_{inf,inf}} against log t on
/// n_times log-spaced times in [T/64, T].
SmoothingFit smoothing_exponent_fit(const GridField& u0, const std::vector<GridField>& b,
                                    const StableSpec& noise, double beta, double gamma,
                                    double horizon, double h, std::size_t n_times = 13);

/// K sampled on the grid times a smooth window equal to 1 on |x| <= L/2
/// and vanishing at the box edge (1-D).
GridField windowed_kernel_field(const Kernel& k, double half_length, std::size_t n);

}  // namespace mvlab
