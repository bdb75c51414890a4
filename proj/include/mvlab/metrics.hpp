#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mvlab/cloud.hpp"
#include "mvlab/particle.hpp"
#include "mvlab/rate_table.hpp"

namespace mvlab {

/// Exact 1-D Wasserstein-1 by sorted matching; unequal sizes compare 1024
/// midpoint quantiles.
double w1_1d(std::span<const double> a, std::span<const double> b);

/// Mean over seeded random unit directions of w1_1d of the projections.
double sliced_w1(const Cloud& a, const Cloud& b, std::size_t n_directions, std::uint64_t seed);

/// W1 for d = 1, sliced W1 (64 directions) otherwise.
double cloud_distance(const Cloud& a, const Cloud& b, std::uint64_t seed = 7);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// Fourier features phi_k(x) = cos(w_k.x + b_k) / (1 + 2^{1-beta} |w_k|^beta),
/// an inner approximation of the unit C^beta ball. Feature k depends only on
/// (seed, k), so dictionaries with more features contain the smaller ones.
class FeatureDictionary {
 public:
  FeatureDictionary(int dim, double beta, std::size_t n_features, std::uint64_t seed,
                    double max_frequency = 64.0);

  int dim() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }
  std::size_t size() const noexcept { return phase_.size(); }

  double feature(std::size_t k, std::span<const double> x) const;
  std::span<const double> frequency(std::size_t k) const {
    return {freq_.data() + k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  /// Lipschitz constant |w_k| / (1 + 2^{1-beta}|w_k|^beta) of feature k.
  double lipschitz(std::size_t k) const;
  /// Largest ||phi||_inf + [phi]_beta measured on a dense slice at construction.
  double validated_norm() const noexcept { return validated_norm_; }

 private:
  int dim_;
  double beta_;
  std::vector<double> freq_;
  std::vector<double> phase_;
  std::vector<double> norm_;
  double validated_norm_ = 0.0;
};

/// max_k |mean_a phi_k - mean_b phi_k|, a lower bound on ||mu_a - mu_b||_{beta,var}.
double dual_beta_var(const Cloud& a, const Cloud& b, const FeatureDictionary& dict,
                     int threads = 1);

/// Per-path sup over checkpoints of |X_a - X_b|.
std::vector<double> sup_differences(const Trajectory& a, const Trajectory& b);

struct MeanWithError {
  double mean = 0.0;
  double std_error = 0.0;
};

/// mean over paths of (sup over checkpoints |X_a - X_b|)^p.
double strong_error(const Trajectory& a, const Trajectory& b, double p);
MeanWithError strong_error_stats(const Trajectory& a, const Trajectory& b, double p);

}  // namespace mvlab
