#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mvlab/particle.hpp"

namespace mvlab {

/// Law flow stored as M-point sample clouds at the step grid t_k = k T/steps.
struct MeasureFlow {
  double horizon = 0.0;
  std::size_t steps = 0;
  std::vector<Cloud> clouds;   // steps + 1 entries
  std::string provenance;      // "initial", "picard:<n>", "self-consistent"

  std::size_t points() const noexcept { return clouds.empty() ? 0 : clouds.front().size(); }
  double h() const noexcept { return horizon / static_cast<double>(steps); }
};

/// M-particle Euler system whose own empirical law supplies the drift; this
/// is particle::simulate with N = M, observed at every step.
MeasureFlow mv_euler_selfconsistent(std::size_t m, const Kernel& kernel, const StableSpec& spec,
                                    double horizon, std::size_t steps, std::uint64_t seed,
                                    const InitialLaw& init, const SchemeConfig& config = {});

/// mu^0: the initial cloud held constant in time.
MeasureFlow constant_flow(std::size_t m, int dim, double horizon, std::size_t steps,
                          std::uint64_t seed, const InitialLaw& init);

/// One Picard map: M independent Euler paths with the drift frozen to
/// (K * mu^{n-1}_{pi(s)}) from prev's clouds.
MeasureFlow picard_iterate(const MeasureFlow& prev, std::size_t m, const Kernel& kernel,
                           const StableSpec& spec, std::uint64_t seed, const InitialLaw& init,
                           const SchemeConfig& config = {});

/// sup over the step grid of the cloud distance (W1 in 1-D, sliced otherwise).
double flow_distance(const MeasureFlow& a, const MeasureFlow& b);

enum class PicardStatus { Converged, MaxIterExceeded, BelowNoiseFloor };

const char* to_string(PicardStatus s) noexcept;

struct PicardResult {
  MeasureFlow flow;
  std::vector<double> history;  // history[n-1] = sup_t W1(mu^n, mu^{n-1})
  PicardStatus status = PicardStatus::MaxIterExceeded;
  double noise_floor = 0.0;

  std::size_t iterations() const noexcept { return history.size(); }
};

/// Monte-Carlo resolution ||K||_inf T / sqrt(M) of flow distances.
double picard_noise_floor(const Kernel& kernel, double horizon, std::size_t m);

/// Iterates from mu^0 until the successive distance is below tol. A tol
/// under the noise floor is not resolvable: the iteration still runs to
/// max_iter and reports BelowNoiseFloor.
PicardResult picard_solve(std::size_t m, const Kernel& kernel, const StableSpec& spec,
                          double horizon, std::size_t steps, std::uint64_t seed,
                          const InitialLaw& init, double tol, std::size_t max_iter,
                          const SchemeConfig& config = {});

}  // namespace mvlab
