#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mvlab/cloud.hpp"
#include "mvlab/drift.hpp"
#include "mvlab/kernels.hpp"
#include "mvlab/rate_table.hpp"
#include "mvlab/stable_noise.hpp"

namespace mvlab {

enum class InitialKind { PointMass, UniformBox, Gaussian, Samples };

/// Law of X_0. Particle (path) j draws from cell j of the Initial stream,
/// so the same j gets the same starting point in every coupled system.
struct InitialLaw {
  InitialKind kind = InitialKind::PointMass;
  std::vector<double> center;   // empty: origin
  double spread = 0.0;          // box half-width or Gaussian standard deviation
  std::vector<double> samples;  // row-major rows of dimension d; path j takes row j mod rows

  static InitialLaw point_mass(std::vector<double> at = {});
  static InitialLaw uniform_box(double half_width, std::vector<double> center = {});
  static InitialLaw gaussian(double stddev, std::vector<double> center = {});
  static InitialLaw from_samples(std::vector<double> rows);
};

std::vector<double> draw_initial(const InitialLaw& law, std::size_t n, int dim,
                                 std::uint64_t seed);

struct Trajectory {
  std::vector<Cloud> clouds;  // one per checkpoint, first at t = 0

  std::size_t checkpoints() const noexcept { return clouds.size(); }
  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& c : clouds) t.push_back(c.time);
    return t;
  }
};

struct SchemeConfig {
  std::size_t fine_steps = 4096;  // h_min = T / fine_steps
  std::size_t checkpoints = 64;   // equally spaced observation times after 0
  DriftOptions drift;
};

/// One Euler step: X_j += (K * eta)(X_j) h + dL_j, drift from the pre-step cloud.
Cloud step_particle_euler(const Cloud& cloud, const Kernel& kernel, double h,
                          std::span<const double> increments, DriftOptions options = {});

/// Drift supplied from outside the system: b at coarse step k for the rows of x.
using ExternalDrift =
    std::function<void(std::size_t k, std::span<const double> x, std::span<double> b)>;

/// One Euler system advanced by run_lockstep. Particle i uses noise path and
/// initial point paths[i]. Without an external drift the particles interact
/// in consecutive groups of `group` (0: one group of all particles).
struct EulerSystem {
  std::vector<std::uint32_t> paths;
  std::size_t steps = 1;
  std::size_t group = 0;
  ExternalDrift external;
};

/// Called at every checkpoint with the system positions (rows of paths).
using CheckpointObserver = std::function<void(std::size_t system, std::size_t checkpoint,
                                              double t, std::span<const double> positions)>;

/// Advances all systems over the fine grid of `grid`, sharing its noise.
/// Positions are stored as X_0 + D + L with L the running fine-grid noise
/// sum common to every system and D the accumulated drift, so systems that
/// differ only in step size or interaction differ exactly through D.
void run_lockstep(const NoiseGrid& grid, std::span<const double> initial,
                  const std::vector<EulerSystem>& systems, const Kernel& kernel,
                  const DriftOptions& drift, std::size_t checkpoints,
                  const CheckpointObserver& observer);

/// N-particle Euler system with step T/steps; noise from a fine grid of
/// config.fine_steps cells, which steps must divide.
Trajectory simulate(std::size_t n, const Kernel& kernel, const StableSpec& spec, double horizon,
                    std::size_t steps, std::uint64_t seed, const InitialLaw& init,
                    const SchemeConfig& config = {});

struct CoupledLevels {
  std::vector<std::size_t> steps;  // level 0 is the finest (reference)
  std::vector<Trajectory> trajectories;
  RateTable table;                 // h vs E sup_t |X^h - X^ref|^p for levels 1..
};

/// Same N, same noise, several step sizes. The reference is the finest level.
CoupledLevels coupled_levels(std::size_t n, const Kernel& kernel, const StableSpec& spec,
                             double horizon, std::vector<std::size_t> steps, std::uint64_t seed,
                             const InitialLaw& init, double p = 2.0,
                             SchemeConfig config = {});

struct CoupledSizes {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<double>> sup_diff;  // per size, per path: sup_t |X^{N,j} - X^j|
  RateTable table;                            // N vs sqrt(E sup|.|^2)
};

/// N-particle systems for each N against i.i.d. copies X^j driven by the
/// same noise path j with drift (K * mu_{pi(s)}) read from the flow clouds
/// at the step grid (flow_clouds[k] at time k * T/steps). A pool of P paths
/// runs each N as P/N independent groups; pool 0 means the largest N.
CoupledSizes coupled_sizes(std::vector<std::size_t> sizes, const Kernel& kernel,
                           const StableSpec& spec, double horizon, std::size_t steps,
                           std::uint64_t seed, const std::vector<Cloud>& flow_clouds,
                           const InitialLaw& init, SchemeConfig config = {},
                           std::size_t pool = 0);

}  // namespace mvlab
