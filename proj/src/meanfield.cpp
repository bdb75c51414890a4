#include "mvlab/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvlab/metrics.hpp"

namespace mvlab {

namespace {

SchemeConfig step_grid_config(const SchemeConfig& base, std::size_t steps) {
  SchemeConfig cfg = base;
  if (cfg.fine_steps % steps != 0) {
    throw std::invalid_argument("flow: step count must divide the fine step count");
  }
  cfg.checkpoints = steps;
  return cfg;
}

}  // namespace

MeasureFlow mv_euler_selfconsistent(std::size_t m, const Kernel& kernel, const StableSpec& spec,
                                    double horizon, std::size_t steps, std::uint64_t seed,
                                    const InitialLaw& init, const SchemeConfig& config) {
  auto traj = simulate(m, kernel, spec, horizon, steps, seed, init, step_grid_config(config, steps));
  MeasureFlow flow;
  flow.horizon = horizon;
  flow.steps = steps;
  flow.clouds = std::move(traj.clouds);
  flow.provenance = "self-consistent";
  return flow;
}

MeasureFlow constant_flow(std::size_t m, int dim, double horizon, std::size_t steps,
                          std::uint64_t seed, const InitialLaw& init) {
  if (steps == 0) throw std::invalid_argument("flow: step count must be >= 1");
  const Cloud c0(0.0, dim, draw_initial(init, m, dim, seed));
  MeasureFlow flow;
  flow.horizon = horizon;
  flow.steps = steps;
  flow.provenance = "initial";
  for (std::size_t k = 0; k <= steps; ++k) {
    flow.clouds.push_back(c0);
    flow.clouds.back().time = horizon * static_cast<double>(k) / static_cast<double>(steps);
  }
  return flow;
}

MeasureFlow picard_iterate(const MeasureFlow& prev, std::size_t m, const Kernel& kernel,
                           const StableSpec& spec, std::uint64_t seed, const InitialLaw& init,
                           const SchemeConfig& config) {
  const std::size_t steps = prev.steps;
  if (steps == 0 || prev.clouds.size() != steps + 1) {
    throw std::invalid_argument("picard: previous flow does not cover the step grid");
  }
  const int dim = spec.dim();
  const auto cfg = step_grid_config(config, steps);
  const auto x0 = draw_initial(init, m, dim, seed);
  const NoiseGrid grid(spec, seed, m, prev.horizon, cfg.fine_steps);
  std::vector<std::uint32_t> paths(m);
  for (std::size_t i = 0; i < m; ++i) paths[i] = static_cast<std::uint32_t>(i);

  const DriftOptions drift = cfg.drift;
  std::vector<EulerSystem> systems{
      {paths, steps, 0, [&](std::size_t k, std::span<const double> x, std::span<double> b) {
         DriftOperator(kernel, prev.clouds[k].positions, dim, drift).eval_all(x, b);
       }}};
  MeasureFlow next;
  next.horizon = prev.horizon;
  next.steps = steps;
  next.clouds.resize(steps + 1);
  run_lockstep(grid, x0, systems, kernel, drift, cfg.checkpoints,
               [&](std::size_t, std::size_t c, double t, std::span<const double> x) {
                 next.clouds[c] = Cloud(t, dim, std::vector<double>(x.begin(), x.end()));
               });
  const auto pos = prev.provenance.rfind(':');
  const std::size_t n =
      pos == std::string::npos ? 0 : std::stoul(prev.provenance.substr(pos + 1));
  next.provenance = "picard:" + std::to_string(n + 1);
  return next;
}

double flow_distance(const MeasureFlow& a, const MeasureFlow& b) {
  if (a.clouds.size() != b.clouds.size()) throw std::invalid_argument("flow distance: grids differ");
  double sup = 0.0;
  for (std::size_t k = 0; k < a.clouds.size(); ++k) {
    sup = std::max(sup, cloud_distance(a.clouds[k], b.clouds[k]));
  }
  return sup;
}

const char* to_string(PicardStatus s) noexcept {
  switch (s) {
    case PicardStatus::Converged:
      return "converged";
    case PicardStatus::MaxIterExceeded:
      return "max_iter_exceeded";
    case PicardStatus::BelowNoiseFloor:
      return "below_noise_floor";
  }
  return "?";
}

double picard_noise_floor(const Kernel& kernel, double horizon, std::size_t m) {
  return kernel.sup_norm() * horizon / std::sqrt(static_cast<double>(m));
}

PicardResult picard_solve(std::size_t m, const Kernel& kernel, const StableSpec& spec,
                          double horizon, std::size_t steps, std::uint64_t seed,
                          const InitialLaw& init, double tol, std::size_t max_iter,
                          const SchemeConfig& config) {
  if (!(tol > 0.0)) throw std::invalid_argument("picard: tol must be positive");
  if (max_iter == 0) throw std::invalid_argument("picard: max_iter must be >= 1");
  PicardResult result;
  result.noise_floor = picard_noise_floor(kernel, horizon, m);
  const bool resolvable = tol >= result.noise_floor;
  MeasureFlow prev = constant_flow(m, spec.dim(), horizon, steps, seed, init);
  for (std::size_t n = 1; n <= max_iter; ++n) {
    MeasureFlow next = picard_iterate(prev, m, kernel, spec, seed, init, config);
    result.history.push_back(flow_distance(next, prev));
    prev = std::move(next);
    if (resolvable && result.history.back() < tol) {
      result.status = PicardStatus::Converged;
      result.flow = std::move(prev);
      return result;
    }
  }
  result.status = resolvable ? PicardStatus::MaxIterExceeded : PicardStatus::BelowNoiseFloor;
  result.flow = std::move(prev);
  return result;
}

}  // namespace mvlab
