#include "mvlab/particle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvlab/metrics.hpp"
#include "mvlab/parallel.hpp"

namespace mvlab {

InitialLaw InitialLaw::point_mass(std::vector<double> at) {
  InitialLaw law;
  law.kind = InitialKind::PointMass;
  law.center = std::move(at);
  return law;
}

InitialLaw InitialLaw::uniform_box(double half_width, std::vector<double> center) {
  if (!(half_width > 0.0)) throw std::invalid_argument("uniform initial law needs half-width > 0");
  InitialLaw law;
  law.kind = InitialKind::UniformBox;
  law.spread = half_width;
  law.center = std::move(center);
  return law;
}

InitialLaw InitialLaw::gaussian(double stddev, std::vector<double> center) {
  if (!(stddev > 0.0)) throw std::invalid_argument("gaussian initial law needs stddev > 0");
  InitialLaw law;
  law.kind = InitialKind::Gaussian;
  law.spread = stddev;
  law.center = std::move(center);
  return law;
}

InitialLaw InitialLaw::from_samples(std::vector<double> rows) {
  if (rows.empty()) throw std::invalid_argument("sample initial law needs samples");
  InitialLaw law;
  law.kind = InitialKind::Samples;
  law.samples = std::move(rows);
  return law;
}

std::vector<double> draw_initial(const InitialLaw& law, std::size_t n, int dim,
                                 std::uint64_t seed) {
  const auto d = static_cast<std::size_t>(dim);
  if (!law.center.empty() && law.center.size() != d) {
    throw std::invalid_argument("initial law center has the wrong dimension");
  }
  std::vector<double> out(n * d, 0.0);
  const CounterRng rng(seed, Stream::Initial);
  if (law.kind == InitialKind::Samples && law.samples.size() % d != 0) {
    throw std::invalid_argument("initial samples are not whole d-vectors");
  }
  for (std::size_t j = 0; j < n; ++j) {
    const auto path = static_cast<std::uint32_t>(j);
    double* x = out.data() + j * d;
    switch (law.kind) {
      case InitialKind::PointMass:
        break;
      case InitialKind::UniformBox:
        for (std::size_t c = 0; c < d; ++c) {
          x[c] = law.spread * (2.0 * rng.uniforms(path, 0, static_cast<std::uint32_t>(c)).u0 - 1.0);
        }
        break;
      case InitialKind::Gaussian:
        for (std::size_t c = 0; c < d; c += 2) {
          const auto u = rng.uniforms(path, 0, static_cast<std::uint32_t>(c / 2));
          const auto z = box_muller(u.u0, u.u1);
          x[c] = law.spread * z.z0;
          if (c + 1 < d) x[c + 1] = law.spread * z.z1;
        }
        break;
      case InitialKind::Samples: {
        const std::size_t rows = law.samples.size() / d;
        std::copy_n(law.samples.data() + (j % rows) * d, d, x);
        break;
      }
    }
    if (!law.center.empty()) {
      for (std::size_t c = 0; c < d; ++c) x[c] += law.center[c];
    }
  }
  return out;
}

Cloud step_particle_euler(const Cloud& cloud, const Kernel& kernel, double h,
                          std::span<const double> increments, DriftOptions options) {
  if (increments.size() != cloud.positions.size()) {
    throw std::invalid_argument("euler step: increments do not match the cloud");
  }
  std::vector<double> b(cloud.positions.size());
  DriftOperator(kernel, cloud.positions, cloud.dim, options).eval_all(cloud.positions, b);
  Cloud next = cloud;
  next.time = cloud.time + h;
  for (std::size_t i = 0; i < b.size(); ++i) {
    next.positions[i] = cloud.positions[i] + b[i] * h + increments[i];
  }
  return next;
}

void run_lockstep(const NoiseGrid& grid, std::span<const double> initial,
                  const std::vector<EulerSystem>& systems, const Kernel& kernel,
                  const DriftOptions& drift, std::size_t checkpoints,
                  const CheckpointObserver& observer) {
  const std::size_t fine = grid.fine_steps();
  const std::size_t n_paths = grid.n_paths();
  const auto d = static_cast<std::size_t>(grid.dim());
  const double horizon = grid.horizon();
  if (initial.size() != n_paths * d) throw std::invalid_argument("lockstep: initial shape");
  if (checkpoints == 0 || fine % checkpoints != 0) {
    throw std::invalid_argument("lockstep: checkpoint count must divide the fine step count");
  }
  if (kernel.dim() != grid.dim()) throw std::invalid_argument("lockstep: kernel dimension");
  const std::size_t stride = fine / checkpoints;

  struct State {
    std::size_t ratio;
    double h;
    std::vector<double> D, b, x;
  };
  std::vector<State> state;
  for (const auto& sys : systems) {
    if (sys.steps == 0 || fine % sys.steps != 0) {
      throw std::invalid_argument("lockstep: step count must divide the fine step count");
    }
    const std::size_t n = sys.paths.size();
    if (n == 0) throw std::invalid_argument("lockstep: empty system");
    for (auto p : sys.paths) {
      if (p >= n_paths) throw std::invalid_argument("lockstep: path index outside the grid");
    }
    if (!sys.external && sys.group != 0 && n % sys.group != 0) {
      throw std::invalid_argument("lockstep: group size must divide the particle count");
    }
    state.push_back({fine / sys.steps, horizon / static_cast<double>(sys.steps),
                     std::vector<double>(n * d, 0.0), std::vector<double>(n * d, 0.0),
                     std::vector<double>(n * d, 0.0)});
  }

  std::vector<double> L(n_paths * d, 0.0), inc(n_paths * d, 0.0);
  const double h_min = grid.h_min();

  for (std::size_t f = 0; f <= fine; ++f) {
    const double t = horizon * static_cast<double>(f) / static_cast<double>(fine);
    for (std::size_t s = 0; s < systems.size(); ++s) {
      const auto& sys = systems[s];
      auto& st = state[s];
      const std::size_t n = sys.paths.size();
      const bool boundary = f % st.ratio == 0;
      const bool observe = f % stride == 0;
      if (!boundary && !observe) continue;
      if (boundary && f > 0) {
        for (std::size_t i = 0; i < n * d; ++i) st.D[i] += st.b[i] * st.h;
      }
      const double lag = boundary ? 0.0 : static_cast<double>(f % st.ratio) * h_min;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = sys.paths[i];
        for (std::size_t c = 0; c < d; ++c) {
          const double D = boundary ? st.D[i * d + c] : st.D[i * d + c] + st.b[i * d + c] * lag;
          st.x[i * d + c] = initial[p * d + c] + D + L[p * d + c];
        }
      }
      if (observe && observer) observer(s, f / stride, t, st.x);
      if (!boundary || f == fine) continue;
      const std::size_t k = f / st.ratio;
      if (sys.external) {
        sys.external(k, st.x, st.b);
        continue;
      }
      const std::size_t group = sys.group == 0 ? n : sys.group;
      const std::size_t groups = n / group;
      if (groups == 1) {
        DriftOperator(kernel, st.x, grid.dim(), drift).eval_all(st.x, st.b);
      } else {
        DriftOptions serial = drift;
        serial.threads = 1;
        parallel_for(groups, drift.threads, [&](std::size_t g) {
          const auto x = std::span<const double>(st.x).subspan(g * group * d, group * d);
          const auto b = std::span<double>(st.b).subspan(g * group * d, group * d);
          DriftOperator(kernel, x, grid.dim(), serial).eval_all(x, b);
        });
      }
    }
    if (f == fine) break;
    parallel_for(n_paths, drift.threads, [&](std::size_t p) {
      grid.fine_increment(p, f, std::span<double>(inc.data() + p * d, d));
    });
    for (std::size_t i = 0; i < L.size(); ++i) L[i] += inc[i];
  }
}

namespace {

Cloud make_cloud(double t, int dim, std::span<const double> x, std::span<const std::uint32_t> ids) {
  Cloud c(t, dim, std::vector<double>(x.begin(), x.end()));
  c.ids.assign(ids.begin(), ids.end());
  return c;
}

std::vector<std::uint32_t> iota_paths(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i);
  return p;
}

}  // namespace

Trajectory simulate(std::size_t n, const Kernel& kernel, const StableSpec& spec, double horizon,
                    std::size_t steps, std::uint64_t seed, const InitialLaw& init,
                    const SchemeConfig& config) {
  if (n == 0) throw std::invalid_argument("simulate: N must be >= 1");
  if (horizon < 0.0) throw std::invalid_argument("simulate: negative horizon");
  const int dim = spec.dim();
  const auto x0 = draw_initial(init, n, dim, seed);
  const auto paths = iota_paths(n);
  Trajectory traj;
  if (horizon == 0.0) {
    traj.clouds.push_back(make_cloud(0.0, dim, x0, paths));
    return traj;
  }
  if (steps == 0 || config.fine_steps % steps != 0) {
    throw std::invalid_argument("simulate: step count must divide the fine step count");
  }
  const NoiseGrid grid(spec, seed, n, horizon, config.fine_steps);
  std::vector<EulerSystem> systems{{paths, steps, 0, {}}};
  traj.clouds.resize(config.checkpoints + 1);
  run_lockstep(grid, x0, systems, kernel, config.drift, config.checkpoints,
               [&](std::size_t, std::size_t c, double t, std::span<const double> x) {
                 traj.clouds[c] = make_cloud(t, dim, x, paths);
               });
  return traj;
}

CoupledLevels coupled_levels(std::size_t n, const Kernel& kernel, const StableSpec& spec,
                             double horizon, std::vector<std::size_t> steps, std::uint64_t seed,
                             const InitialLaw& init, double p, SchemeConfig config) {
  if (steps.empty()) throw std::invalid_argument("coupled_levels: empty step list");
  std::sort(steps.begin(), steps.end(), std::greater<>());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  const std::size_t fine = steps.front();
  for (auto s : steps) {
    if (s == 0 || fine % s != 0) {
      throw std::invalid_argument("coupled_levels: every step count must divide the finest");
    }
  }
  const int dim = spec.dim();
  const auto x0 = draw_initial(init, n, dim, seed);
  const auto paths = iota_paths(n);
  const NoiseGrid grid(spec, seed, n, horizon, fine);

  CoupledLevels out;
  out.steps = steps;
  out.table.name = "euler_strong";
  out.table.parameter_name = "h";
  std::vector<EulerSystem> systems;
  for (auto s : steps) systems.push_back({paths, s, 0, {}});
  out.trajectories.assign(steps.size(), Trajectory{});
  for (auto& tr : out.trajectories) tr.clouds.resize(config.checkpoints + 1);
  run_lockstep(grid, x0, systems, kernel, config.drift, config.checkpoints,
               [&](std::size_t s, std::size_t c, double t, std::span<const double> x) {
                 out.trajectories[s].clouds[c] = make_cloud(t, dim, x, paths);
               });
  bool positive = true;
  for (std::size_t l = 1; l < steps.size(); ++l) {
    const auto stat = strong_error_stats(out.trajectories[l], out.trajectories[0], p);
    out.table.add(horizon / static_cast<double>(steps[l]), stat.mean, stat.std_error);
    positive = positive && stat.mean > 0.0;
  }
  if (positive && out.table.records.size() >= 3) fit_in_place(out.table);
  return out;
}

CoupledSizes coupled_sizes(std::vector<std::size_t> sizes, const Kernel& kernel,
                           const StableSpec& spec, double horizon, std::size_t steps,
                           std::uint64_t seed, const std::vector<Cloud>& flow_clouds,
                           const InitialLaw& init, SchemeConfig config, std::size_t pool) {
  if (sizes.empty()) throw std::invalid_argument("coupled_sizes: empty size list");
  if (flow_clouds.size() != steps + 1) {
    throw std::invalid_argument("coupled_sizes: flow does not cover the step grid");
  }
  const int dim = spec.dim();
  for (const auto& c : flow_clouds) {
    if (c.dim != dim || c.empty()) throw std::invalid_argument("coupled_sizes: flow cloud shape");
  }
  std::sort(sizes.begin(), sizes.end());
  const std::size_t n_max = pool == 0 ? sizes.back() : pool;
  for (auto n : sizes) {
    if (n == 0 || n_max % n != 0) {
      throw std::invalid_argument("coupled_sizes: pool must be a multiple of every size");
    }
  }
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t checkpoints = std::min(config.checkpoints, steps);
  if (steps % checkpoints != 0) {
    throw std::invalid_argument("coupled_sizes: checkpoints must divide the step count");
  }
  const auto x0 = draw_initial(init, n_max, dim, seed);
  const NoiseGrid grid(spec, seed, n_max, horizon, steps);

  std::vector<EulerSystem> systems;
  const DriftOptions drift = config.drift;
  systems.push_back({iota_paths(n_max), steps, 0,
                     [&](std::size_t k, std::span<const double> x, std::span<double> b) {
                       DriftOperator(kernel, flow_clouds[k].positions, dim, drift).eval_all(x, b);
                     }});
  for (auto n : sizes) systems.push_back({iota_paths(n_max), steps, n == n_max ? 0 : n, {}});

  CoupledSizes out;
  out.sizes = sizes;
  out.sup_diff.assign(sizes.size(), {});
  for (std::size_t i = 0; i < sizes.size(); ++i) out.sup_diff[i].assign(n_max, 0.0);
  std::vector<double> limit(n_max * d);
  run_lockstep(grid, x0, systems, kernel, drift, checkpoints,
               [&](std::size_t s, std::size_t, double, std::span<const double> x) {
                 if (s == 0) {
                   std::copy(x.begin(), x.end(), limit.begin());
                   return;
                 }
                 auto& sup = out.sup_diff[s - 1];
                 for (std::size_t j = 0; j < sup.size(); ++j) {
                   double r2 = 0.0;
                   for (std::size_t c = 0; c < d; ++c) {
                     const double v = x[j * d + c] - limit[j * d + c];
                     r2 += v * v;
                   }
                   sup[j] = std::max(sup[j], std::sqrt(r2));
                 }
               });
  out.table.name = "poc_strong";
  out.table.parameter_name = "N";
  bool positive = true;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    double m = 0.0, m2 = 0.0;
    for (double v : out.sup_diff[i]) {
      m += v * v;
      m2 += v * v * v * v;
    }
    const double cnt = static_cast<double>(out.sup_diff[i].size());
    m /= cnt;
    const double var = std::max(0.0, m2 / cnt - m * m);
    const double rms = std::sqrt(m);
    const double se = rms > 0.0 ? std::sqrt(var / cnt) / (2.0 * rms) : 0.0;
    out.table.add(static_cast<double>(sizes[i]), rms, se);
    positive = positive && rms > 0.0;
  }
  if (positive && out.table.records.size() >= 3) fit_in_place(out.table);
  return out;
}

}  // namespace mvlab
