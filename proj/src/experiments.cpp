#include "mvlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "mvlab/fpe_oracle.hpp"
#include "mvlab/io.hpp"
#include "mvlab/lp_besov.hpp"
#include "mvlab/meanfield.hpp"
#include "mvlab/metrics.hpp"
#include "mvlab/particle.hpp"

#ifndef MVLAB_VERSION
#define MVLAB_VERSION "0.0.0"
#endif

namespace mvlab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Independent seed for the mean-field flow so it shares no noise with the
// particle systems that read it.
std::uint64_t flow_seed(std::uint64_t seed) { return seed ^ 0x666c6f77ull; }

bool decreasing(const std::vector<double>& v, double slack = 0.0) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1] + slack)) return false;
  }
  return true;
}

std::vector<double> errors_of(const RateTable& t) {
  std::vector<double> e;
  for (const auto& r : t.records) e.push_back(r.error);
  return e;
}

std::optional<double> slope_of(const RateTable& t) {
  if (t.fit) return t.fit->slope;
  return std::nullopt;
}

void label_regime(const ExperimentConfig& cfg, RunReport& r, bool strong) {
  if (strong && !cfg.strong_regime()) {
    r.labels.push_back("out-of-theory: beta <= 1 - alpha/2 (strong regime)");
  }
  if (!strong && !cfg.weak_regime()) {
    r.labels.push_back("out-of-theory: beta <= 1 - alpha (weak regime)");
  }
}

std::vector<std::uint32_t> iota_paths(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  return p;
}

void try_fit(RateTable& t) {
  if (t.records.size() < 3) return;
  for (const auto& r : t.records) {
    if (!(r.error > 0.0)) return;
  }
  fit_in_place(t);
}

void write_csv(const std::filesystem::path& file, const CsvTable& t) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

}  // namespace

bool RunReport::passed() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.second; });
}

const RateTable& RunReport::table(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::out_of_range("no table " + name);
}

RunReport cmd_sample_noise(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "sample_noise";
  const auto spec = cfg.make_noise();
  const int d = spec.dim();
  const auto du = static_cast<std::size_t>(d);

  auto t0 = Clock::now();
  const auto draws = draw_increments(spec, 1.0, cfg.cf_draws, cfg.seed, cfg.threads);
  CsvTable cf{"cf", {"xi", "empirical", "target", "abs_error"}, {}};
  double worst = 0.0;
  for (double x : cfg.xi) {
    std::vector<double> probe(du, 0.0);
    probe[0] = x;
    const double emp = empirical_cf(draws, d, probe);
    const double target = std::exp(-spec.symbol(probe));
    worst = std::max(worst, std::abs(emp - target));
    cf.rows.push_back({x, emp, target, std::abs(emp - target)});
  }
  std::vector<double> mags(cfg.cf_draws);
  for (std::size_t i = 0; i < cfg.cf_draws; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < du; ++c) s += draws[i * du + c] * draws[i * du + c];
    mags[i] = std::sqrt(s);
  }
  const double hill = hill_tail_index(mags, 0.01);
  r.metrics["cf_max_error"] = worst;
  r.metrics["hill_index"] = hill;
  r.flags["cf_within_0.01"] = worst < 0.01;
  r.flags["hill_within_0.1"] = std::abs(hill - spec.alpha()) < 0.1;
  r.extra.push_back(std::move(cf));

  // Self-similarity against an independent block of step-1 draws.
  const std::size_t n_ks = std::min<std::size_t>(cfg.moment_draws, cfg.cf_draws);
  const double h_ks = 1.0 / 64.0;
  const auto small = draw_increments(spec, h_ks, n_ks, cfg.seed, cfg.threads, 1);
  const auto unit = draw_increments(spec, 1.0, n_ks, cfg.seed, cfg.threads, 2);
  std::vector<double> a(n_ks), b(n_ks);
  const double scale = std::pow(h_ks, -1.0 / spec.alpha());
  for (std::size_t i = 0; i < n_ks; ++i) {
    a[i] = small[i * du] * scale;
    b[i] = unit[i * du];
  }
  const double ks = ks_distance(a, b);
  r.metrics["self_similarity_ks"] = ks;
  r.flags["self_similarity_ks_below_0.01"] = ks < 0.01;
  r.runtimes["law_seconds"] = seconds_since(t0);

  t0 = Clock::now();
  std::vector<double> hs;
  for (int k : cfg.moment_levels) hs.push_back(std::ldexp(1.0, -k));
  for (double q : cfg.moment_q) {
    auto table = increment_moment_check(spec, q, hs, cfg.moment_draws, cfg.seed, cfg.threads);
    table.name = "moments_q" + format_double(q);
    if (table.fit) {
      const double s = table.fit->slope;
      if (q < spec.alpha()) {
        r.flags["moment_slope_q" + format_double(q)] = std::abs(s - q / spec.alpha()) <= 0.1;
      } else if (q > spec.alpha()) {
        r.flags["moment_slope_q" + format_double(q)] = std::abs(s - 1.0) <= 0.15;
      }
    }
    r.tables.push_back(std::move(table));
  }
  r.runtimes["moments_seconds"] = seconds_since(t0);
  return r;
}

RunReport cmd_rates_euler_strong(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "rates_euler_strong";
  label_regime(cfg, r, true);
  if (cfg.sizes.empty()) throw ConfigError("rates_euler_strong needs one size");
  auto levels = cfg.steps;
  levels.push_back(cfg.reference_steps);
  const auto out = coupled_levels(cfg.sizes.front(), cfg.make_kernel(), cfg.make_noise(),
                                  cfg.horizon, levels, cfg.seed, cfg.make_initial(), cfg.p,
                                  cfg.scheme(cfg.reference_steps, cfg.checkpoints));
  RateTable table = out.table;
  const auto e = errors_of(table);
  const bool exact = !e.empty() && std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
  if (exact) {
    r.flags["exact"] = true;
  } else {
    r.flags["monotone"] = std::is_sorted(e.begin(), e.end()) &&
                          std::adjacent_find(e.begin(), e.end()) == e.end();
    if (table.fit) {
      r.flags["slope_ge_0.8"] = table.fit->slope >= 0.8;
      r.flags["r2_ge_0.9"] = table.fit->r2 >= 0.9;
    } else {
      r.flags["fit_available"] = false;
    }
  }
  r.tables.push_back(std::move(table));
  return r;
}

RunReport cmd_rates_euler_weak(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "rates_euler_weak";
  label_regime(cfg, r, false);
  auto levels = cfg.steps;
  levels.push_back(cfg.reference_steps);
  const auto kernel = cfg.make_kernel();
  const auto out = coupled_levels(cfg.points, kernel, cfg.make_noise(), cfg.horizon, levels,
                                  cfg.seed, cfg.make_initial(), cfg.p,
                                  cfg.scheme(cfg.reference_steps, cfg.checkpoints));
  const FeatureDictionary dict(cfg.dim, cfg.beta, 256, cfg.seed);
  RateTable w1{"euler_weak_w1", "h", {}, {}};
  RateTable dual{"euler_weak_dual", "h", {}, {}};
  const auto& ref = out.trajectories.front();
  for (std::size_t l = 1; l < out.steps.size(); ++l) {
    const auto& tr = out.trajectories[l];
    double sup = 0.0;
    for (std::size_t c = 0; c < tr.clouds.size(); ++c) {
      sup = std::max(sup, cloud_distance(tr.clouds[c], ref.clouds[c], cfg.seed));
    }
    const double h = cfg.horizon / static_cast<double>(out.steps[l]);
    w1.add(h, sup);
    dual.add(h, dual_beta_var(tr.clouds.back(), ref.clouds.back(), dict, cfg.threads));
  }
  try_fit(w1);
  try_fit(dual);
  const auto e = errors_of(w1);
  const bool exact = !e.empty() && std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; });
  if (exact) {
    r.flags["exact"] = true;
  } else {
    r.flags["monotone"] = std::is_sorted(e.begin(), e.end()) &&
                          std::adjacent_find(e.begin(), e.end()) == e.end();
    r.flags["w1_slope_ge_0.5"] = w1.fit && w1.fit->slope >= 0.5;
  }
  r.tables.push_back(out.table);
  r.tables.push_back(std::move(w1));
  r.tables.push_back(std::move(dual));
  return r;
}

namespace {

PicardResult limit_flow(const ExperimentConfig& cfg, const Kernel& kernel, const StableSpec& spec,
                        std::size_t steps) {
  return picard_solve(cfg.points, kernel, spec, cfg.horizon, steps, flow_seed(cfg.seed),
                      cfg.make_initial(), cfg.tol, cfg.max_iter, cfg.scheme(steps, steps));
}

void record_flow(RunReport& r, const PicardResult& flow) {
  r.metrics["flow_status"] = to_string(flow.status);
  r.metrics["flow_history"] = flow.history;
  r.metrics["flow_noise_floor"] = flow.noise_floor;
  r.flags["flow_converged"] = flow.status == PicardStatus::Converged;
}

}  // namespace

RunReport cmd_poc_strong(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "poc_strong";
  label_regime(cfg, r, true);
  if (cfg.sizes.empty() || cfg.steps.empty()) throw ConfigError("poc_strong needs sizes and steps");
  const std::size_t steps = cfg.steps.front();
  const auto kernel = cfg.make_kernel();
  const auto spec = cfg.make_noise();
  auto t0 = Clock::now();
  const auto flow = limit_flow(cfg, kernel, spec, steps);
  record_flow(r, flow);
  r.runtimes["flow_seconds"] = seconds_since(t0);
  t0 = Clock::now();
  const auto out = coupled_sizes(cfg.sizes, kernel, spec, cfg.horizon, steps, cfg.seed,
                                 flow.flow.clouds, cfg.make_initial(),
                                 cfg.scheme(steps, cfg.checkpoints), cfg.pool);
  r.runtimes["particles_seconds"] = seconds_since(t0);
  const auto e = errors_of(out.table);
  const double bound = 2.0 * kernel.sup_norm() * cfg.horizon;
  bool bounded = true;
  for (const auto& s : out.sup_diff) {
    for (double v : s) bounded = bounded && v <= bound;
  }
  r.flags["bounded_by_2KT"] = bounded;
  if (std::all_of(e.begin(), e.end(), [](double v) { return v == 0.0; })) {
    r.flags["exact"] = true;
  } else if (e.size() >= 2) {
    r.flags["strictly_decreasing"] = decreasing(e);
    if (e.size() >= 3) r.flags["slope_le_-0.3"] = out.table.fit && out.table.fit->slope <= -0.3;
  }
  r.tables.push_back(out.table);
  return r;
}

RunReport cmd_poc_weak(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "poc_weak";
  label_regime(cfg, r, false);
  if (cfg.sizes.empty() || cfg.steps.empty()) throw ConfigError("poc_weak needs sizes and steps");
  auto sizes = cfg.sizes;
  std::sort(sizes.begin(), sizes.end());
  for (auto n : sizes) {
    if (cfg.pool % n != 0) throw ConfigError("pool must be a multiple of every size");
  }
  const std::size_t steps = cfg.steps.front();
  const auto kernel = cfg.make_kernel();
  const auto spec = cfg.make_noise();
  const int dim = spec.dim();
  auto t0 = Clock::now();
  const auto flow = limit_flow(cfg, kernel, spec, steps);
  record_flow(r, flow);
  r.runtimes["flow_seconds"] = seconds_since(t0);

  t0 = Clock::now();
  const auto init = cfg.make_initial();
  const auto x0 = draw_initial(init, cfg.pool, dim, cfg.seed);
  const NoiseGrid grid(spec, cfg.seed, cfg.pool, cfg.horizon, steps);
  const auto paths = iota_paths(cfg.pool);
  DriftOptions drift = cfg.scheme(steps, 1).drift;
  std::vector<EulerSystem> systems;
  systems.push_back({paths, steps, 0,
                     [&](std::size_t k, std::span<const double> x, std::span<double> b) {
                       DriftOperator(kernel, flow.flow.clouds[k].positions, dim, drift)
                           .eval_all(x, b);
                     }});
  for (auto n : sizes) systems.push_back({paths, steps, n, {}});
  std::vector<Cloud> final(systems.size());
  run_lockstep(grid, x0, systems, kernel, drift, 1,
               [&](std::size_t s, std::size_t c, double t, std::span<const double> x) {
                 if (c == 1) final[s] = Cloud(t, dim, std::vector<double>(x.begin(), x.end()));
               });
  r.runtimes["particles_seconds"] = seconds_since(t0);

  const FeatureDictionary dict(dim, cfg.beta, 256, cfg.seed);
  RateTable w1{"poc_weak_w1", "N", {}, {}};
  RateTable dual{"poc_weak_dual", "N", {}, {}};
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double n = static_cast<double>(sizes[i]);
    w1.add(n, cloud_distance(final[i + 1], final[0], cfg.seed));
    dual.add(n, dual_beta_var(final[i + 1], final[0], dict, cfg.threads));
  }
  try_fit(w1);
  try_fit(dual);
  const auto e = errors_of(w1);
  if (e.size() >= 2) r.flags["decreasing"] = decreasing(e);
  if (e.size() >= 3) r.flags["slope_le_-0.25"] = w1.fit && w1.fit->slope <= -0.25;
  r.tables.push_back(std::move(w1));
  r.tables.push_back(std::move(dual));
  return r;
}

RunReport cmd_commute(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "commute";
  label_regime(cfg, r, false);
  auto sizes = cfg.sizes;
  auto steps = cfg.steps;
  if (sizes.empty() || steps.empty()) throw ConfigError("commute needs sizes and steps");
  std::sort(sizes.begin(), sizes.end());
  std::sort(steps.begin(), steps.end());
  for (auto n : sizes) {
    if (cfg.pool % n != 0) throw ConfigError("pool must be a multiple of every size");
  }
  const std::size_t fine = steps.back();
  for (auto s : steps) {
    if (fine % s != 0) throw ConfigError("every step count must divide the finest");
  }
  const auto kernel = cfg.make_kernel();
  const auto spec = cfg.make_noise();
  const int dim = spec.dim();
  const auto x0 = draw_initial(cfg.make_initial(), cfg.pool, dim, cfg.seed);
  const NoiseGrid grid(spec, cfg.seed, cfg.pool, cfg.horizon, fine);
  const auto paths = iota_paths(cfg.pool);

  std::vector<EulerSystem> systems;
  for (auto n : sizes) {
    for (auto s : steps) systems.push_back({paths, s, n, {}});
  }
  // The corner again with every group drawn across the original groups.
  const std::size_t n_max = sizes.back();
  const std::size_t groups = cfg.pool / n_max;
  std::vector<std::uint32_t> regrouped(cfg.pool);
  for (std::size_t i = 0; i < cfg.pool; ++i) {
    regrouped[i] = static_cast<std::uint32_t>((i % n_max) * groups + i / n_max);
  }
  systems.push_back({regrouped, fine, n_max, {}});

  auto t0 = Clock::now();
  std::vector<Cloud> final(systems.size());
  run_lockstep(grid, x0, systems, kernel, cfg.scheme(fine, 1).drift, 1,
               [&](std::size_t s, std::size_t c, double t, std::span<const double> x) {
                 if (c == 1) final[s] = Cloud(t, dim, std::vector<double>(x.begin(), x.end()));
               });
  r.runtimes["particles_seconds"] = seconds_since(t0);

  const std::size_t corner = sizes.size() * steps.size() - 1;
  const double floor = cloud_distance(final.back(), final[corner], cfg.seed);
  CsvTable matrix{"commute", {"N", "steps", "h", "w1"}, {}};
  std::vector<std::vector<double>> dist(sizes.size(), std::vector<double>(steps.size()));
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const double v = cloud_distance(final[i * steps.size() + k], final[corner], cfg.seed);
      dist[i][k] = v;
      matrix.rows.push_back({static_cast<double>(sizes[i]), static_cast<double>(steps[k]),
                             cfg.horizon / static_cast<double>(steps[k]), v});
    }
  }
  const double slack = 2.0 * floor;
  bool rows = true, cols = true;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    std::vector<double> col;
    for (std::size_t i = 0; i < sizes.size(); ++i) col.push_back(dist[i][k]);
    rows = rows && decreasing(col, slack);
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) cols = cols && decreasing(dist[i], slack);
  r.metrics["noise_floor"] = floor;
  r.metrics["matrix"] = dist;
  r.flags["decreasing_in_N"] = rows;
  r.flags["decreasing_in_h"] = cols;
  r.extra.push_back(std::move(matrix));
  return r;
}

RunReport cmd_picard(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "picard";
  label_regime(cfg, r, false);
  if (cfg.steps.empty()) throw ConfigError("picard needs steps");
  const std::size_t steps = cfg.steps.front();
  const auto kernel = cfg.make_kernel();
  const auto spec = cfg.make_noise();
  const auto init = cfg.make_initial();
  const auto scheme = cfg.scheme(steps, steps);
  const auto result = picard_solve(cfg.points, kernel, spec, cfg.horizon, steps, cfg.seed, init,
                                   cfg.tol, cfg.max_iter, scheme);
  const auto self = mv_euler_selfconsistent(cfg.points, kernel, spec, cfg.horizon, steps, cfg.seed,
                                            init, scheme);
  const double gap = flow_distance(result.flow, self);
  const auto again = picard_iterate(result.flow, cfg.points, kernel, spec, cfg.seed, init, scheme);
  const double drift = flow_distance(again, result.flow);

  CsvTable hist{"picard_history", {"iteration", "distance"}, {}};
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    hist.rows.push_back({static_cast<double>(i + 1), result.history[i]});
  }
  r.extra.push_back(std::move(hist));
  r.metrics["status"] = to_string(result.status);
  r.metrics["iterations"] = result.iterations();
  r.metrics["noise_floor"] = result.noise_floor;
  r.metrics["distance_to_selfconsistent"] = gap;
  r.metrics["fixed_point_drift"] = drift;
  r.flags["converged"] = result.status == PicardStatus::Converged;
  r.flags["within_max_iter"] = result.iterations() <= cfg.max_iter;
  r.flags["close_to_selfconsistent"] = gap <= 3.0 * cfg.tol;
  r.flags["fixed_point_consistent"] = drift < cfg.tol + 2.0 * result.noise_floor;
  if (result.history.size() >= 2) r.flags["contracts"] = result.history[1] < result.history[0];
  return r;
}

RunReport cmd_pde_compare(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "pde_compare";
  if (cfg.dim > 2) throw ConfigError("pde_compare supports d <= 2");
  if (cfg.steps.empty()) throw ConfigError("pde_compare needs steps");
  const std::size_t steps = cfg.steps.front();
  const auto spec = cfg.make_noise();
  const double L = cfg.pde_half_length;
  const double h = cfg.horizon / static_cast<double>(steps);
  if (cfg.initial != "gaussian") throw ConfigError("pde_compare needs a gaussian initial law");

  CsvTable summary{"pde_compare", {"interacting", "w1", "mass_drift", "min_density"}, {}};
  auto run = [&](const Kernel& kernel, const std::string& tag) {
    auto t0 = Clock::now();
    auto scheme = cfg.scheme(steps, 1);
    scheme.drift.period_half_length = L;
    const auto traj = simulate(cfg.points, kernel, spec, cfg.horizon, steps, cfg.seed,
                               cfg.make_initial(), scheme);
    FpeSolver solver(kernel, spec, gaussian_density(L, cfg.pde_n, cfg.dim, cfg.initial_spread));
    const double dx = 2.0 * L / static_cast<double>(cfg.pde_n);
    std::size_t sub = 1;
    while (kernel.sup_norm() > 0.0 && h / static_cast<double>(sub) > dx / (2.0 * kernel.sup_norm())) {
      sub *= 2;
    }
    solver.advance(cfg.horizon, h / static_cast<double>(sub));
    const double w1 = compare_with_particles(solver.state().rho, traj.clouds.back());
    const double mass = std::abs(solver.state().mass_drift());
    r.metrics[tag + "_w1"] = w1;
    r.metrics[tag + "_mass_drift"] = mass;
    r.metrics[tag + "_min_density"] = solver.state().min_value;
    r.flags[tag + "_mass_drift_below_1e-10"] = mass < 1e-10;
    r.runtimes[tag + "_seconds"] = seconds_since(t0);
    summary.rows.push_back({kernel.kind() == KernelKind::Zero ? 0.0 : 1.0, w1, mass,
                            solver.state().min_value});
    return w1;
  };
  const auto kernel = cfg.make_kernel();
  if (kernel.kind() != KernelKind::Zero) {
    r.flags["w1_below_0.03"] = run(kernel, "interacting") < 0.03;
  }
  if (cfg.control || kernel.kind() == KernelKind::Zero) {
    r.flags["control_w1_below_0.02"] = run(Kernel::zero(cfg.dim), "control") < 0.02;
  }
  r.extra.push_back(std::move(summary));
  return r;
}

RunReport cmd_besov_smoothing(const ExperimentConfig& cfg) {
  RunReport r;
  r.experiment = "besov_smoothing";
  if (cfg.dim != 1) throw ConfigError("besov_smoothing runs in d = 1");
  if (!(cfg.beta + cfg.alpha > 1.0)) r.labels.push_back("out-of-theory: beta + alpha <= 1");
  const auto spec = cfg.make_noise();
  const double target = -cfg.gamma / cfg.alpha;
  const double h = cfg.besov_horizon / static_cast<double>(cfg.besov_steps);
  const auto u0 = weierstrass_field(cfg.besov_half_length, cfg.besov_n, cfg.beta);
  const double inf = std::numeric_limits<double>::infinity();
  const auto profile = besov_profile(u0, inf);
  CsvTable prof{"initial_profile", {"j", "norm"}, {}};
  for (std::size_t i = 0; i < profile.j.size(); ++i) {
    prof.rows.push_back({static_cast<double>(profile.j[i]), profile.norms[i]});
  }
  r.extra.push_back(std::move(prof));
  r.metrics["initial_besov_norm"] = besov_norm(profile, cfg.beta);
  r.metrics["target_exponent"] = target;

  auto t0 = Clock::now();
  auto free = smoothing_exponent_fit(u0, {}, spec, cfg.beta, cfg.gamma, cfg.besov_horizon, h,
                                     cfg.besov_times);
  free.table.name = "smoothing_free";
  r.metrics["free_exponent"] = free.exponent;
  r.flags["free_within_0.15"] = std::abs(free.exponent - target) <= 0.15;
  r.tables.push_back(std::move(free.table));
  r.runtimes["free_seconds"] = seconds_since(t0);

  t0 = Clock::now();
  const std::vector<GridField> b{
      windowed_kernel_field(cfg.make_kernel(), cfg.besov_half_length, cfg.besov_n)};
  auto drifted = smoothing_exponent_fit(u0, b, spec, cfg.beta, cfg.gamma, cfg.besov_horizon, h,
                                        cfg.besov_times);
  drifted.table.name = "smoothing_drift";
  r.metrics["drift_exponent"] = drifted.exponent;
  r.flags["drift_within_0.3"] = std::abs(drifted.exponent - target) <= 0.3;
  r.tables.push_back(std::move(drifted.table));
  r.runtimes["drift_seconds"] = seconds_since(t0);
  return r;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "sample_noise", "rates_euler_strong", "rates_euler_weak", "poc_strong", "poc_weak",
      "commute",      "picard",             "pde_compare",      "besov_smoothing"};
  return names;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  RunReport r;
  const auto& e = cfg.experiment;
  if (e == "sample_noise") {
    r = cmd_sample_noise(cfg);
  } else if (e == "rates_euler_strong") {
    r = cmd_rates_euler_strong(cfg);
  } else if (e == "rates_euler_weak") {
    r = cmd_rates_euler_weak(cfg);
  } else if (e == "poc_strong") {
    r = cmd_poc_strong(cfg);
  } else if (e == "poc_weak") {
    r = cmd_poc_weak(cfg);
  } else if (e == "commute") {
    r = cmd_commute(cfg);
  } else if (e == "picard") {
    r = cmd_picard(cfg);
  } else if (e == "pde_compare") {
    r = cmd_pde_compare(cfg);
  } else if (e == "besov_smoothing") {
    r = cmd_besov_smoothing(cfg);
  } else {
    throw ConfigError("unknown experiment '" + e + "'");
  }
  r.runtimes["total_seconds"] = seconds_since(t0);
  return r;
}

std::string library_version() {
  char hex[17];
  const std::string v = std::string(MVLAB_VERSION) + "|" + __VERSION__;
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a(v)));
  return std::string(MVLAB_VERSION) + "+" + hex;
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const RunReport& report) {
  nlohmann::json j;
  j["experiment"] = report.experiment;
  j["name"] = cfg.name;
  j["version"] = library_version();
  const auto h = cfg.hash();
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  j["config_hash"] = hex;
  j["regime"] = cfg.regime_json();
  j["labels"] = report.labels;
  auto& slopes = j["slopes"] = nlohmann::json::object();
  auto& tables = j["tables"] = nlohmann::json::array();
  for (const auto& t : report.tables) {
    const auto s = slope_of(t);
    slopes[t.name] = s ? nlohmann::json(*s) : nlohmann::json(nullptr);
    tables.push_back(rate_table_json(t, h));
  }
  j["pass"] = report.flags;
  j["passed"] = report.passed();
  j["metrics"] = report.metrics;
  j["runtimes"] = report.runtimes;
  return j;
}

void write_run(const ExperimentConfig& cfg, const RunReport& report,
               const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (fs::exists(dir / "summary.json")) {
    throw std::runtime_error("run directory already finalized: " + dir.string());
  }
  fs::create_directories(dir / "results");
  {
    std::ofstream os(dir / "config.echo.json");
    if (!os) throw std::runtime_error("cannot write into " + dir.string());
    os << cfg.to_json().dump(2) << '\n';
  }
  for (const auto& t : report.tables) write_rate_table_csv(dir / "results" / (t.name + ".csv"), t);
  for (const auto& t : report.extra) write_csv(dir / "results" / (t.name + ".csv"), t);
  std::ofstream os(dir / "summary.json");
  os << summary_json(cfg, report).dump(2) << '\n';
}

}  // namespace mvlab
