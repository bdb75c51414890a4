#include "mvlab/lp_besov.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace mvlab {

namespace {

using cplx = std::complex<double>;

// Exponential smoothstep on [0,1]: 0 at 0, 1 at 1, flat to all orders at both ends.
double smoothstep(double t) noexcept {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

std::vector<double> abs_wavenumbers(std::size_t n, int dim, double L) {
  std::vector<double> out;
  if (dim == 1) {
    out.resize(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::abs(wavenumber(k, n, L));
  } else {
    out.resize(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      const double xa = wavenumber(a, n, L);
      for (std::size_t b = 0; b < n; ++b) {
        const double xb = wavenumber(b, n, L);
        out[a * n + b] = std::sqrt(xa * xa + xb * xb);
      }
    }
  }
  return out;
}

std::vector<double> wavenumber_component(std::size_t n, int dim, double L, int axis) {
  const std::size_t total = dim == 1 ? n : n * n;
  std::vector<double> out(total);
  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t k = dim == 1 ? i : (axis == 0 ? i / n : i % n);
    out[i] = wavenumber(k, n, L);
  }
  return out;
}

bool is_inf(double p) { return std::isinf(p) && p > 0; }

void require_same_grid(const GridField& a, const GridField& b) {
  if (a.n != b.n || a.dim != b.dim || a.half_length != b.half_length) {
    throw std::invalid_argument("fields live on different grids");
  }
}

}  // namespace

double lp_cutoff(double r) noexcept { return 1.0 - smoothstep((r - 1.0) / 0.5); }

BlockMasks build_masks(std::size_t n, int dim, double half_length) {
  const GridField probe(half_length, n, dim);
  BlockMasks m;
  m.n = n;
  m.dim = dim;
  m.half_length = half_length;
  const auto xi = abs_wavenumbers(n, dim, half_length);
  const double xi_max = *std::max_element(xi.begin(), xi.end());
  m.j_max = std::max(0, static_cast<int>(std::ceil(std::log2(xi_max))));
  m.masks.assign(static_cast<std::size_t>(m.j_max + 2), std::vector<double>(xi.size()));
  for (std::size_t i = 0; i < xi.size(); ++i) {
    m.masks[0][i] = lp_cutoff(2.0 * xi[i]);
    for (int j = 0; j <= m.j_max; ++j) {
      m.masks[static_cast<std::size_t>(j + 1)][i] =
          lp_cutoff(std::ldexp(xi[i], -j)) - lp_cutoff(std::ldexp(xi[i], 1 - j));
    }
  }
  return m;
}

double partition_error(const BlockMasks& masks) {
  double err = 0.0;
  const std::size_t total = masks.masks.front().size();
  for (std::size_t i = 0; i < total; ++i) {
    double s = 0.0;
    for (const auto& psi : masks.masks) s += psi[i];
    err = std::max(err, std::abs(s - 1.0));
  }
  return err;
}

std::vector<GridField> block_decompose(const GridField& f, const BlockMasks& masks) {
  if (masks.n != f.n || masks.dim != f.dim || masks.half_length != f.half_length) {
    throw std::invalid_argument("block_decompose: masks built for another grid");
  }
  std::vector<int> shape(static_cast<std::size_t>(f.dim), static_cast<int>(f.n));
  FftPlan plan(shape);
  auto buf = plan.data();
  for (std::size_t i = 0; i < f.size(); ++i) buf[i] = f.values[i];
  plan.forward();
  const std::vector<cplx> spec(buf.begin(), buf.end());
  std::vector<GridField> blocks;
  for (const auto& psi : masks.masks) {
    for (std::size_t i = 0; i < spec.size(); ++i) buf[i] = spec[i] * psi[i];
    plan.backward();
    GridField b(f.half_length, f.n, f.dim);
    for (std::size_t i = 0; i < b.size(); ++i) b.values[i] = buf[i].real();
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<GridField> block_decompose(const GridField& f) {
  return block_decompose(f, build_masks(f.n, f.dim, f.half_length));
}

double grid_lp_norm(const GridField& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("L^p norm needs p >= 1");
  if (is_inf(p)) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  double acc = 0.0;
  for (double v : f.values) acc += std::pow(std::abs(v), p);
  return std::pow(acc * f.cell_volume(), 1.0 / p);
}

BesovProfile besov_profile(const GridField& f, double p, const BlockMasks& masks) {
  BesovProfile prof;
  prof.p = p;
  const auto blocks = block_decompose(f, masks);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    prof.j.push_back(static_cast<int>(i) - 1);
    prof.norms.push_back(grid_lp_norm(blocks[i], p));
  }
  return prof;
}

BesovProfile besov_profile(const GridField& f, double p) {
  return besov_profile(f, p, build_masks(f.n, f.dim, f.half_length));
}

double besov_norm(const BesovProfile& profile, double s) {
  double best = 0.0;
  for (std::size_t i = 0; i < profile.j.size(); ++i) {
    best = std::max(best, std::exp2(s * std::max(profile.j[i], 0)) * profile.norms[i]);
  }
  return best;
}

double besov_norm(const GridField& f, double s, double p) {
  return besov_norm(besov_profile(f, p), s);
}

double besov_norm_l1(const BesovProfile& profile, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < profile.j.size(); ++i) {
    acc += std::exp2(s * std::max(profile.j[i], 0)) * profile.norms[i];
  }
  return acc;
}

BernsteinReport bernstein_check(const GridField& f, int k, double p1, double p2,
                                double constant) {
  if (k < 0) throw std::invalid_argument("bernstein: derivative order must be >= 0");
  if (f.dim == 2 && k > 1) throw std::invalid_argument("bernstein: k > 1 is 1-D only");
  const auto masks = build_masks(f.n, f.dim, f.half_length);
  const auto blocks = block_decompose(f, masks);
  const double inv1 = is_inf(p1) ? 0.0 : 1.0 / p1;
  const double inv2 = is_inf(p2) ? 0.0 : 1.0 / p2;
  const double order = k + f.dim * (inv1 - inv2);

  std::vector<double> norms;
  for (const auto& b : blocks) norms.push_back(grid_lp_norm(b, p1));
  const double top = *std::max_element(norms.begin(), norms.end());

  BernsteinReport rep;
  rep.constant = constant;
  std::vector<int> shape(static_cast<std::size_t>(f.dim), static_cast<int>(f.n));
  FftPlan plan(shape);
  auto buf = plan.data();
  std::vector<std::vector<double>> xi;
  for (int a = 0; a < f.dim; ++a) xi.push_back(wavenumber_component(f.n, f.dim, f.half_length, a));
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    if (top == 0.0 || norms[bi] <= 1e-13 * top) continue;
    GridField deriv(f.half_length, f.n, f.dim);
    std::vector<double> mag2(f.size(), 0.0);
    for (int a = 0; a < f.dim; ++a) {
      for (std::size_t i = 0; i < f.size(); ++i) buf[i] = blocks[bi].values[i];
      plan.forward();
      for (std::size_t i = 0; i < f.size(); ++i) buf[i] *= std::pow(cplx(0.0, xi[a][i]), k);
      plan.backward();
      for (std::size_t i = 0; i < f.size(); ++i) mag2[i] += buf[i].real() * buf[i].real();
      if (f.dim == 1 || k == 0) break;
    }
    for (std::size_t i = 0; i < f.size(); ++i) deriv.values[i] = std::sqrt(mag2[i]);
    const int j = static_cast<int>(bi) - 1;
    const double q = grid_lp_norm(deriv, p2) / (std::exp2(order * j) * norms[bi]);
    rep.j.push_back(j);
    rep.ratio.push_back(q);
    rep.max_ratio = std::max(rep.max_ratio, q);
  }
  rep.pass = rep.max_ratio <= constant * (1.0 + 1e-9);
  return rep;
}

double interpolation_constant(double s1, double s2, double theta) {
  const double d = s1 - s2;
  return 1.0 / (1.0 - std::exp2(-(1.0 - theta) * d)) + 1.0 / (1.0 - std::exp2(-theta * d)) + 1.0;
}

InterpolationReport interpolation_check(const GridField& f, double s1, double s2, double theta,
                                        double p, std::optional<double> constant) {
  if (!(s1 > s2)) throw std::invalid_argument("interpolation: need s1 > s2");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("interpolation: theta in (0,1)");
  const auto prof = besov_profile(f, p);
  InterpolationReport rep;
  rep.constant = constant.value_or(interpolation_constant(s1, s2, theta));
  rep.lhs = besov_norm_l1(prof, theta * s1 + (1.0 - theta) * s2);
  rep.rhs = std::pow(besov_norm(prof, s1), theta) * std::pow(besov_norm(prof, s2), 1.0 - theta);
  if (rep.lhs == 0.0) {
    rep.ratio = 0.0;
    rep.pass = true;
    return rep;
  }
  rep.ratio = rep.lhs / rep.rhs;
  rep.pass = rep.ratio <= rep.constant * (1.0 + 1e-12);
  return rep;
}

GridField weierstrass_field(double half_length, std::size_t n, double beta, int k_max) {
  GridField f(half_length, n, 1);
  if (k_max < 0) k_max = static_cast<int>(std::log2(static_cast<double>(n))) - 1;
  const double pi = 3.14159265358979323846;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = f.coordinate(i);
    double acc = 0.0;
    for (int k = 0; k <= k_max; ++k) {
      acc += std::exp2(-beta * k) * std::cos(std::exp2(k) * pi * x / half_length);
    }
    f.values[i] = acc;
  }
  return f;
}

std::vector<GridField> linear_pde_evolve(const GridField& u0, const std::vector<GridField>& b,
                                         const GridField* f, double lambda,
                                         const StableSpec& noise, double h,
                                         const std::vector<double>& times) {
  if (noise.dim() != u0.dim) throw std::invalid_argument("pde: noise and grid dimensions differ");
  if (!(h > 0.0)) throw std::invalid_argument("pde: step must be positive");
  if (!b.empty() && b.size() != static_cast<std::size_t>(u0.dim)) {
    throw std::invalid_argument("pde: drift needs one field per dimension");
  }
  for (const auto& c : b) require_same_grid(u0, c);
  if (f) require_same_grid(u0, *f);
  double bmax = 0.0;
  for (const auto& c : b) bmax = std::max(bmax, grid_lp_norm(c, std::numeric_limits<double>::infinity()));
  if (bmax > 0.0 && h > u0.spacing() / (2.0 * bmax) * (1.0 + 1e-12)) {
    throw std::invalid_argument("pde: CFL violated, need h <= dx / (2 ||b||_inf)");
  }
  std::vector<std::size_t> step_at;
  for (double t : times) {
    const double k = std::round(t / h);
    if (t < 0.0 || std::abs(k * h - t) > 1e-9 * std::max(1.0, t)) {
      throw std::invalid_argument("pde: output times must be nonnegative multiples of h");
    }
    step_at.push_back(static_cast<std::size_t>(k));
  }

  const std::size_t total = u0.size();
  const int d = u0.dim;
  std::vector<int> shape(static_cast<std::size_t>(d), static_cast<int>(u0.n));
  FftPlan plan(shape);
  auto buf = plan.data();

  std::vector<std::vector<double>> xi;
  for (int a = 0; a < d; ++a) xi.push_back(wavenumber_component(u0.n, d, u0.half_length, a));
  std::vector<double> half(total);
  std::vector<double> keep(total);
  for (std::size_t i = 0; i < total; ++i) {
    double v[2] = {xi[0][i], d == 2 ? xi[1][i] : 0.0};
    const double psi = noise.symbol(std::span<const double>(v, static_cast<std::size_t>(d)));
    half[i] = std::exp(-0.5 * h * (psi + lambda));
    keep[i] = retained_by_two_thirds(i, u0.n, d) ? 1.0 : 0.0;
  }
  std::vector<cplx> f_hat;
  if (f) {
    for (std::size_t i = 0; i < total; ++i) buf[i] = f->values[i];
    plan.forward();
    f_hat.assign(buf.begin(), buf.end());
  }
  const bool transport = !b.empty() && bmax > 0.0;

  std::vector<double> advect(total);
  auto rhs = [&](const std::vector<cplx>& u, std::vector<cplx>& out) {
    std::fill(advect.begin(), advect.end(), 0.0);
    if (transport) {
      for (int a = 0; a < d; ++a) {
        for (std::size_t i = 0; i < total; ++i) buf[i] = u[i] * keep[i] * cplx(0.0, xi[a][i]);
        plan.backward();
        for (std::size_t i = 0; i < total; ++i) advect[i] += b[a].values[i] * buf[i].real();
      }
      for (std::size_t i = 0; i < total; ++i) buf[i] = advect[i];
      plan.forward();
      for (std::size_t i = 0; i < total; ++i) out[i] = buf[i] * keep[i];
    } else {
      std::fill(out.begin(), out.end(), cplx(0.0));
    }
    if (f) {
      for (std::size_t i = 0; i < total; ++i) out[i] += f_hat[i];
    }
  };

  for (std::size_t i = 0; i < total; ++i) buf[i] = u0.values[i];
  plan.forward();
  std::vector<cplx> u(buf.begin(), buf.end());
  std::vector<cplx> k1(total), k2(total), k3(total), k4(total), tmp(total);
  const bool explicit_part = transport || f;

  auto snapshot = [&]() {
    for (std::size_t i = 0; i < total; ++i) buf[i] = u[i];
    plan.backward();
    GridField g(u0.half_length, u0.n, d);
    for (std::size_t i = 0; i < total; ++i) g.values[i] = buf[i].real();
    return g;
  };

  const std::size_t last = step_at.empty() ? 0 : *std::max_element(step_at.begin(), step_at.end());
  std::vector<GridField> out(times.size());
  for (std::size_t s = 0;; ++s) {
    for (std::size_t q = 0; q < step_at.size(); ++q) {
      if (step_at[q] == s) out[q] = snapshot();
    }
    if (s == last) break;
    for (std::size_t i = 0; i < total; ++i) u[i] *= half[i];
    if (explicit_part) {
      rhs(u, k1);
      for (std::size_t i = 0; i < total; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < total; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
      rhs(tmp, k3);
      for (std::size_t i = 0; i < total; ++i) tmp[i] = u[i] + h * k3[i];
      rhs(tmp, k4);
      for (std::size_t i = 0; i < total; ++i) {
        u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    for (std::size_t i = 0; i < total; ++i) u[i] *= half[i];
  }
  return out;
}

SmoothingFit smoothing_exponent_fit(const GridField& u0, const std::vector<GridField>& b,
                                    const StableSpec& noise, double beta, double gamma,
                                    double horizon, double h, std::size_t n_times) {
  if (!(gamma > 0.0 && gamma < noise.alpha())) {
    throw std::invalid_argument("smoothing fit: gamma must lie in (0, alpha)");
  }
  if (n_times < 3) throw std::invalid_argument("smoothing fit: need >= 3 times");
  if (horizon / 64.0 < h) throw std::invalid_argument("smoothing fit: h must be <= T/64");
  std::vector<double> times;
  for (std::size_t i = 0; i < n_times; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n_times - 1);
    const double target = horizon * std::pow(64.0, frac - 1.0);
    const double t = h * std::round(target / h);
    if (times.empty() || t > times.back()) times.push_back(t);
  }
  const auto fields = linear_pde_evolve(u0, b, nullptr, 0.0, noise, h, times);
  const auto masks = build_masks(u0.n, u0.dim, u0.half_length);
  SmoothingFit fit;
  fit.times = times;
  fit.table.name = "besov_smoothing";
  fit.table.parameter_name = "t";
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double norm = besov_norm(besov_profile(fields[i], inf, masks), beta + gamma);
    fit.norms.push_back(norm);
    fit.table.add(times[i], norm);
  }
  if (fit.table.records.size() < 3) throw std::invalid_argument("smoothing fit: degenerate fit");
  fit.exponent = fit_in_place(fit.table).slope;
  return fit;
}

GridField windowed_kernel_field(const Kernel& k, double half_length, std::size_t n) {
  if (k.dim() != 1) throw std::invalid_argument("windowed kernel field is 1-D");
  GridField g(half_length, n, 1);
  const double inner = 0.5 * half_length;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.coordinate(i);
    const double w = 1.0 - smoothstep((std::abs(x) - inner) / (half_length - inner));
    g.values[i] = k.eval1(x) * w;
  }
  return g;
}

}  // namespace mvlab
