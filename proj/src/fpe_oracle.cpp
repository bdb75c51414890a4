#include "mvlab/fpe_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvlab/drift.hpp"

namespace mvlab {

namespace {

using cplx = std::complex<double>;

std::vector<int> grid_shape(const GridField& g) {
  return std::vector<int>(static_cast<std::size_t>(g.dim), static_cast<int>(g.n));
}

double wrap_into(double x, double lo, double period) {
  return x - period * std::floor((x - lo) / period);
}

// Quantile samples of a nonnegative-clipped 1-D cell density at (k + 1/2)/count.
std::vector<double> density_quantiles(const std::vector<double>& rho, double lo, double dx,
                                      std::size_t count) {
  std::vector<double> cum(rho.size() + 1, 0.0);
  for (std::size_t i = 0; i < rho.size(); ++i) cum[i + 1] = cum[i] + std::max(rho[i], 0.0);
  const double total = cum.back();
  if (!(total > 0.0)) throw std::invalid_argument("density has no positive mass");
  std::vector<double> q(count);
  std::size_t cell = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double target = total * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
    while (cell + 1 < rho.size() && cum[cell + 1] < target) ++cell;
    const double w = cum[cell + 1] - cum[cell];
    const double frac = w > 0.0 ? (target - cum[cell]) / w : 0.5;
    q[k] = lo + (static_cast<double>(cell) + std::clamp(frac, 0.0, 1.0)) * dx;
  }
  return q;
}

double marginal_w1(const std::vector<double>& rho, double L, double dx, std::vector<double> x) {
  const double lo = -L - 0.5 * dx;
  for (double& v : x) v = wrap_into(v, lo, 2.0 * L);
  std::sort(x.begin(), x.end());
  const auto q = density_quantiles(rho, lo, dx, x.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += std::abs(x[k] - q[k]);
  return acc / static_cast<double>(x.size());
}

}  // namespace

GridField gaussian_density(double half_length, std::size_t n, int dim, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian density: sigma must be > 0");
  GridField g(half_length, n, dim);
  double mass = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r2 = 0.0;
    if (dim == 1) {
      r2 = g.coordinate(i) * g.coordinate(i);
    } else {
      const double a = g.coordinate(i / n), b = g.coordinate(i % n);
      r2 = a * a + b * b;
    }
    g.values[i] = std::exp(-0.5 * r2 / (sigma * sigma));
    mass += g.values[i];
  }
  const double scale = 1.0 / (mass * g.cell_volume());
  for (double& v : g.values) v *= scale;
  return g;
}

double dirac_width(double half_length, std::size_t n) noexcept {
  return 4.0 * 2.0 * half_length / static_cast<double>(n);
}

GridField dirac_density(double half_length, std::size_t n, int dim) {
  return gaussian_density(half_length, n, dim, dirac_width(half_length, n));
}

FpeSolver::FpeSolver(const Kernel& kernel, const StableSpec& noise, GridField rho0)
    : kernel_(kernel),
      noise_(noise),
      dim_(rho0.dim),
      total_(rho0.size()),
      plan_(grid_shape(rho0)) {
  if (noise.dim() != rho0.dim || kernel.dim() != rho0.dim) {
    throw std::invalid_argument("fpe: kernel, noise and grid dimensions differ");
  }
  const std::size_t n = rho0.n;
  const double L = rho0.half_length;
  const double dx = rho0.spacing();
  auto buf = plan_.data();

  for (int a = 0; a < dim_; ++a) {
    xi_.emplace_back(total_);
    for (std::size_t i = 0; i < total_; ++i) {
      const std::size_t k = dim_ == 1 ? i : (a == 0 ? i / n : i % n);
      xi_.back()[i] = wavenumber(k, n, L);
    }
  }
  symbol_.resize(total_);
  keep_.resize(total_);
  for (std::size_t i = 0; i < total_; ++i) {
    double v[2] = {xi_[0][i], dim_ == 2 ? xi_[1][i] : 0.0};
    symbol_[i] = noise.symbol(std::span<const double>(v, static_cast<std::size_t>(dim_)));
    keep_[i] = retained_by_two_thirds(i, n, dim_) ? 1.0 : 0.0;
  }

  // Kernel at grid offsets, reduced to nearest images.
  std::vector<std::vector<double>> samples(static_cast<std::size_t>(dim_),
                                           std::vector<double>(total_, 0.0));
  if (dim_ == 1) {
    for (std::size_t k = 0; k < n; ++k) {
      samples[0][k] = periodic_kernel1(kernel, static_cast<double>(k) * dx, L);
    }
  } else {
    std::vector<double> off(2), kv(2);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        const std::size_t idx[2] = {a, b};
        bool edge[2];
        for (int c = 0; c < 2; ++c) {
          const double o = static_cast<double>(idx[c]) * dx;
          off[static_cast<std::size_t>(c)] = o >= L ? o - 2.0 * L : o;
          edge[c] = idx[c] == n / 2;
        }
        kernel.eval(off, kv);
        for (int c = 0; c < 2; ++c) samples[static_cast<std::size_t>(c)][a * n + b] = edge[c] ? 0.0 : kv[static_cast<std::size_t>(c)];
      }
    }
  }
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < total_; ++i) buf[i] = s[i] * rho0.cell_volume();
    plan_.forward();
    kernel_hat_.emplace_back(buf.begin(), buf.end());
  }

  for (std::size_t i = 0; i < total_; ++i) buf[i] = rho0.values[i];
  plan_.forward();
  zero_mode_ = buf[0];
  state_.rho = std::move(rho0);
  std::vector<cplx> hat(buf.begin(), buf.end());
  refresh(hat);
  state_.initial_mass = state_.mass;
}

void FpeSolver::refresh(const std::vector<cplx>& rho_hat) {
  auto buf = plan_.data();
  std::copy(rho_hat.begin(), rho_hat.end(), buf.begin());
  plan_.backward();
  double mass = 0.0, lo = buf[0].real();
  for (std::size_t i = 0; i < total_; ++i) {
    const double v = buf[i].real();
    state_.rho.values[i] = v;
    mass += v;
    lo = std::min(lo, v);
  }
  state_.mass = mass * state_.rho.cell_volume();
  state_.min_value = lo;
}

std::vector<GridField> FpeSolver::velocity() const {
  auto buf = plan_.data();
  for (std::size_t i = 0; i < total_; ++i) buf[i] = state_.rho.values[i];
  plan_.forward();
  const std::vector<cplx> hat(buf.begin(), buf.end());
  std::vector<GridField> v;
  for (int a = 0; a < dim_; ++a) {
    for (std::size_t i = 0; i < total_; ++i) buf[i] = kernel_hat_[static_cast<std::size_t>(a)][i] * hat[i];
    plan_.backward();
    GridField g(state_.rho.half_length, state_.rho.n, dim_);
    for (std::size_t i = 0; i < total_; ++i) g.values[i] = buf[i].real();
    v.push_back(std::move(g));
  }
  return v;
}

void FpeSolver::transport_rhs(const std::vector<cplx>& rho_hat, std::vector<cplx>& out) const {
  auto buf = plan_.data();
  std::vector<double> rho(total_);
  for (std::size_t i = 0; i < total_; ++i) buf[i] = rho_hat[i] * keep_[i];
  plan_.backward();
  for (std::size_t i = 0; i < total_; ++i) rho[i] = buf[i].real();
  std::fill(out.begin(), out.end(), cplx(0.0));
  for (int a = 0; a < dim_; ++a) {
    const auto& kh = kernel_hat_[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < total_; ++i) buf[i] = kh[i] * rho_hat[i] * keep_[i];
    plan_.backward();
    for (std::size_t i = 0; i < total_; ++i) buf[i] = buf[i].real() * rho[i];
    plan_.forward();
    const auto& xi = xi_[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < total_; ++i) out[i] -= cplx(0.0, xi[i]) * buf[i] * keep_[i];
  }
}

void FpeSolver::step(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fpe: step must be positive");
  const double vmax = kernel_.sup_norm();
  if (vmax > 0.0 && h > state_.rho.spacing() / (2.0 * vmax) * (1.0 + 1e-12)) {
    throw std::invalid_argument("fpe: CFL violated, need h <= dx / (2 ||K||_inf)");
  }
  auto buf = plan_.data();
  for (std::size_t i = 0; i < total_; ++i) buf[i] = state_.rho.values[i];
  plan_.forward();
  std::vector<cplx> u(buf.begin(), buf.end());
  for (std::size_t i = 0; i < total_; ++i) u[i] *= std::exp(-0.5 * h * symbol_[i]);
  if (kernel_.kind() != KernelKind::Zero) {
    std::vector<cplx> k1(total_), k2(total_), k3(total_), k4(total_), tmp(total_);
    transport_rhs(u, k1);
    for (std::size_t i = 0; i < total_; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    transport_rhs(tmp, k2);
    for (std::size_t i = 0; i < total_; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    transport_rhs(tmp, k3);
    for (std::size_t i = 0; i < total_; ++i) tmp[i] = u[i] + h * k3[i];
    transport_rhs(tmp, k4);
    for (std::size_t i = 0; i < total_; ++i) {
      u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
  }
  for (std::size_t i = 0; i < total_; ++i) u[i] *= std::exp(-0.5 * h * symbol_[i]);
  u[0] = zero_mode_;
  refresh(u);
  time_ += h;
  ++state_.steps;
}

void FpeSolver::advance(double horizon, double h) {
  const double k = std::round(horizon / h);
  if (std::abs(k * h - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw std::invalid_argument("fpe: horizon must be a multiple of h");
  }
  for (std::size_t s = 0; s < static_cast<std::size_t>(k); ++s) step(h);
}

double compare_with_particles(const GridField& rho, const Cloud& cloud) {
  if (cloud.dim != rho.dim) throw std::invalid_argument("compare: dimension mismatch");
  if (cloud.empty()) throw std::invalid_argument("compare: empty cloud");
  const double dx = rho.spacing();
  if (rho.dim == 1) return marginal_w1(rho.values, rho.half_length, dx, cloud.positions);
  const std::size_t n = rho.n;
  double acc = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<double> marginal(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) marginal[axis == 0 ? a : b] += rho.values[a * n + b];
    }
    acc += marginal_w1(marginal, rho.half_length, dx, cloud.coordinate(axis));
  }
  return 0.5 * acc;
}

}  // namespace mvlab
