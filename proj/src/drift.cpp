#include "mvlab/drift.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvlab/parallel.hpp"
#include "mvlab/spectral.hpp"

namespace mvlab {

namespace {

constexpr std::size_t kAutoPairwiseLimit = 4096;
constexpr std::size_t kMaxGrid = std::size_t{1} << 18;
constexpr double kCoreTail = 0.01;

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> circular_convolution(const std::vector<double>& a,
                                         const std::vector<double>& b) {
  FftPlan pa({static_cast<int>(a.size())});
  FftPlan pb({static_cast<int>(b.size())});
  auto da = pa.data();
  auto db = pb.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    da[i] = a[i];
    db[i] = b[i];
  }
  pa.forward();
  pb.forward();
  for (std::size_t i = 0; i < a.size(); ++i) da[i] *= db[i];
  pa.backward();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = da[i].real();
  return out;
}

}  // namespace

const char* to_string(DriftMethod m) noexcept {
  switch (m) {
    case DriftMethod::Auto:
      return "auto";
    case DriftMethod::Pairwise:
      return "pairwise";
    case DriftMethod::Window:
      return "window";
    case DriftMethod::Binned:
      return "binned";
  }
  return "?";
}

double periodic_kernel1(const Kernel& k, double x, double half_length) noexcept {
  const double period = 2.0 * half_length;
  const double y = x - period * std::floor((x + half_length) / period);
  if (y <= -half_length) return 0.0;
  return k.eval1(y);
}

DriftOperator::DriftOperator(const Kernel& kernel, std::span<const double> sources, int dim,
                             DriftOptions options)
    : kernel_(kernel), dim_(dim), options_(options), sources_(sources.begin(), sources.end()) {
  if (dim != kernel.dim()) throw std::invalid_argument("drift: kernel/cloud dimension mismatch");
  if (sources.empty() || sources.size() % static_cast<std::size_t>(dim) != 0) {
    throw std::invalid_argument("drift: empty or ragged source cloud");
  }
  if (options.period_half_length < 0.0) throw std::invalid_argument("drift: negative period");
  n_ = sources.size() / static_cast<std::size_t>(dim);
  inv_n_ = 1.0 / static_cast<double>(n_);
  far_radius_ = kernel.far_radius();
  far_value_ = kernel.far_value();
  const bool periodic = options.period_half_length > 0.0;

  method_ = options.method;
  if (method_ == DriftMethod::Auto) {
    method_ = (dim > 1 || n_ <= kAutoPairwiseLimit) ? DriftMethod::Pairwise : DriftMethod::Binned;
  }
  if (method_ != DriftMethod::Pairwise && dim != 1) {
    throw std::invalid_argument("drift: window and binned evaluation are 1-D only");
  }
  if (method_ == DriftMethod::Window && periodic) {
    throw std::invalid_argument("drift: window evaluation is free-space only");
  }
  if (method_ == DriftMethod::Window) build_window();
  if (method_ == DriftMethod::Binned) {
    if (periodic) {
      build_binned_periodic();
    } else {
      build_binned();
    }
  }
}

double DriftOperator::wrap(double v) const noexcept {
  const double L = options_.period_half_length;
  return v - 2.0 * L * std::floor((v + L) / (2.0 * L));
}

void DriftOperator::build_window() {
  sorted_ = sources_;
  std::sort(sorted_.begin(), sorted_.end());
}

void DriftOperator::build_binned() {
  build_window();
  const auto i_lo = static_cast<std::size_t>(kCoreTail * static_cast<double>(n_));
  core_lo_ = sorted_[i_lo];
  core_hi_ = sorted_[n_ - 1 - i_lo];
  double step = kernel_.resolution();
  const double rf = far_radius_;
  double width = core_hi_ - core_lo_ + 4.0 * rf + 4.0 * step;
  if (width / step > static_cast<double>(kMaxGrid - 8)) {
    step = width / static_cast<double>(kMaxGrid - 8);
    width = core_hi_ - core_lo_ + 4.0 * rf + 4.0 * step;
  }
  grid_step_ = step;
  grid_origin_ = core_lo_ - 2.0 * rf - 2.0 * step;
  const auto g = static_cast<std::size_t>(std::ceil(width / step)) + 2;
  const std::size_t p = next_pow2(2 * g);

  std::vector<double> mass(p, 0.0), kern(p, 0.0);
  std::size_t left = 0, right = 0;
  for (double s : sorted_) {
    const double u = (s - grid_origin_) / step;
    if (u < 0.0) {
      ++left;
    } else if (u >= static_cast<double>(g - 1)) {
      ++right;
    } else {
      const auto m = static_cast<std::size_t>(u);
      const double f = u - static_cast<double>(m);
      mass[m] += 1.0 - f;
      mass[m + 1] += f;
    }
  }
  for (std::size_t j = 0; j < g; ++j) {
    const double r = static_cast<double>(j) * step;
    kern[j] = kernel_.eval1(r);
    if (j > 0) kern[p - j] = kernel_.eval1(-r);
  }
  auto conv = circular_convolution(mass, kern);
  conv.resize(g);
  grid_values_ = std::move(conv);
  outside_term_ = far_value_ * (static_cast<double>(left) - static_cast<double>(right));
}

void DriftOperator::build_binned_periodic() {
  const double L = options_.period_half_length;
  std::size_t g = next_pow2(static_cast<std::size_t>(std::ceil(2.0 * L / kernel_.resolution())));
  g = std::clamp<std::size_t>(g, 64, kMaxGrid);
  grid_step_ = 2.0 * L / static_cast<double>(g);
  grid_origin_ = -L;
  std::vector<double> mass(g, 0.0), kern(g, 0.0);
  for (double s : sources_) {
    const double u = (wrap(s) + L) / grid_step_;
    auto m = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(m);
    m %= g;
    mass[m] += 1.0 - f;
    mass[(m + 1) % g] += f;
  }
  for (std::size_t j = 0; j < g; ++j) {
    kern[j] = periodic_kernel1(kernel_, static_cast<double>(j) * grid_step_, L);
  }
  grid_values_ = circular_convolution(mass, kern);
}

double DriftOperator::pairwise1(double x) const {
  double acc = 0.0;
  const double L = options_.period_half_length;
  if (L > 0.0) {
    for (double s : sources_) acc += periodic_kernel1(kernel_, x - s, L);
  } else {
    for (double s : sources_) acc += kernel_.eval1(x - s);
  }
  return acc * inv_n_;
}

double DriftOperator::window1(double x) const {
  const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x - far_radius_);
  const auto hi = std::upper_bound(lo, sorted_.end(), x + far_radius_);
  double near = 0.0;
  for (auto it = lo; it != hi; ++it) near += kernel_.eval1(x - *it);
  const auto left = static_cast<double>(lo - sorted_.begin());
  const auto right = static_cast<double>(sorted_.end() - hi);
  return (near + far_value_ * (left - right)) * inv_n_;
}

double DriftOperator::binned1(double x) const {
  const std::size_t g = grid_values_.size();
  if (options_.period_half_length > 0.0) {
    const double u = (wrap(x) - grid_origin_) / grid_step_;
    auto m = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(m);
    m %= g;
    return ((1.0 - f) * grid_values_[m] + f * grid_values_[(m + 1) % g]) * inv_n_;
  }
  if (x < core_lo_ - far_radius_ || x > core_hi_ + far_radius_) return window1(x);
  const double u = (x - grid_origin_) / grid_step_;
  const auto m = std::min(static_cast<std::size_t>(u), g - 2);
  const double f = u - static_cast<double>(m);
  return ((1.0 - f) * grid_values_[m] + f * grid_values_[m + 1] + outside_term_) * inv_n_;
}

double DriftOperator::eval1(double x) const {
  switch (method_) {
    case DriftMethod::Window:
      return window1(x);
    case DriftMethod::Binned:
      return binned1(x);
    default:
      return pairwise1(x);
  }
}

void DriftOperator::eval(std::span<const double> x, std::span<double> out) const {
  const auto d = static_cast<std::size_t>(dim_);
  if (x.size() != d || out.size() != d) throw std::invalid_argument("drift: dimension mismatch");
  if (d == 1) {
    out[0] = eval1(x[0]);
    return;
  }
  const double L = options_.period_half_length;
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> diff(d), kv(d);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      double v = x[c] - sources_[i * d + c];
      if (L > 0.0) v = wrap(v);
      diff[c] = v;
    }
    kernel_.eval(diff, kv);
    for (std::size_t c = 0; c < d; ++c) out[c] += kv[c];
  }
  for (auto& v : out) v *= inv_n_;
}

void DriftOperator::eval_all(std::span<const double> targets, std::span<double> out) const {
  const auto d = static_cast<std::size_t>(dim_);
  if (targets.size() % d != 0 || out.size() != targets.size()) {
    throw std::invalid_argument("drift: target/output shape mismatch");
  }
  parallel_for(targets.size() / d, options_.threads, [&](std::size_t j) {
    eval(targets.subspan(j * d, d), out.subspan(j * d, d));
  });
}

}  // namespace mvlab
