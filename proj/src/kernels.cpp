#include "mvlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mvlab/rng.hpp"

namespace mvlab {

namespace {

constexpr double kSupInflation = 1.0 + 1e-12;

void require_dim(int dim) {
  if (dim < 1) throw std::invalid_argument("kernel dimension must be >= 1");
}

}  // namespace

Kernel Kernel::zero(int dim) {
  require_dim(dim);
  Kernel k;
  k.dim_ = dim;
  return k;
}

Kernel Kernel::power_capped(int dim, double beta, double cap, double strength) {
  require_dim(dim);
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("kernel beta must lie in (0,1)");
  if (!(cap > 0.0) || !std::isfinite(cap)) throw std::invalid_argument("kernel cap must be > 0");
  if (!std::isfinite(strength)) throw std::invalid_argument("kernel strength must be finite");
  Kernel k;
  k.kind_ = KernelKind::PowerCapped;
  k.dim_ = dim;
  k.beta_ = beta;
  k.cap_ = cap;
  k.strength_ = strength;
  k.capped_value_ = strength * std::pow(cap, beta);
  k.sup_ = std::abs(strength) * std::pow(cap, beta) * kSupInflation;
  return k;
}

Kernel Kernel::gaussian_gradient(int dim, double width) {
  require_dim(dim);
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw std::invalid_argument("gaussian kernel width must be > 0");
  }
  Kernel k;
  k.kind_ = KernelKind::GaussianGradient;
  k.dim_ = dim;
  k.width_ = width;
  k.sup_ = std::exp(-0.5) / width * kSupInflation;
  return k;
}

Kernel Kernel::tabulated(int dim, std::vector<double> radii, std::vector<double> profile) {
  require_dim(dim);
  if (radii.size() < 2 || radii.size() != profile.size()) {
    throw std::invalid_argument("tabulated kernel needs >= 2 matching (radius, value) samples");
  }
  if (radii.front() != 0.0 || profile.front() != 0.0) {
    throw std::invalid_argument("tabulated kernel must start at (0, 0)");
  }
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1]) || !std::isfinite(radii[i]) || !std::isfinite(profile[i])) {
      throw std::invalid_argument("tabulated kernel radii must be finite and increasing");
    }
  }
  Kernel k;
  k.kind_ = KernelKind::Tabulated;
  k.dim_ = dim;
  double sup = 0.0;
  for (double v : profile) sup = std::max(sup, std::abs(v));
  k.sup_ = sup * kSupInflation;
  k.radii_ = std::move(radii);
  k.values_ = std::move(profile);
  return k;
}

double Kernel::profile(double r) const noexcept {
  switch (kind_) {
    case KernelKind::Zero:
      return 0.0;
    case KernelKind::PowerCapped:
      return r >= cap_ ? capped_value_ : strength_ * std::pow(r, beta_);
    case KernelKind::GaussianGradient: {
      const double w2 = width_ * width_;
      return -(r / w2) * std::exp(-0.5 * r * r / w2);
    }
    case KernelKind::Tabulated: {
      if (r >= radii_.back()) return values_.back();
      const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
      const auto i = static_cast<std::size_t>(it - radii_.begin());
      const double t = (r - radii_[i - 1]) / (radii_[i] - radii_[i - 1]);
      return values_[i - 1] + t * (values_[i] - values_[i - 1]);
    }
  }
  return 0.0;
}

double Kernel::far_radius() const noexcept {
  switch (kind_) {
    case KernelKind::Zero:
      return 0.0;
    case KernelKind::PowerCapped:
      return cap_;
    case KernelKind::GaussianGradient:
      return 40.0 * width_;
    case KernelKind::Tabulated:
      return radii_.back();
  }
  return 0.0;
}

double Kernel::resolution() const noexcept {
  switch (kind_) {
    case KernelKind::Zero:
      return 1.0;
    case KernelKind::PowerCapped:
      return cap_ / 1024.0;
    case KernelKind::GaussianGradient:
      return width_ / 64.0;
    case KernelKind::Tabulated: {
      double gap = radii_.back();
      for (std::size_t i = 1; i < radii_.size(); ++i) gap = std::min(gap, radii_[i] - radii_[i - 1]);
      return std::max(0.5 * gap, radii_.back() / 4096.0);
    }
  }
  return 1.0;
}

void Kernel::eval(std::span<const double> x, std::span<double> out) const {
  if (x.size() != static_cast<std::size_t>(dim_) || out.size() != x.size()) {
    throw std::invalid_argument("kernel eval: dimension mismatch");
  }
  if (dim_ == 1) {
    out[0] = eval1(x[0]);
    return;
  }
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  if (r2 == 0.0 || kind_ == KernelKind::Zero) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double r = std::sqrt(r2);
  const double s = profile(r) / r;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
}

std::vector<double> Kernel::eval(std::span<const double> x) const {
  std::vector<double> out(x.size());
  eval(x, out);
  return out;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case KernelKind::Zero:
      os << "zero";
      break;
    case KernelKind::PowerCapped:
      os << "power_capped(beta=" << beta_ << ", cap=" << cap_ << ", strength=" << strength_ << ")";
      break;
    case KernelKind::GaussianGradient:
      os << "gaussian_gradient(width=" << width_ << ")";
      break;
    case KernelKind::Tabulated:
      os << "tabulated(" << radii_.size() << " samples, r_max=" << radii_.back() << ")";
      break;
  }
  os << " d=" << dim_;
  return os.str();
}

void convolve_empirical(const Kernel& k, const Cloud& cloud, std::span<const double> x,
                        std::span<double> out) {
  if (cloud.empty()) throw std::invalid_argument("convolve_empirical: empty cloud");
  const auto d = static_cast<std::size_t>(k.dim());
  if (static_cast<std::size_t>(cloud.dim) != d || x.size() != d || out.size() != d) {
    throw std::invalid_argument("convolve_empirical: dimension mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = cloud.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  if (d == 1) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += k.eval1(x[0] - cloud.positions[i]);
    out[0] = acc * inv_n;
    return;
  }
  std::vector<double> diff(d), kv(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = cloud.point(i);
    for (std::size_t c = 0; c < d; ++c) diff[c] = x[c] - p[c];
    k.eval(diff, kv);
    for (std::size_t c = 0; c < d; ++c) out[c] += kv[c];
  }
  for (auto& v : out) v *= inv_n;
}

std::vector<double> convolve_empirical(const Kernel& k, const Cloud& cloud,
                                       std::span<const double> x) {
  std::vector<double> out(x.size());
  convolve_empirical(k, cloud, x, out);
  return out;
}

double holder_seminorm(const Kernel& k, double beta, double half_width, std::size_t n_pairs) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("holder exponent must be in (0,1]");
  if (!(half_width > 0.0)) throw std::invalid_argument("holder box must have positive size");
  const auto d = static_cast<std::size_t>(k.dim());
  const CounterRng rng(0x486f6c646572ull, Stream::Sampling);
  const double log_span = std::log(1e8);
  std::vector<double> x(d), y(d), kx(d), ky(d);
  double best = 0.0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    if (i % 2 == 0) {
      for (std::size_t c = 0; c < d; ++c) {
        const auto u = rng.uniforms(idx, 0, static_cast<std::uint32_t>(c));
        x[c] = half_width * (2.0 * u.u0 - 1.0);
        y[c] = half_width * (2.0 * u.u1 - 1.0);
      }
    } else {
      const auto ur = rng.uniforms(idx, 1, 0);
      const double r = 2.0 * half_width * std::exp(-log_span * ur.u0);
      double n2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const auto u = rng.uniforms(idx, 0, static_cast<std::uint32_t>(c));
        x[c] = half_width * (2.0 * u.u0 - 1.0);
        y[c] = 2.0 * u.u1 - 1.0;
        n2 += y[c] * y[c];
      }
      if (d == 1) {
        y[0] = ur.u1 < 0.5 ? -1.0 : 1.0;
        n2 = 1.0;
      }
      const double inv = 1.0 / std::sqrt(n2);
      for (std::size_t c = 0; c < d; ++c) y[c] = x[c] + r * y[c] * inv;
    }
    double dist2 = 0.0, diff2 = 0.0;
    k.eval(x, kx);
    k.eval(y, ky);
    for (std::size_t c = 0; c < d; ++c) {
      dist2 += (x[c] - y[c]) * (x[c] - y[c]);
      diff2 += (kx[c] - ky[c]) * (kx[c] - ky[c]);
    }
    if (dist2 == 0.0) continue;
    best = std::max(best, std::sqrt(diff2) / std::pow(dist2, 0.5 * beta));
  }
  return best;
}

}  // namespace mvlab
