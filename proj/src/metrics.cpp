#include "mvlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mvlab/parallel.hpp"
#include "mvlab/rng.hpp"

namespace mvlab {

namespace {

constexpr std::size_t kQuantiles = 1024;

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

double w1_sorted(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
  }
  auto q = [](const std::vector<double>& s, double u) {
    const auto i = std::min(s.size() - 1, static_cast<std::size_t>(u * static_cast<double>(s.size())));
    return s[i];
  };
  double acc = 0.0;
  for (std::size_t k = 0; k < kQuantiles; ++k) {
    const double u = (static_cast<double>(k) + 0.5) / static_cast<double>(kQuantiles);
    acc += std::abs(q(a, u) - q(b, u));
  }
  return acc / static_cast<double>(kQuantiles);
}

std::vector<double> unit_direction(const CounterRng& rng, std::uint32_t k, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  std::vector<double> v(d);
  double n2 = 0.0;
  for (std::uint32_t attempt = 0; n2 == 0.0; ++attempt) {
    for (std::size_t c = 0; c < d; c += 2) {
      const auto u = rng.uniforms(k, attempt, static_cast<std::uint32_t>(c / 2));
      const auto z = box_muller(u.u0, u.u1);
      v[c] = z.z0;
      if (c + 1 < d) v[c + 1] = z.z1;
    }
    n2 = 0.0;
    for (double x : v) n2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

std::vector<double> project(const Cloud& c, const std::vector<double>& dir) {
  const auto d = static_cast<std::size_t>(c.dim);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += dir[k] * c.positions[i * d + k];
    out[i] = acc;
  }
  return out;
}

}  // namespace

double w1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("w1: empty sample");
  return w1_sorted(sorted_copy(a), sorted_copy(b));
}

double sliced_w1(const Cloud& a, const Cloud& b, std::size_t n_directions, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("sliced_w1: empty cloud");
  if (a.dim != b.dim) throw std::invalid_argument("sliced_w1: dimension mismatch");
  if (n_directions == 0) throw std::invalid_argument("sliced_w1: need at least one direction");
  const CounterRng rng(seed, Stream::Directions);
  double acc = 0.0;
  for (std::size_t k = 0; k < n_directions; ++k) {
    const auto dir = unit_direction(rng, static_cast<std::uint32_t>(k), a.dim);
    acc += w1_1d(project(a, dir), project(b, dir));
  }
  return acc / static_cast<double>(n_directions);
}

double cloud_distance(const Cloud& a, const Cloud& b, std::uint64_t seed) {
  if (a.dim == 1) return w1_1d(a.positions, b.positions);
  return sliced_w1(a, b, 64, seed);
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

FeatureDictionary::FeatureDictionary(int dim, double beta, std::size_t n_features,
                                     std::uint64_t seed, double max_frequency)
    : dim_(dim), beta_(beta) {
  if (dim < 1) throw std::invalid_argument("feature dictionary: dim must be >= 1");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("feature dictionary: beta in (0,1)");
  if (n_features == 0) throw std::invalid_argument("feature dictionary: need features");
  if (!(max_frequency > 0.05)) throw std::invalid_argument("feature dictionary: max frequency");
  const CounterRng rng(seed, Stream::Features);
  const auto d = static_cast<std::size_t>(dim);
  const double log_lo = std::log(0.05), log_hi = std::log(max_frequency);
  const double c = std::pow(2.0, 1.0 - beta);
  freq_.resize(n_features * d);
  for (std::size_t k = 0; k < n_features; ++k) {
    const auto kk = static_cast<std::uint32_t>(k);
    const auto dir = unit_direction(rng, kk, dim);
    const auto u = rng.uniforms(kk, 0xffffu, 0);
    const double r = std::exp(log_lo + u.u0 * (log_hi - log_lo));
    for (std::size_t i = 0; i < d; ++i) freq_[k * d + i] = r * dir[i];
    phase_.push_back(2.0 * std::numbers::pi * u.u1);
    norm_.push_back(1.0 + c * std::pow(r, beta));
  }

  // Dense slice along each frequency: sup|phi| + dyadic-gap Hoelder quotient.
  constexpr std::size_t n_grid = 4096;
  for (std::size_t k = 0; k < n_features; ++k) {
    const double r = norm_[k] > 1.0 ? std::pow((norm_[k] - 1.0) / c, 1.0 / beta) : 0.0;
    const double span = 4.0 * std::numbers::pi / std::max(r, 1e-3);
    const double dt = span / static_cast<double>(n_grid);
    std::vector<double> v(n_grid);
    double sup = 0.0;
    for (std::size_t i = 0; i < n_grid; ++i) {
      v[i] = std::cos(r * dt * static_cast<double>(i) + phase_[k]) / norm_[k];
      sup = std::max(sup, std::abs(v[i]));
    }
    double holder = 0.0;
    for (std::size_t gap = 1; gap < n_grid; gap *= 2) {
      const double denom = std::pow(dt * static_cast<double>(gap), beta);
      for (std::size_t i = 0; i + gap < n_grid; ++i) {
        holder = std::max(holder, std::abs(v[i + gap] - v[i]) / denom);
      }
    }
    validated_norm_ = std::max(validated_norm_, sup + holder);
  }
  if (validated_norm_ > 1.0 + 1e-9) {
    throw std::logic_error("feature dictionary: a feature leaves the unit C^beta ball");
  }
}

double FeatureDictionary::feature(std::size_t k, std::span<const double> x) const {
  const auto d = static_cast<std::size_t>(dim_);
  double arg = phase_[k];
  for (std::size_t i = 0; i < d; ++i) arg += freq_[k * d + i] * x[i];
  return std::cos(arg) / norm_[k];
}

double FeatureDictionary::lipschitz(std::size_t k) const {
  const auto d = static_cast<std::size_t>(dim_);
  double r2 = 0.0;
  for (std::size_t i = 0; i < d; ++i) r2 += freq_[k * d + i] * freq_[k * d + i];
  return std::sqrt(r2) / norm_[k];
}

double dual_beta_var(const Cloud& a, const Cloud& b, const FeatureDictionary& dict, int threads) {
  if (a.empty() || b.empty()) throw std::invalid_argument("dual_beta_var: empty cloud");
  if (a.dim != dict.dim() || b.dim != dict.dim()) {
    throw std::invalid_argument("dual_beta_var: dimension mismatch");
  }
  std::vector<double> gap(dict.size());
  auto mean = [&](const Cloud& c, std::size_t k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) acc += dict.feature(k, c.point(i));
    return acc / static_cast<double>(c.size());
  };
  parallel_for(dict.size(), threads,
               [&](std::size_t k) { gap[k] = std::abs(mean(a, k) - mean(b, k)); });
  return *std::max_element(gap.begin(), gap.end());
}

std::vector<double> sup_differences(const Trajectory& a, const Trajectory& b) {
  if (a.checkpoints() != b.checkpoints() || a.checkpoints() == 0) {
    throw std::invalid_argument("strong error: checkpoint mismatch");
  }
  const std::size_t n = a.clouds.front().size();
  std::vector<double> sup(n, 0.0);
  for (std::size_t c = 0; c < a.checkpoints(); ++c) {
    const auto& ca = a.clouds[c];
    const auto& cb = b.clouds[c];
    if (ca.size() != n || cb.size() != n || ca.dim != cb.dim) {
      throw std::invalid_argument("strong error: path count mismatch");
    }
    if (std::abs(ca.time - cb.time) > 1e-12 * (1.0 + std::abs(ca.time))) {
      throw std::invalid_argument("strong error: checkpoint times differ");
    }
    const auto d = static_cast<std::size_t>(ca.dim);
    for (std::size_t j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double v = ca.positions[j * d + i] - cb.positions[j * d + i];
        r2 += v * v;
      }
      sup[j] = std::max(sup[j], std::sqrt(r2));
    }
  }
  return sup;
}

MeanWithError strong_error_stats(const Trajectory& a, const Trajectory& b, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("strong error: p must be positive");
  const auto sup = sup_differences(a, b);
  double m = 0.0, m2 = 0.0;
  for (double s : sup) {
    const double v = std::pow(s, p);
    m += v;
    m2 += v * v;
  }
  const double n = static_cast<double>(sup.size());
  m /= n;
  const double var = std::max(0.0, m2 / n - m * m);
  return {m, std::sqrt(var / n)};
}

double strong_error(const Trajectory& a, const Trajectory& b, double p) {
  return strong_error_stats(a, b, p).mean;
}

RateFit rate_fit(const RateTable& table) {
  const auto& r = table.records;
  if (r.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 records");
  const bool up = r[1].parameter > r[0].parameter;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i].parameter > 0.0) || !(r[i].error > 0.0)) {
      throw std::invalid_argument("rate_fit: parameters and errors must be positive");
    }
    if (i > 0 && (up ? !(r[i].parameter > r[i - 1].parameter)
                     : !(r[i].parameter < r[i - 1].parameter))) {
      throw std::invalid_argument("rate_fit: parameters must be strictly monotone");
    }
  }
  const double n = static_cast<double>(r.size());
  double sx = 0, sy = 0;
  for (const auto& rec : r) {
    sx += std::log(rec.parameter);
    sy += std::log(rec.error);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& rec : r) {
    const double dx = std::log(rec.parameter) - mx, dy = std::log(rec.error) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& rec : r) {
    const double e = std::log(rec.error) - (fit.intercept + fit.slope * std::log(rec.parameter));
    sse += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

const RateFit& fit_in_place(RateTable& table) {
  table.fit = rate_fit(table);
  return *table.fit;
}

}  // namespace mvlab
