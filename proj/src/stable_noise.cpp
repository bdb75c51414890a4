#include "mvlab/stable_noise.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "mvlab/parallel.hpp"

namespace mvlab {

namespace {

constexpr std::uint64_t kCalibrationSeed = 0x6d766c6162u;  // fixed across runs

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("stable index alpha must lie in (0,1)");
  }
}

std::vector<double> normalized(const std::vector<double>& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw std::invalid_argument("spherical atom direction must be a nonzero finite vector");
  }
  const double n = std::sqrt(n2);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

bool same_direction(const std::vector<double>& a, const std::vector<double>& b, double sign) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - sign * b[i]) > 1e-12) return false;
  }
  return true;
}

}  // namespace

double cms_symmetric(double alpha, double theta, double w) noexcept {
  const double inv = 1.0 / alpha;
  return std::sin(alpha * theta) / std::pow(std::cos(theta), inv) *
         std::pow(std::cos((1.0 - alpha) * theta) / w, (1.0 - alpha) * inv);
}

double sample_sym_stable_1d(double alpha, double u_angle, double u_exp) noexcept {
  const double theta = std::numbers::pi * (u_angle - 0.5);
  const double w = -std::log(u_exp);
  return cms_symmetric(alpha, theta, w);
}

double sample_positive_stable(double a, double u_angle, double u_exp) noexcept {
  const double v = std::numbers::pi * u_angle;
  const double e = -std::log(u_exp);
  return std::sin(a * v) / std::pow(std::sin(v), 1.0 / a) *
         std::pow(std::sin((1.0 - a) * v) / e, (1.0 - a) / a);
}

double levy_radial_integral(double alpha) {
  require_alpha(alpha);
  // Integration by parts: I = (1/alpha) int_0^inf sin(u) u^{-alpha} du.
  boost::math::quadrature::ooura_fourier_sin<double> integrator;
  const auto [value, err] =
      integrator.integrate([alpha](double u) { return std::pow(u, -alpha); }, 1.0);
  (void)err;
  return value / alpha;
}

double calibrate_isotropic_sigma(double alpha, std::size_t draws, double rel_tol) {
  require_alpha(alpha);
  const CounterRng rng(kCalibrationSeed, Stream::Calibration);
  const double a = 0.5 * alpha;
  std::vector<double> s(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const auto u = rng.uniforms(static_cast<std::uint32_t>(i), 0, 0);
    s[i] = sample_positive_stable(a, u.u0, u.u1);
  }
  const double target = std::exp(-1.0);
  auto cf = [&](double sigma) {
    const double c = 0.5 * sigma * sigma;
    double acc = 0.0;
    for (double v : s) acc += std::exp(-c * v);
    return acc / static_cast<double>(draws);
  };
  // cf is decreasing in sigma.
  double lo = 1e-3, hi = 1e3;
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (cf(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

StableSpec StableSpec::cylindrical(double alpha, std::vector<double> axis_scales) {
  require_alpha(alpha);
  if (axis_scales.empty()) throw std::invalid_argument("cylindrical noise needs d >= 1 scales");
  for (double s : axis_scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("cylindrical axis scales must be positive");
    }
  }
  StableSpec spec;
  spec.alpha_ = alpha;
  spec.dim_ = static_cast<int>(axis_scales.size());
  spec.structure_ = NoiseStructure::Cylindrical;
  spec.axis_scales_ = std::move(axis_scales);
  return spec;
}

StableSpec StableSpec::isotropic(double alpha, int dim, double scale) {
  require_alpha(alpha);
  if (dim < 1) throw std::invalid_argument("isotropic noise needs d >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("isotropic scale must be positive");
  }
  StableSpec spec;
  spec.alpha_ = alpha;
  spec.dim_ = dim;
  spec.structure_ = NoiseStructure::Isotropic;
  spec.iso_scale_ = scale;
  spec.iso_sigma_unit_ = calibrate_isotropic_sigma(alpha);
  return spec;
}

StableSpec StableSpec::discrete(double alpha, std::vector<SphericalAtom> atoms, NdPolicy policy) {
  require_alpha(alpha);
  if (atoms.empty()) throw std::invalid_argument("discrete spherical measure needs atoms");
  const std::size_t d = atoms.front().direction.size();
  if (d == 0) throw std::invalid_argument("atom directions must be nonempty");

  StableSpec spec;
  spec.alpha_ = alpha;
  spec.dim_ = static_cast<int>(d);
  spec.structure_ = NoiseStructure::DiscreteSpherical;

  // Group atoms into +-theta pairs; one-sided input is mirrored.
  struct Pair {
    std::vector<double> dir;
    std::optional<double> plus, minus;
  };
  std::vector<Pair> groups;
  for (const auto& atom : atoms) {
    if (atom.direction.size() != d) throw std::invalid_argument("atom dimension mismatch");
    if (!(atom.weight > 0.0) || !std::isfinite(atom.weight)) {
      throw std::invalid_argument("atom weights must be positive");
    }
    auto dir = normalized(atom.direction);
    bool placed = false;
    for (auto& g : groups) {
      if (same_direction(g.dir, dir, 1.0)) {
        g.plus = g.plus.value_or(0.0) + atom.weight;
        placed = true;
      } else if (same_direction(g.dir, dir, -1.0)) {
        g.minus = g.minus.value_or(0.0) + atom.weight;
        placed = true;
      }
      if (placed) break;
    }
    if (!placed) groups.push_back({std::move(dir), atom.weight, std::nullopt});
  }

  const double radial = levy_radial_integral(alpha);
  for (auto& g : groups) {
    double w = *g.plus;
    if (g.minus && std::abs(*g.minus - w) > 1e-12 * w) {
      throw std::invalid_argument("spherical measure must be symmetric: weights of +theta and "
                                  "-theta differ");
    }
    std::vector<double> neg(g.dir.size());
    for (std::size_t i = 0; i < d; ++i) neg[i] = -g.dir[i];
    spec.atoms_.push_back({g.dir, w});
    spec.atoms_.push_back({neg, w});
    spec.pairs_.push_back({g.dir, w});
    spec.pair_c_.push_back(2.0 * w * radial);
  }

  if (policy == NdPolicy::Require && !check_nd(spec).nondegenerate) {
    throw std::invalid_argument("spherical measure is degenerate: atom directions do not span R^d");
  }
  return spec;
}

double StableSpec::symbol(std::span<const double> xi) const {
  if (xi.size() != static_cast<std::size_t>(dim_)) throw std::invalid_argument("symbol: dim");
  switch (structure_) {
    case NoiseStructure::Cylindrical: {
      double acc = 0.0;
      for (int i = 0; i < dim_; ++i) acc += std::pow(axis_scales_[i] * std::abs(xi[i]), alpha_);
      return acc;
    }
    case NoiseStructure::Isotropic: {
      double n2 = 0.0;
      for (double x : xi) n2 += x * x;
      return std::pow(iso_scale_ * std::sqrt(n2), alpha_);
    }
    case NoiseStructure::DiscreteSpherical: {
      double acc = 0.0;
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        double dot = 0.0;
        for (int i = 0; i < dim_; ++i) dot += pairs_[p].direction[i] * xi[i];
        acc += pair_c_[p] * std::pow(std::abs(dot), alpha_);
      }
      return acc;
    }
  }
  return 0.0;
}

std::uint32_t StableSpec::slots() const noexcept {
  switch (structure_) {
    case NoiseStructure::Cylindrical:
      return static_cast<std::uint32_t>(dim_);
    case NoiseStructure::Isotropic:
      return 1u + static_cast<std::uint32_t>((dim_ + 1) / 2);
    case NoiseStructure::DiscreteSpherical:
      return static_cast<std::uint32_t>(pairs_.size());
  }
  return 0;
}

void StableSpec::increment(double h, const CounterRng& rng, std::uint32_t path,
                           std::uint32_t step, std::span<double> out) const {
  const double scale = std::pow(h, 1.0 / alpha_);
  switch (structure_) {
    case NoiseStructure::Cylindrical:
      for (int i = 0; i < dim_; ++i) {
        const auto u = rng.uniforms(path, step, static_cast<std::uint32_t>(i));
        out[i] = axis_scales_[i] * scale * sample_sym_stable_1d(alpha_, u.u0, u.u1);
      }
      return;
    case NoiseStructure::Isotropic: {
      const auto us = rng.uniforms(path, step, 0);
      const double s = sample_positive_stable(0.5 * alpha_, us.u0, us.u1);
      const double amp = iso_sigma_unit_ * iso_scale_ * scale * std::sqrt(s);
      for (int i = 0; i < dim_; i += 2) {
        const auto u = rng.uniforms(path, step, 1u + static_cast<std::uint32_t>(i / 2));
        const auto z = box_muller(u.u0, u.u1);
        out[i] = amp * z.z0;
        if (i + 1 < dim_) out[i + 1] = amp * z.z1;
      }
      return;
    }
    case NoiseStructure::DiscreteSpherical:
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t p = 0; p < pairs_.size(); ++p) {
        const auto u = rng.uniforms(path, step, static_cast<std::uint32_t>(p));
        const double x =
            std::pow(pair_c_[p] * h, 1.0 / alpha_) * sample_sym_stable_1d(alpha_, u.u0, u.u1);
        for (int i = 0; i < dim_; ++i) out[i] += pairs_[p].direction[i] * x;
      }
      return;
  }
}

std::string StableSpec::describe() const {
  std::ostringstream os;
  os << "alpha=" << alpha_ << " d=" << dim_ << " structure=";
  switch (structure_) {
    case NoiseStructure::Cylindrical:
      os << "cylindrical";
      break;
    case NoiseStructure::Isotropic:
      os << "isotropic(scale=" << iso_scale_ << ", sigma1=" << iso_sigma_unit_ << ")";
      break;
    case NoiseStructure::DiscreteSpherical:
      os << "discrete(" << pairs_.size() << " pairs)";
      break;
  }
  return os.str();
}

std::vector<double> increment(const StableSpec& spec, double h, std::uint32_t path,
                              std::uint32_t step, std::uint64_t seed) {
  if (!(h > 0.0)) throw std::invalid_argument("increment: step h must be positive");
  std::vector<double> out(static_cast<std::size_t>(spec.dim()));
  spec.increment(h, CounterRng(seed, Stream::Noise), path, step, out);
  return out;
}

NdReport check_nd(const StableSpec& spec) {
  const int d = spec.dim();
  NdReport report;
  if (spec.structure() != NoiseStructure::DiscreteSpherical) {
    report.nondegenerate = true;
    report.rank = d;
    return report;
  }
  const auto& pairs = spec.pair_representatives();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pairs.size()), d);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (int i = 0; i < d; ++i) m(static_cast<Eigen::Index>(p), i) = pairs[p].direction[i];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  report.rank = static_cast<int>(lu.rank());
  report.nondegenerate = report.rank == d;
  if (!report.nondegenerate) {
    const Eigen::MatrixXd ker = lu.kernel();
    Eigen::VectorXd v = ker.col(0);
    v.normalize();
    // Canonical sign: first nonzero component positive.
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    report.null_direction = std::vector<double>(v.data(), v.data() + v.size());
  }
  return report;
}

NoiseGrid::NoiseGrid(StableSpec spec, std::uint64_t seed, std::size_t n_paths, double horizon,
                     std::size_t fine_steps)
    : spec_(std::move(spec)),
      seed_(seed),
      n_paths_(n_paths),
      horizon_(horizon),
      fine_steps_(fine_steps),
      rng_(seed, Stream::Noise) {
  if (!(horizon > 0.0)) throw std::invalid_argument("noise grid horizon must be positive");
  if (fine_steps == 0) throw std::invalid_argument("noise grid needs at least one fine step");
  if (n_paths > 0xffffffffu || fine_steps > 0xffffffffu) {
    throw std::invalid_argument("noise grid index exceeds 32-bit counter range");
  }
}

void NoiseGrid::fine_increment(std::size_t path, std::size_t step, std::span<double> out) const {
  spec_.increment(h_min(), rng_, static_cast<std::uint32_t>(path),
                  static_cast<std::uint32_t>(step), out);
}

IncrementTable aggregate(const NoiseGrid& grid, std::size_t coarse_steps, int threads) {
  if (coarse_steps == 0 || grid.fine_steps() % coarse_steps != 0) {
    throw std::invalid_argument("aggregate: coarse step count must divide the fine step count");
  }
  const std::size_t ratio = grid.fine_steps() / coarse_steps;
  const auto d = static_cast<std::size_t>(grid.dim());
  IncrementTable table;
  table.n_paths = grid.n_paths();
  table.steps = coarse_steps;
  table.dim = grid.dim();
  table.h = grid.horizon() / static_cast<double>(coarse_steps);
  table.values.assign(table.n_paths * coarse_steps * d, 0.0);
  parallel_for(grid.n_paths(), threads, [&](std::size_t j) {
    std::vector<double> inc(d);
    for (std::size_t k = 0; k < coarse_steps; ++k) {
      double* cell = table.values.data() + (j * coarse_steps + k) * d;
      for (std::size_t r = 0; r < ratio; ++r) {
        grid.fine_increment(j, k * ratio + r, inc);
        for (std::size_t i = 0; i < d; ++i) cell[i] += inc[i];
      }
    }
  });
  return table;
}

std::vector<double> draw_increments(const StableSpec& spec, double h, std::size_t count,
                                    std::uint64_t seed, int threads, std::uint32_t step) {
  const auto d = static_cast<std::size_t>(spec.dim());
  std::vector<double> out(count * d);
  const CounterRng rng(seed, Stream::Noise);
  parallel_for(count, threads, [&](std::size_t j) {
    spec.increment(h, rng, static_cast<std::uint32_t>(j), step,
                   std::span<double>(out.data() + j * d, d));
  });
  return out;
}

RateTable increment_moment_check(const StableSpec& spec, double q, std::span<const double> hs,
                                 std::size_t draws, std::uint64_t seed, int threads) {
  if (!(q > 0.0)) throw std::invalid_argument("moment order q must be positive");
  RateTable table;
  table.name = "increment_moment";
  table.parameter_name = "h";
  const auto d = static_cast<std::size_t>(spec.dim());
  for (std::size_t level = 0; level < hs.size(); ++level) {
    const auto x = draw_increments(spec, hs[level], draws, seed, threads,
                                   static_cast<std::uint32_t>(level));
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t j = 0; j < draws; ++j) {
      double n2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) n2 += x[j * d + i] * x[j * d + i];
      const double v = std::min(std::pow(std::sqrt(n2), q), 1.0);
      sum += v;
      sum2 += v * v;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    table.add(hs[level], mean, std::sqrt(var / n));
  }
  if (table.records.size() >= 3) fit_in_place(table);
  return table;
}

double empirical_cf(std::span<const double> samples, int dim, std::span<const double> xi) {
  const auto d = static_cast<std::size_t>(dim);
  const std::size_t n = samples.size() / d;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += xi[i] * samples[j * d + i];
    acc += std::cos(dot);
  }
  return acc / static_cast<double>(n);
}

double hill_tail_index(std::span<const double> magnitudes, double top_fraction) {
  std::vector<double> x(magnitudes.begin(), magnitudes.end());
  for (double& v : x) v = std::abs(v);
  const auto k = static_cast<std::size_t>(top_fraction * static_cast<double>(x.size()));
  if (k < 2 || k >= x.size()) throw std::invalid_argument("hill: too few samples");
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k), x.end(),
                   std::greater<>());
  const double threshold = x[k];
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) acc += std::log(x[i] / threshold);
  return static_cast<double>(k) / acc;
}

}  // namespace mvlab
