#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "mvlab/metrics.hpp"
#include "mvlab/rng.hpp"
#include "mvlab/stable_noise.hpp"

using namespace mvlab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Exponent constant of one symmetric atom pair of weight w:
// 2w int_0^inf (1 - cos u) u^{-1-a} du = 2w Gamma(1-a) cos(pi a / 2) / a.
double pair_constant(double a, double w) {
  return 2.0 * w * boost::math::tgamma(1.0 - a) * std::cos(0.5 * kPi * a) / a;
}

double quantile(std::vector<double> v, double q) {
  const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

std::vector<double> norms(const std::vector<double>& rows, int dim) {
  const auto d = static_cast<std::size_t>(dim);
  std::vector<double> out(rows.size() / d);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += rows[i * d + c] * rows[i * d + c];
    out[i] = std::sqrt(s);
  }
  return out;
}

}  // namespace

TEST_SUITE("stable_noise") {
  TEST_CASE("philox known answers") {
    using A4 = std::array<std::uint32_t, 4>;
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("open uniforms stay inside (0,1)") {
    CHECK(open_unit(0) > 0.0);
    CHECK(open_unit(~std::uint64_t{0}) < 1.0);
    const CounterRng rng(5, Stream::Noise);
    const CounterRng other(5, Stream::Initial);
    CHECK(rng.uniforms(1, 2, 3).u0 == rng.uniforms(1, 2, 3).u0);
    CHECK(rng.uniforms(1, 2, 3).u0 != other.uniforms(1, 2, 3).u0);
  }

  TEST_CASE("cms sampler is odd in the angle and deterministic") {
    for (double a : {0.3, 0.7, 0.95}) {
      for (double th : {0.1, 0.7, 1.4}) {
        CHECK(cms_symmetric(a, -th, 0.8) == -cms_symmetric(a, th, 0.8));
      }
    }
    CHECK(sample_sym_stable_1d(0.7, 0.3, 0.6) == sample_sym_stable_1d(0.7, 0.3, 0.6));
    const auto spec = StableSpec::cylindrical(0.7, {1.0});
    CHECK(increment(spec, 0.1, 3, 4, 9) == increment(spec, 0.1, 3, 4, 9));
  }

  TEST_CASE("symmetric stable characteristic function at xi = 1") {
    const auto spec = StableSpec::cylindrical(0.7, {1.0});
    const auto x = draw_increments(spec, 1.0, 1000000, 11);
    const double xi = 1.0;
    CHECK(std::abs(empirical_cf(x, 1, std::span<const double>(&xi, 1)) - std::exp(-1.0)) < 0.01);
  }

  TEST_CASE("alpha outside (0,1) is rejected") {
    CHECK_THROWS_AS(StableSpec::cylindrical(1.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(StableSpec::cylindrical(0.0, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(StableSpec::isotropic(1.2, 2), std::invalid_argument);
    CHECK_THROWS_AS(StableSpec::cylindrical(0.5, {1.0, -1.0}), std::invalid_argument);
  }

  TEST_CASE("discrete atoms are stored symmetrized") {
    const auto spec = StableSpec::discrete(0.6, {{{1.0, 0.0}, 2.0}, {{0.0, 3.0}, 1.0}});
    const auto& at = spec.atoms();
    CHECK(at.size() == 4);
    for (const auto& a : at) {
      const bool mirrored = std::any_of(at.begin(), at.end(), [&](const SphericalAtom& b) {
        return b.weight == a.weight && b.direction[0] == -a.direction[0] &&
               b.direction[1] == -a.direction[1];
      });
      CHECK(mirrored);
    }
    CHECK(spec.pair_representatives().size() == 2);
    CHECK(spec.pair_representatives()[1].direction[1] == doctest::Approx(1.0));
  }

  TEST_CASE("radial integral matches the gamma-function closed form") {
    for (double a : {0.2, 0.5, 0.8, 0.95}) {
      CHECK(2.0 * levy_radial_integral(a) == doctest::Approx(pair_constant(a, 1.0)).epsilon(1e-6));
    }
  }

  TEST_CASE("cylindrical coordinates are independent") {
    const auto spec = StableSpec::cylindrical(0.8, {1.0, 2.0});
    const auto x = draw_increments(spec, 1.0, 1000000, 21);
    const std::size_t n = x.size() / 2;
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ma += std::abs(x[2 * i]);
      mb += std::abs(x[2 * i + 1]);
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(x[2 * i]) - ma, b = std::abs(x[2 * i + 1]) - mb;
      sab += a * b;
      saa += a * a;
      sbb += b * b;
    }
    CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 0.01);
  }

  TEST_CASE("self-similar quantiles across h and 2h") {
    const double a = 0.8;
    for (const auto& spec : {StableSpec::cylindrical(a, {1.0}), StableSpec::isotropic(a, 2),
                             StableSpec::discrete(a, {{{1.0, 0.0}, 1.0}, {{1.0, 1.0}, 0.5}})}) {
      const auto m1 = norms(draw_increments(spec, 0.25, 200000, 31, 1, 0), spec.dim());
      const auto m2 = norms(draw_increments(spec, 0.5, 200000, 31, 1, 1), spec.dim());
      for (double q : {0.25, 0.5, 0.9}) {
        CHECK(quantile(m2, q) / quantile(m1, q) == doctest::Approx(std::pow(2.0, 1.0 / a)).epsilon(0.03));
      }
    }
  }

  TEST_CASE("self-similarity in Kolmogorov-Smirnov distance") {
    for (const auto& spec : {StableSpec::cylindrical(0.8, {1.0}), StableSpec::isotropic(0.8, 2),
                             StableSpec::discrete(0.8, {{{1.0, 0.0}, 1.0}, {{1.0, 1.0}, 1.0}})}) {
      const double h = 1.0 / 32.0;
      const auto small = draw_increments(spec, h, 100000, 41, 1, 0);
      const auto unit = draw_increments(spec, 1.0, 100000, 41, 1, 1);
      const auto d = static_cast<std::size_t>(spec.dim());
      std::vector<double> a(100000), b(100000);
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = small[i * d] * std::pow(h, -1.0 / spec.alpha());
        b[i] = unit[i * d];
      }
      CHECK(ks_distance(a, b) < 0.01);
    }
  }

  TEST_CASE("isotropic calibration reproduces exp(-h |xi|^alpha)") {
    const auto spec = StableSpec::isotropic(0.8, 2);
    CHECK(spec.isotropic_sigma_unit() > 0.0);
    for (double h : {1.0, 0.5}) {
      const auto x = draw_increments(spec, h, 1000000, 51);
      for (double ang : {0.0, 0.6, 1.3}) {
        const double xi[2] = {std::cos(ang), std::sin(ang)};
        CHECK(std::abs(empirical_cf(x, 2, xi) - std::exp(-h)) < 0.01);
      }
    }
  }

  TEST_CASE("discrete spherical measure matches its characteristic function") {
    const double a = 0.7;
    const double s = 1.0 / std::sqrt(2.0);
    const auto spec = StableSpec::discrete(a, {{{1.0, 0.0}, 1.0}, {{s, s}, 0.5}});
    const auto x = draw_increments(spec, 1.0, 1000000, 61);
    for (auto xi : {std::array<double, 2>{1.0, 0.0}, {0.3, -0.8}, {0.5, 0.5}}) {
      const double e = pair_constant(a, 1.0) * std::pow(std::abs(xi[0]), a) +
                       pair_constant(a, 0.5) * std::pow(std::abs(s * xi[0] + s * xi[1]), a);
      CHECK(spec.symbol(xi) == doctest::Approx(e).epsilon(1e-6));
      CHECK(std::abs(empirical_cf(x, 2, xi) - std::exp(-e)) < 0.01);
    }
  }

  TEST_CASE("cylindrical symbol and law") {
    const auto spec = StableSpec::cylindrical(0.6, {1.0, 0.5});
    const double xi[2] = {0.7, 1.5};
    const double e = std::pow(0.7, 0.6) + std::pow(0.5 * 1.5, 0.6);
    CHECK(spec.symbol(xi) == doctest::Approx(e));
    const auto x = draw_increments(spec, 0.5, 1000000, 71);
    CHECK(std::abs(empirical_cf(x, 2, xi) - std::exp(-0.5 * e)) < 0.01);
  }

  TEST_CASE("Hill estimator recovers the tail index") {
    for (double a : {0.5, 0.8}) {
      const auto spec = StableSpec::cylindrical(a, {1.0});
      const auto x = draw_increments(spec, 1.0, 1000000, 81);
      CHECK(std::abs(hill_tail_index(norms(x, 1), 0.01) - a) < 0.1);
    }
  }

  TEST_CASE("non-degeneracy check") {
    CHECK(check_nd(StableSpec::cylindrical(0.5, {1.0, 1.0, 1.0})).nondegenerate);
    CHECK(check_nd(StableSpec::isotropic(0.5, 2)).nondegenerate);

    const auto flat = StableSpec::discrete(0.5, {{{1.0, 0.0}, 1.0}}, NdPolicy::Unchecked);
    const auto rep = check_nd(flat);
    CHECK_FALSE(rep.nondegenerate);
    CHECK(rep.rank == 1);
    REQUIRE(rep.null_direction);
    CHECK((*rep.null_direction)[0] == doctest::Approx(0.0));
    CHECK(std::abs((*rep.null_direction)[1]) == doctest::Approx(1.0));
    CHECK_THROWS_AS(StableSpec::discrete(0.5, {{{1.0, 0.0}, 1.0}}), std::invalid_argument);

    // Oracle: the two representative directions have nonzero determinant.
    const double s = 1.0 / std::sqrt(2.0);
    const double det = 1.0 * s - 0.0 * s;
    CHECK(std::abs(det) > 1e-12);
    const auto full = check_nd(StableSpec::discrete(0.5, {{{1.0, 0.0}, 1.0}, {{s, s}, 1.0}}));
    CHECK(full.nondegenerate);
    CHECK(full.rank == 2);
    CHECK_FALSE(full.null_direction);
  }

  TEST_CASE("noise grid cells are pure functions of their indices") {
    const auto spec = StableSpec::cylindrical(0.8, {1.0, 1.0});
    const NoiseGrid grid(spec, 99, 16, 1.0, 64);
    std::vector<double> a(2), b(2);
    grid.fine_increment(5, 17, a);
    grid.fine_increment(3, 2, b);
    grid.fine_increment(5, 17, b);
    CHECK(a == b);
    CHECK(a == increment(spec, grid.h_min(), 5, 17, 99));
    CHECK_THROWS_AS(NoiseGrid(spec, 1, 4, 0.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(NoiseGrid(spec, 1, 4, 1.0, 0), std::invalid_argument);
  }

  TEST_CASE("aggregation telescopes exactly") {
    const auto spec = StableSpec::cylindrical(0.8, {1.0});
    const NoiseGrid grid(spec, 7, 10, 1.0, 8);
    const auto id = aggregate(grid, 8);
    const auto one = aggregate(grid, 1);
    const auto two = aggregate(grid, 2);
    CHECK_THROWS_AS(aggregate(grid, 3), std::invalid_argument);
    std::vector<double> v(1);
    for (std::size_t p = 0; p < 10; ++p) {
      double total = 0.0, first = 0.0, second = 0.0;
      for (std::size_t k = 0; k < 8; ++k) {
        grid.fine_increment(p, k, v);
        CHECK(id.at(p, k)[0] == v[0]);
        total += v[0];
        (k < 4 ? first : second) += v[0];
      }
      CHECK(one.at(p, 0)[0] == total);
      CHECK(two.at(p, 0)[0] == first);
      CHECK(two.at(p, 1)[0] == second);
    }
  }

  TEST_CASE("aggregation does not depend on the thread count") {
    const auto spec = StableSpec::isotropic(0.7, 2);
    const NoiseGrid grid(spec, 3, 257, 0.5, 64);
    CHECK(aggregate(grid, 16, 1).values == aggregate(grid, 16, 3).values);
    CHECK(draw_increments(spec, 0.1, 5000, 4, 1) == draw_increments(spec, 0.1, 5000, 4, 3));
  }

  TEST_CASE("increment moments scale with h") {
    const auto spec = StableSpec::cylindrical(0.8, {1.0});
    std::vector<double> hs;
    for (int k = 6; k <= 12; ++k) hs.push_back(std::ldexp(1.0, -k));
    const auto low = increment_moment_check(spec, 0.4, hs, 100000, 5);
    const auto high = increment_moment_check(spec, 2.0, hs, 100000, 5);
    REQUIRE(low.fit);
    REQUIRE(high.fit);
    CHECK(std::abs(low.fit->slope - 0.5) <= 0.1);
    CHECK(std::abs(high.fit->slope - 1.0) <= 0.15);
    // x^q ^ 1 is nonincreasing in q on the same samples.
    const auto mid = increment_moment_check(spec, 1.0, hs, 100000, 5);
    for (std::size_t i = 0; i < hs.size(); ++i) {
      CHECK(low.records[i].error >= mid.records[i].error);
      CHECK(mid.records[i].error >= high.records[i].error);
    }
  }
}
