#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "mvlab/metrics.hpp"
#include "mvlab/rng.hpp"

using namespace mvlab;

namespace {

// Oracle: integral of |F_a - F_b| over the merged support.
double cdf_w1(std::vector<double> a, std::vector<double> b) {
  std::vector<double> pts(a);
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto cdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) /
           static_cast<double>(s.size());
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    acc += std::abs(cdf(a, pts[i]) - cdf(b, pts[i])) * (pts[i + 1] - pts[i]);
  }
  return acc;
}

std::vector<double> uniforms(std::size_t n, std::uint64_t seed, double scale) {
  const CounterRng rng(seed, Stream::Initial);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * (rng.uniforms(static_cast<std::uint32_t>(i), 0, 0).u0 - 0.5);
  return v;
}

Trajectory path(std::vector<std::vector<double>> rows) {
  Trajectory t;
  for (std::size_t c = 0; c < rows.size(); ++c) t.clouds.emplace_back(0.1 * static_cast<double>(c), 1, rows[c]);
  return t;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("sorted matching equals the best permutation") {
    const auto a = uniforms(8, 1, 4.0);
    const auto b = uniforms(8, 2, 6.0);
    std::vector<std::size_t> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    double best = 1e300;
    do {
      double acc = 0.0;
      for (std::size_t i = 0; i < 8; ++i) acc += std::abs(a[i] - b[perm[i]]);
      best = std::min(best, acc / 8.0);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(w1_1d(a, b) == doctest::Approx(best).epsilon(1e-12));
  }

  TEST_CASE("W1 on Diracs and unequal sizes") {
    CHECK(w1_1d(std::vector<double>{2.0}, std::vector<double>{-1.5}) == doctest::Approx(3.5));
    CHECK(w1_1d(std::vector<double>(10, 1.0), std::vector<double>(10, 1.25)) == doctest::Approx(0.25));
    const auto a = uniforms(3, 5, 2.0);
    const auto b = uniforms(5, 6, 3.0);
    CHECK(w1_1d(a, b) == doctest::Approx(cdf_w1(a, b)).epsilon(1e-2));
    const auto c = uniforms(700, 7, 2.0);
    CHECK(w1_1d(c, b) == doctest::Approx(cdf_w1(c, b)).epsilon(1e-2));
    CHECK_THROWS_AS(w1_1d(std::vector<double>{}, b), std::invalid_argument);
  }

  TEST_CASE("metric axioms") {
    const auto a = uniforms(64, 11, 1.0);
    const auto b = uniforms(64, 12, 3.0);
    auto c = uniforms(64, 13, 2.0);
    for (auto& v : c) v += 0.4;
    CHECK(w1_1d(a, a) == 0.0);
    CHECK(w1_1d(a, b) == w1_1d(b, a));
    CHECK(w1_1d(a, c) <= w1_1d(a, b) + w1_1d(b, c) + 1e-15);
    std::vector<double> shifted(a);
    for (auto& v : shifted) v += 0.3;
    CHECK(w1_1d(a, shifted) == doctest::Approx(0.3));
  }

  TEST_CASE("sliced W1 of two Diracs in the plane") {
    // Oracle: E|theta.v| = 2|v|/pi for uniform theta on the circle.
    const Cloud a(0.0, 2, {0.0, 0.0});
    const Cloud b(0.0, 2, {3.0, 4.0});
    CHECK(sliced_w1(a, b, 4096, 1) == doctest::Approx(10.0 / std::numbers::pi).epsilon(0.02));
    CHECK(sliced_w1(a, b, 64, 3) == sliced_w1(a, b, 64, 3));
    CHECK(cloud_distance(Cloud(0.0, 1, {1.0}), Cloud(0.0, 1, {3.0})) == 2.0);
    CHECK_THROWS_AS(sliced_w1(a, Cloud(0.0, 1, {1.0}), 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(sliced_w1(a, b, 0, 1), std::invalid_argument);
  }

  TEST_CASE("Kolmogorov-Smirnov statistic") {
    CHECK(ks_distance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) == 0.0);
    CHECK(ks_distance(std::vector<double>{0, 1}, std::vector<double>{5, 6}) == 1.0);
    CHECK(ks_distance(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1.5}) ==
          doctest::Approx(0.5));
  }

  TEST_CASE("feature dictionary dual distance") {
    const FeatureDictionary small(1, 0.7, 32, 9);
    const FeatureDictionary big(1, 0.7, 256, 9);
    CHECK(big.validated_norm() <= 1.0 + 1e-9);
    for (std::size_t k = 0; k < 32; ++k) {
      CHECK(small.frequency(k)[0] == big.frequency(k)[0]);
    }
    const Cloud x(0.0, 1, {0.0});
    for (double y : {1e-3, 0.05, 0.5, 4.0}) {
      const Cloud cy(0.0, 1, {y});
      const double d = dual_beta_var(x, cy, big);
      CHECK(d <= std::pow(y, 0.7) + 1e-12);
      CHECK(d <= 2.0);
      CHECK(dual_beta_var(x, cy, small) <= d);
    }
    const auto a = uniforms(500, 21, 2.0);
    const auto b = uniforms(500, 22, 2.5);
    const Cloud ca(0.0, 1, a), cb(0.0, 1, b);
    double lip = 0.0;
    for (std::size_t k = 0; k < big.size(); ++k) lip = std::max(lip, big.lipschitz(k));
    CHECK(dual_beta_var(ca, cb, big) <= lip * w1_1d(a, b) + 1e-12);
    CHECK(dual_beta_var(ca, cb, big, 3) == dual_beta_var(ca, cb, big, 1));
    CHECK(dual_beta_var(ca, ca, big) == 0.0);
    CHECK_THROWS_AS(FeatureDictionary(1, 1.0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(dual_beta_var(Cloud(0.0, 2, {0.0, 0.0}), ca, big), std::invalid_argument);
  }

  TEST_CASE("strong error of a fixture") {
    const auto a = path({{0.0, 0.0}, {1.0, 2.0}, {2.0, 1.0}});
    const auto b = path({{0.0, 0.1}, {1.2, 1.9}, {2.3, 1.0}});
    // Per-path sups: 0.3 and 0.1.
    const auto sup = sup_differences(a, b);
    CHECK(sup[0] == doctest::Approx(0.3));
    CHECK(sup[1] == doctest::Approx(0.1));
    CHECK(strong_error(a, b, 2.0) == doctest::Approx(0.05));
    CHECK(strong_error(a, b, 1.0) == doctest::Approx(0.2));
    const auto st = strong_error_stats(a, b, 1.0);
    CHECK(st.std_error == doctest::Approx(0.1 / std::sqrt(2.0)));
    CHECK_THROWS_AS(strong_error(a, b, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(strong_error(a, path({{0.0, 0.0}}), 2.0), std::invalid_argument);
  }

  TEST_CASE("log-log rate fit") {
    RateTable t;
    for (double h : {0.5, 0.25, 0.125, 0.0625}) t.add(h, 3.0 * std::pow(h, 1.5));
    const auto fit = fit_in_place(t);
    CHECK(fit.slope == doctest::Approx(1.5));
    CHECK(std::exp(fit.intercept) == doctest::Approx(3.0));
    CHECK(fit.r2 == doctest::Approx(1.0));
    REQUIRE(t.fit);
    RateTable noisy;
    noisy.add(1, 1.0);
    noisy.add(2, 0.6);
    noisy.add(4, 0.2);
    noisy.add(8, 0.15);
    const auto nf = rate_fit(noisy);
    CHECK(nf.slope < 0.0);
    CHECK(nf.r2 < 1.0);
    CHECK(nf.r2 > 0.9);

    RateTable two;
    two.add(1, 1);
    two.add(2, 2);
    CHECK_THROWS_AS(rate_fit(two), std::invalid_argument);
    two.add(2, 3);
    CHECK_THROWS_AS(rate_fit(two), std::invalid_argument);
    RateTable neg;
    neg.add(1, 1);
    neg.add(2, 0);
    neg.add(3, 1);
    CHECK_THROWS_AS(rate_fit(neg), std::invalid_argument);
  }
}
