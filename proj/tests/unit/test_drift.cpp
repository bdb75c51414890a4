#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvlab/drift.hpp"
#include "mvlab/rng.hpp"
#include "mvlab/stable_noise.hpp"

using namespace mvlab;

namespace {

std::vector<double> heavy_cloud(std::size_t n, std::uint64_t seed, double scale = 0.5) {
  const auto spec = StableSpec::cylindrical(0.8, {1.0});
  auto x = draw_increments(spec, 1.0, n, seed);
  for (auto& v : x) v *= scale;
  return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> all(const Kernel& k, const std::vector<double>& src, DriftOptions o,
                        const std::vector<double>& targets) {
  std::vector<double> out(targets.size());
  DriftOperator(k, src, 1, o).eval_all(targets, out);
  return out;
}

}  // namespace

TEST_SUITE("drift") {
  TEST_CASE("pairwise evaluation is the empirical convolution") {
    const auto k = Kernel::power_capped(1, 0.7, 1.0, -1.0);
    const auto src = heavy_cloud(300, 1);
    const Cloud c(0.0, 1, src);
    const DriftOperator op(k, src, 1, {DriftMethod::Pairwise});
    for (std::size_t i = 0; i < 20; ++i) {
      const double x = src[i] + 0.01;
      CHECK(op.eval1(x) == convolve_empirical(k, c, std::span<const double>(&x, 1))[0]);
    }
  }

  TEST_CASE("window evaluation agrees with pairwise to 1e-12") {
    for (const auto& k : {Kernel::power_capped(1, 0.7, 1.0, -1.0), Kernel::gaussian_gradient(1, 0.3),
                          Kernel::tabulated(1, {0.0, 0.5, 2.0}, {0.0, 1.0, 0.25})}) {
      const auto src = heavy_cloud(1000, 2);
      auto targets = heavy_cloud(1000, 3);
      targets.insert(targets.end(), src.begin(), src.begin() + 100);
      const auto ref = all(k, src, {DriftMethod::Pairwise}, targets);
      const auto win = all(k, src, {DriftMethod::Window}, targets);
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(std::abs(win[i] - ref[i]) <= 1e-12 * std::max(1.0, std::abs(ref[i])));
      }
    }
  }

  TEST_CASE("binned evaluation is accurate") {
    const auto k = Kernel::power_capped(1, 0.7, 1.0, -1.0);
    const auto src = heavy_cloud(20000, 4);
    const auto targets = heavy_cloud(2000, 5);
    const auto ref = all(k, src, {DriftMethod::Pairwise}, targets);
    const auto bin = all(k, src, {DriftMethod::Binned}, targets);
    CHECK(max_abs_diff(ref, bin) < 1e-3 * k.sup_norm());
    const DriftOperator autoop(k, src, 1);
    CHECK(autoop.method() == DriftMethod::Binned);
    const DriftOperator small(k, std::vector<double>(src.begin(), src.begin() + 4096), 1);
    CHECK(small.method() == DriftMethod::Pairwise);
  }

  TEST_CASE("periodic evaluation uses nearest images") {
    const double L = 4.0;
    const auto k = Kernel::power_capped(1, 0.7, 1.0, -1.0);
    const std::vector<double> src = {-3.9, 3.9};
    const DriftOperator op(k, src, 1, {DriftMethod::Pairwise, 1, L});
    // -3.9 and 3.9 are 0.2 apart across the boundary.
    CHECK(op.eval1(-3.9) == doctest::Approx(0.5 * k.eval1(0.2)));
    CHECK(periodic_kernel1(k, 7.9, L) == doctest::Approx(k.eval1(-0.1)));
    CHECK(periodic_kernel1(k, L, L) == 0.0);

    const auto cloud = heavy_cloud(20000, 6, 1.0);
    const auto targets = heavy_cloud(1000, 7, 1.0);
    const auto ref = all(k, cloud, {DriftMethod::Pairwise, 1, L}, targets);
    const auto bin = all(k, cloud, {DriftMethod::Binned, 1, L}, targets);
    CHECK(max_abs_diff(ref, bin) < 1e-3);
    CHECK_THROWS_AS(DriftOperator(k, cloud, 1, {DriftMethod::Window, 1, L}), std::invalid_argument);
  }

  TEST_CASE("evaluation does not depend on the thread count") {
    const auto k = Kernel::power_capped(1, 0.7, 1.0, -1.0);
    const auto src = heavy_cloud(10000, 8);
    for (auto m : {DriftMethod::Pairwise, DriftMethod::Window, DriftMethod::Binned}) {
      CHECK(all(k, src, {m, 1}, src) == all(k, src, {m, 3}, src));
    }
  }

  TEST_CASE("multi-dimensional pairwise and shape errors") {
    const auto k = Kernel::power_capped(2, 0.5, 1.0, 1.0);
    const std::vector<double> src = {0.0, 0.0, 0.5, 0.0};
    const DriftOperator op(k, src, 2);
    CHECK(op.method() == DriftMethod::Pairwise);
    const double x[2] = {0.0, 0.0};
    std::vector<double> out(2);
    op.eval(x, out);
    CHECK(out[0] == doctest::Approx(0.5 * -std::pow(0.5, 0.5)));
    CHECK(out[1] == 0.0);
    CHECK_THROWS_AS(DriftOperator(k, src, 2, {DriftMethod::Binned}), std::invalid_argument);
    CHECK_THROWS_AS(DriftOperator(k, std::vector<double>{}, 2), std::invalid_argument);
  }
}
