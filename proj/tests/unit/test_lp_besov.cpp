#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "mvlab/lp_besov.hpp"

using namespace mvlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

GridField cosine(std::size_t n, double freq, double L = kPi) {
  GridField f(L, n, 1);
  for (std::size_t i = 0; i < n; ++i) f.values[i] = std::cos(freq * f.coordinate(i));
  return f;
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace

TEST_SUITE("lp_besov") {
  TEST_CASE("cutoff") {
    CHECK(lp_cutoff(0.0) == 1.0);
    CHECK(lp_cutoff(1.0) == 1.0);
    CHECK(lp_cutoff(1.5) == 0.0);
    CHECK(lp_cutoff(1.25) == doctest::Approx(0.5));
    for (double r = 0.9; r < 1.6; r += 0.01) CHECK(lp_cutoff(r + 0.01) <= lp_cutoff(r));
  }

  TEST_CASE("dyadic partition of unity") {
    for (int d : {1, 2}) {
      const auto m = build_masks(d == 1 ? 4096 : 128, d, kPi);
      CHECK(partition_error(m) < 1e-12);
      CHECK(m.psi(-1)[0] == 1.0);
      for (int j = 0; j <= m.j_max; ++j) CHECK(m.psi(j)[0] == 0.0);
    }
    const auto m = build_masks(4096, 1, 3.0);
    for (std::size_t k = 0; k < m.n; ++k) {
      const double xi = std::abs(wavenumber(k, m.n, 3.0));
      int active = 0;
      for (int j = 0; j <= m.j_max; ++j) {
        if (m.psi(j)[k] != 0.0) {
          ++active;
          CHECK(xi > std::ldexp(1.0, j - 1));
          CHECK(xi < 1.5 * std::ldexp(1.0, j));
        }
      }
      if (m.psi(-1)[k] != 0.0) ++active;
      CHECK(active <= 2);
    }
  }

  TEST_CASE("blocks of simple fields") {
    GridField c(kPi, 512, 1);
    for (auto& v : c.values) v = 2.5;
    const auto pc = besov_profile(c, kInf);
    CHECK(pc.norms[0] == doctest::Approx(2.5));
    for (std::size_t i = 1; i < pc.norms.size(); ++i) CHECK(pc.norms[i] < 1e-12);

    const auto mode = cosine(512, 8.0);
    const auto pm = besov_profile(mode, kInf);
    for (std::size_t i = 0; i < pm.j.size(); ++i) {
      CHECK(pm.norms[i] == doctest::Approx(pm.j[i] == 3 ? 1.0 : 0.0).epsilon(1e-10));
    }
    CHECK(besov_norm(pm, 0.5) == doctest::Approx(std::exp2(1.5)));
    CHECK(besov_norm_l1(pm, 0.5) == doctest::Approx(std::exp2(1.5)));

    const auto w = weierstrass_field(kPi, 1024, 0.3);
    const auto blocks = block_decompose(w);
    GridField sum(kPi, 1024, 1);
    for (const auto& b : blocks) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum.values[i] += b.values[i];
    }
    CHECK(max_abs_diff(sum, w) < 1e-12);
    CHECK_THROWS_AS(block_decompose(w, build_masks(512, 1, kPi)), std::invalid_argument);
  }

  TEST_CASE("L^p norms") {
    const auto c = cosine(1024, 3.0);
    CHECK(grid_lp_norm(c, kInf) == doctest::Approx(1.0));
    CHECK(grid_lp_norm(c, 2.0) == doctest::Approx(std::sqrt(kPi)));
    CHECK(grid_lp_norm(c, 1.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(grid_lp_norm(c, 0.5), std::invalid_argument);
  }

  TEST_CASE("Besov norms are stable under grid refinement") {
    for (double beta : {0.3, 0.7}) {
      for (std::size_t n : {1024, 4096, 16384}) {
        CHECK(besov_norm(weierstrass_field(kPi, n, beta), beta, kInf) ==
              doctest::Approx(1.0).epsilon(0.05));
      }
    }
    auto band = [](std::size_t n) {
      GridField f(kPi, n, 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = f.coordinate(i);
        f.values[i] = std::sin(x) + 0.5 * std::cos(5.0 * x) + 0.25 * std::sin(13.0 * x);
      }
      return f;
    };
    const double ref = besov_norm(band(256), 0.6, 2.0);
    for (std::size_t n : {1024, 4096}) {
      CHECK(besov_norm(band(n), 0.6, 2.0) == doctest::Approx(ref).epsilon(1e-10));
    }
  }

  TEST_CASE("Bernstein quotients") {
    for (std::size_t n : {256, 1024}) {
      const auto w = weierstrass_field(kPi, n, 0.4);
      const auto r1 = bernstein_check(w, 1, kInf, kInf);
      CHECK(r1.pass);
      CHECK(r1.max_ratio > 0.1);
      CHECK(bernstein_check(w, 2, kInf, kInf).pass);
      CHECK(bernstein_check(w, 0, 2.0, kInf).pass);
    }
    GridField g(kPi, 64, 2);
    for (std::size_t a = 0; a < 64; ++a) {
      for (std::size_t b = 0; b < 64; ++b) {
        g.values[a * 64 + b] = std::cos(3.0 * g.coordinate(a)) * std::sin(2.0 * g.coordinate(b));
      }
    }
    CHECK(bernstein_check(g, 1, kInf, kInf).pass);
    CHECK_THROWS_AS(bernstein_check(g, 2, kInf, kInf), std::invalid_argument);
    CHECK_THROWS_AS(bernstein_check(g, -1, kInf, kInf), std::invalid_argument);
  }

  TEST_CASE("interpolation inequality") {
    const auto w = weierstrass_field(kPi, 2048, 0.5);
    const auto rep = interpolation_check(w, 0.5, 0.1, 0.5, kInf);
    CHECK(rep.pass);
    CHECK(rep.ratio > 1.0);
    CHECK(rep.constant == doctest::Approx(interpolation_constant(0.5, 0.1, 0.5)));
    CHECK_THROWS_AS(interpolation_check(w, 0.1, 0.5, 0.5, kInf), std::invalid_argument);
    CHECK_THROWS_AS(interpolation_check(w, 0.5, 0.1, 1.0, kInf), std::invalid_argument);
  }

  TEST_CASE("linear PDE against exact solutions") {
    const auto noise = StableSpec::cylindrical(0.8, {1.0});
    const double xi = 4.0, lambda = 0.3;
    const auto u0 = cosine(256, xi);
    const auto out = linear_pde_evolve(u0, {}, nullptr, lambda, noise, 0.01, {0.0, 0.5});
    CHECK(max_abs_diff(out[0], u0) < 1e-13);
    const double decay = std::exp(-0.5 * (std::pow(xi, 0.8) + lambda));
    GridField expect(kPi, 256, 1);
    for (std::size_t i = 0; i < 256; ++i) expect.values[i] = decay * u0.values[i];
    CHECK(max_abs_diff(out[1], expect) < 1e-12);

    // Transport by a constant drift c: u(t, x) = e^{-t psi} cos(xi (x + c t)).
    const double c = 0.7;
    GridField b(kPi, 256, 1);
    for (auto& v : b.values) v = c;
    const auto moved = linear_pde_evolve(u0, {b}, nullptr, 0.0, noise, 1e-3, {0.5});
    const double free_decay = std::exp(-0.5 * std::pow(xi, 0.8));
    GridField shifted(kPi, 256, 1);
    for (std::size_t i = 0; i < 256; ++i) {
      shifted.values[i] = free_decay * std::cos(xi * (u0.coordinate(i) + c * 0.5));
    }
    CHECK(max_abs_diff(moved[0], shifted) < 1e-8);

    GridField zero(kPi, 64, 1), force(kPi, 64, 1);
    for (auto& v : force.values) v = 2.0;
    const auto forced = linear_pde_evolve(zero, {}, &force, 0.5, noise, 0.01, {1.0});
    CHECK(forced[0].values[10] == doctest::Approx(2.0 * (1.0 - std::exp(-0.5)) / 0.5).epsilon(1e-4));

    for (auto& v : b.values) v = 100.0;
    CHECK_THROWS_AS(linear_pde_evolve(u0, {b}, nullptr, 0.0, noise, 0.01, {0.1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(linear_pde_evolve(u0, {}, nullptr, 0.0, noise, 0.01, {0.105}),
                    std::invalid_argument);
    CHECK_THROWS_AS(linear_pde_evolve(u0, {}, nullptr, 0.0, StableSpec::isotropic(0.8, 2), 0.01, {0.1}),
                    std::invalid_argument);
  }

  TEST_CASE("smooth data gain no singular smoothing") {
    const auto noise = StableSpec::cylindrical(0.7, {1.0});
    const auto fit = smoothing_exponent_fit(cosine(1024, 1.0), {}, noise, 0.6, 0.4, 0.0625,
                                            0.0625 / 512);
    CHECK(std::abs(fit.exponent) < 0.05);
    CHECK(fit.times.size() == 13);
    CHECK_THROWS_AS(smoothing_exponent_fit(cosine(64, 1.0), {}, noise, 0.6, 0.8, 0.0625, 1e-4),
                    std::invalid_argument);
  }

  TEST_CASE("windowed kernel field") {
    const auto k = Kernel::power_capped(1, 0.5, 1.0, -1.0);
    const auto g = windowed_kernel_field(k, 8.0, 256);
    CHECK(g.values[0] == doctest::Approx(0.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 256; ++i) {
      if (std::abs(g.coordinate(i)) <= 4.0) CHECK(g.values[i] == k.eval1(g.coordinate(i)));
    }
    CHECK_THROWS_AS(windowed_kernel_field(Kernel::zero(2), 8.0, 64), std::invalid_argument);
  }
}
