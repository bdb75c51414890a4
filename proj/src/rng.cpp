#include "mvlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace mvlab {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, c[0], hi0, lo0);
    mulhilo(kM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kW0;
    k[1] += kW1;
  }
  return c;
}

std::array<std::uint32_t, 4> CounterRng::raw(std::uint32_t a, std::uint32_t b,
                                             std::uint32_t slot) const noexcept {
  return philox4x32({a, b, slot, stream_}, key_);
}

CounterRng::Pair CounterRng::uniforms(std::uint32_t a, std::uint32_t b,
                                      std::uint32_t slot) const noexcept {
  const auto w = raw(a, b, slot);
  const std::uint64_t b0 = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
  const std::uint64_t b1 = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
  return {open_unit(b0), open_unit(b1)};
}

NormalPair box_muller(double u0, double u1) noexcept {
  const double r = std::sqrt(-2.0 * std::log(u0));
  const double phi = 2.0 * std::numbers::pi * u1;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace mvlab
