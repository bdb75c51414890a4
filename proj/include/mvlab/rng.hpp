#pragma once

#include <array>
#include <cstdint>

namespace mvlab {

/// Philox4x32-10 block function (Salmon et al., SC'11). Pure: the output is a
/// function of (counter, key) only, so any cell of a random field can be
/// regenerated independently of evaluation order.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Reserved values of the fourth counter word. Keeps independent consumers of
/// the same seed on disjoint streams.
enum class Stream : std::uint32_t {
  Noise = 0,
  Initial = 1,
  Features = 2,
  Calibration = 3,
  Directions = 4,
  Pairs = 5,
  Sampling = 6,
};

/// A counter-addressed source of uniforms. `draw(slot)` returns two uniforms
/// in the open interval (0,1) for cell (a, b, slot) of the given stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(static_cast<std::uint32_t>(stream)) {}

  struct Pair {
    double u0;
    double u1;
  };

  Pair uniforms(std::uint32_t a, std::uint32_t b, std::uint32_t slot) const noexcept;

  /// Four raw 32-bit words for cell (a, b, slot).
  std::array<std::uint32_t, 4> raw(std::uint32_t a, std::uint32_t b,
                                   std::uint32_t slot) const noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t stream_;
};

/// Maps 64 random bits to a double in (0,1); never returns 0 or 1.
inline double open_unit(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Two standard normals from two open uniforms (Box-Muller).
struct NormalPair {
  double z0;
  double z1;
};
NormalPair box_muller(double u0, double u1) noexcept;

}  // namespace mvlab
