#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace mvlab {

/// N particles in R^d at one instant; positions row-major N x d.
struct Cloud {
  double time = 0.0;
  int dim = 1;
  std::vector<double> positions;
  std::vector<std::uint32_t> ids;

  Cloud() = default;
  Cloud(double t, int d, std::vector<double> pos) : time(t), dim(d), positions(std::move(pos)) {
    if (d < 1 || positions.size() % static_cast<std::size_t>(d) != 0) {
      throw std::invalid_argument("cloud: positions are not a whole number of d-vectors");
    }
    ids.resize(size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
  }

  std::size_t size() const noexcept { return positions.size() / static_cast<std::size_t>(dim); }
  bool empty() const noexcept { return positions.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {positions.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  std::span<double> point(std::size_t i) {
    return {positions.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }

  /// Coordinate c of every particle.
  std::vector<double> coordinate(int c) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = positions[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
    }
    return out;
  }
};

}  // namespace mvlab
