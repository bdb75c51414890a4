#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mvlab {

/// In-place complex FFT over a 1-D or 2-D grid with an owned, FFTW-aligned
/// buffer. forward() is unnormalized e^{-i k x}; backward() divides by the
/// number of points, so backward(forward(u)) = u.
class FftPlan {
 public:
  explicit FftPlan(std::vector<int> shape);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  std::size_t size() const noexcept { return size_; }
  const std::vector<int>& shape() const noexcept { return shape_; }
  std::span<std::complex<double>> data() noexcept { return {buffer_, size_}; }
  std::span<const std::complex<double>> data() const noexcept { return {buffer_, size_}; }

  void forward();
  void backward();

 private:
  void release() noexcept;

  std::vector<int> shape_;
  std::size_t size_ = 0;
  std::complex<double>* buffer_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

/// Real values on the periodic grid x_i = -L + i * 2L/n per axis, n a power
/// of two, d in {1, 2}; row-major with the last axis fastest.
struct GridField {
  double half_length = 16.0;
  std::size_t n = 256;
  int dim = 1;
  std::vector<double> values;

  GridField() = default;
  GridField(double L, std::size_t n_points, int d);

  double spacing() const noexcept { return 2.0 * half_length / static_cast<double>(n); }
  double coordinate(std::size_t i) const noexcept {
    return -half_length + static_cast<double>(i) * spacing();
  }
  std::size_t size() const noexcept { return values.size(); }
  double cell_volume() const noexcept;
};

/// Angular wavenumber of FFT index k on a grid of n points over a period 2L.
inline double wavenumber(std::size_t k, std::size_t n, double half_length) noexcept {
  const auto m = static_cast<long long>(k) - (k >= n / 2 ? static_cast<long long>(n) : 0);
  return 3.14159265358979323846 * static_cast<double>(m) / half_length;
}

/// True when |m| <= n/3 on every axis of flat index `flat` (2/3 rule).
bool retained_by_two_thirds(std::size_t flat, std::size_t n, int dim) noexcept;

/// Forward transform of a real field.
std::vector<std::complex<double>> to_spectrum(const GridField& f);
/// Real part of the inverse transform of a spectrum into `like`'s grid.
GridField from_spectrum(std::span<const std::complex<double>> spec, const GridField& like);

}  // namespace mvlab
