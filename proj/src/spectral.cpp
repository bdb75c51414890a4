#include "mvlab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace mvlab {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

FftPlan::FftPlan(std::vector<int> shape) : shape_(std::move(shape)) {
  if (shape_.empty() || shape_.size() > 3) throw std::invalid_argument("fft: rank must be 1..3");
  size_ = 1;
  for (int s : shape_) {
    if (s < 1) throw std::invalid_argument("fft: extents must be positive");
    size_ *= static_cast<std::size_t>(s);
  }
  std::lock_guard lock(planner_mutex());
  buffer_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * size_));
  if (!buffer_) throw std::bad_alloc();
  auto* raw = reinterpret_cast<fftw_complex*>(buffer_);
  const int rank = static_cast<int>(shape_.size());
  plan_fwd_ = fftw_plan_dft(rank, shape_.data(), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft(rank, shape_.data(), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
  std::memset(static_cast<void*>(buffer_), 0, sizeof(fftw_complex) * size_);
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& other) noexcept
    : shape_(std::move(other.shape_)),
      size_(other.size_),
      buffer_(other.buffer_),
      plan_fwd_(other.plan_fwd_),
      plan_bwd_(other.plan_bwd_) {
  other.buffer_ = nullptr;
  other.plan_fwd_ = other.plan_bwd_ = nullptr;
  other.size_ = 0;
}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    release();
    shape_ = std::move(other.shape_);
    size_ = other.size_;
    buffer_ = other.buffer_;
    plan_fwd_ = other.plan_fwd_;
    plan_bwd_ = other.plan_bwd_;
    other.buffer_ = nullptr;
    other.plan_fwd_ = other.plan_bwd_ = nullptr;
    other.size_ = 0;
  }
  return *this;
}

void FftPlan::release() noexcept {
  if (!buffer_) return;
  std::lock_guard lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(buffer_);
  buffer_ = nullptr;
  plan_fwd_ = plan_bwd_ = nullptr;
}

void FftPlan::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }

void FftPlan::backward() {
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto& v : data()) v *= scale;
}

GridField::GridField(double L, std::size_t n_points, int d) : half_length(L), n(n_points), dim(d) {
  if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid half-length must be > 0");
  if (!is_power_of_two(n_points)) throw std::invalid_argument("grid size n must be a power of two");
  if (d != 1 && d != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  values.assign(d == 1 ? n : n * n, 0.0);
}

double GridField::cell_volume() const noexcept {
  const double h = spacing();
  return dim == 1 ? h : h * h;
}

bool retained_by_two_thirds(std::size_t flat, std::size_t n, int dim) noexcept {
  auto keep = [n](std::size_t k) {
    const auto m = static_cast<long long>(k) - (k >= n / 2 ? static_cast<long long>(n) : 0);
    return 3 * std::llabs(m) <= static_cast<long long>(n);
  };
  if (dim == 1) return keep(flat);
  return keep(flat / n) && keep(flat % n);
}

std::vector<std::complex<double>> to_spectrum(const GridField& f) {
  std::vector<int> shape(static_cast<std::size_t>(f.dim), static_cast<int>(f.n));
  FftPlan plan(shape);
  auto buf = plan.data();
  for (std::size_t i = 0; i < f.size(); ++i) buf[i] = f.values[i];
  plan.forward();
  return {buf.begin(), buf.end()};
}

GridField from_spectrum(std::span<const std::complex<double>> spec, const GridField& like) {
  if (spec.size() != like.size()) throw std::invalid_argument("spectrum size mismatch");
  std::vector<int> shape(static_cast<std::size_t>(like.dim), static_cast<int>(like.n));
  FftPlan plan(shape);
  auto buf = plan.data();
  std::copy(spec.begin(), spec.end(), buf.begin());
  plan.backward();
  GridField out(like.half_length, like.n, like.dim);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = buf[i].real();
  return out;
}

}  // namespace mvlab
