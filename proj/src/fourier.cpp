#include "lrsim/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace lrsim::fourier {

namespace {

// fftw_plan_* is not thread-safe; fftw_execute on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

struct Plan {
  explicit Plan(fftw_plan p) : plan(p) {
    if (!plan) throw std::runtime_error("FFTW planning failed");
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  fftw_plan plan;
};

}  // namespace

std::vector<std::complex<double>> real_dft(std::span<const double> x) {
  const auto n = x.size();
  if (n == 0) throw std::invalid_argument("real_dft: empty input");
  const auto bins = n / 2 + 1;
  FftwBuffer in(sizeof(double) * n);
  FftwBuffer out(sizeof(fftw_complex) * bins);
  auto* in_d = static_cast<double*>(in.ptr);
  auto* out_c = static_cast<fftw_complex*>(out.ptr);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(fftw_plan_dft_r2c_1d(static_cast<int>(n), in_d, out_c, FFTW_ESTIMATE));
  }
  std::copy(x.begin(), x.end(), in_d);
  fftw_execute(plan->plan);
  std::vector<std::complex<double>> result(bins);
  for (std::size_t j = 0; j < bins; ++j) result[j] = {out_c[j][0], out_c[j][1]};
  return result;
}

std::vector<double> inverse_real_dft(std::span<const std::complex<double>> spectrum, std::size_t n) {
  if (spectrum.size() != n / 2 + 1) throw std::invalid_argument("inverse_real_dft: spectrum length mismatch");
  FftwBuffer in(sizeof(fftw_complex) * spectrum.size());
  FftwBuffer out(sizeof(double) * n);
  auto* in_c = static_cast<fftw_complex*>(in.ptr);
  auto* out_d = static_cast<double*>(out.ptr);
  std::unique_ptr<Plan> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = std::make_unique<Plan>(fftw_plan_dft_c2r_1d(static_cast<int>(n), in_c, out_d, FFTW_ESTIMATE));
  }
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    in_c[j][0] = spectrum[j].real();
    in_c[j][1] = spectrum[j].imag();
  }
  fftw_execute(plan->plan);
  std::vector<double> result(out_d, out_d + n);
  for (auto& v : result) v /= static_cast<double>(n);
  return result;
}

}  // namespace lrsim::fourier
