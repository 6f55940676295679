#include "platt/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "platt/common.h"

namespace platt {
namespace {

std::mutex& PlannerMutex() {
  static std::mutex mutex;
  return mutex;
}

}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size < 2) throw NumericalError("FFT size must be at least 2");
  std::lock_guard<std::mutex> lock(PlannerMutex());
  real_ = fftw_alloc_real(size_);
  fftw_complex* spectrum = fftw_alloc_complex(bins());
  complex_ = spectrum;
  forward_ = fftw_plan_dft_r2c_1d(size_, real_, spectrum, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(size_, spectrum, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  fftw_free(real_);
  fftw_free(complex_);
}

void RealFft::Forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy_n(in.begin(), size_, real_);
  fftw_execute(static_cast<fftw_plan>(forward_));
  const auto* spectrum = reinterpret_cast<const std::complex<double>*>(complex_);
  std::copy_n(spectrum, bins(), out.begin());
}

void RealFft::Inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  auto* spectrum = reinterpret_cast<std::complex<double>*>(complex_);
  std::copy_n(in.begin(), bins(), spectrum);
  fftw_execute(static_cast<fftw_plan>(inverse_));
  std::copy_n(real_, size_, out.begin());
}

}  // namespace platt
