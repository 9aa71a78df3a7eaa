#include "fft.hpp"

#include <mutex>

namespace rtfbeam::detail {

namespace {

// The FFTW planner is not thread-safe; executing an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  time_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  freq_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
  std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(n);
  forward_ = fftw_plan_dft_r2c_1d(len, time_, freq_, FFTW_ESTIMATE);
  inverse_ = fftw_plan_dft_c2r_1d(len, freq_, time_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(inverse_);
  fftw_free(time_);
  fftw_free(freq_);
}

void RealFft::forward() { fftw_execute(forward_); }

void RealFft::inverse() { fftw_execute(inverse_); }

}  // namespace rtfbeam::detail
