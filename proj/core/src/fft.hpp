#pragma once

#include <cstddef>

#include <fftw3.h>

#include "rtfbeam/common.hpp"

namespace rtfbeam::detail {

// Real-to-complex FFT of fixed length on plan-owned buffers. Plans are built
// with FFTW_ESTIMATE so repeated runs produce identical output.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  double* time() { return time_; }
  Complex bin(std::size_t k) const { return {freq_[k][0], freq_[k][1]}; }
  void set_bin(std::size_t k, Complex v) {
    freq_[k][0] = v.real();
    freq_[k][1] = v.imag();
  }
  void forward();
  // Unnormalized: forward followed by inverse scales by n.
  void inverse();

 private:
  std::size_t n_;
  double* time_ = nullptr;
  fftw_complex* freq_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace rtfbeam::detail
