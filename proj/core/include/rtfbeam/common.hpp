#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rtfbeam {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Bad arguments, shapes or ranges. The CLI maps these to its config-error exit code.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input was well-formed but the numerics cannot proceed (singular covariance,
// non-finite data, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Side { left, right };

inline const char* to_string(Side side) { return side == Side::left ? "left" : "right"; }

// Reference microphone for a binaural side: left-most is channel 0, right-most
// is channel M-1.
inline std::size_t reference_channel(Side side, std::size_t num_channels) {
  return side == Side::left ? 0 : num_channels - 1;
}

// Dense complex tensor with row-major (d0, d1, d2) layout. Used for
// spectrograms (m, k, l), RTF trajectories and beamformer weights.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(std::size_t d0, std::size_t d1, std::size_t d2)
      : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, Complex{0.0, 0.0}) {}

  std::size_t dim0() const { return d0_; }
  std::size_t dim1() const { return d1_; }
  std::size_t dim2() const { return d2_; }
  std::size_t size() const { return data_.size(); }

  Complex& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * d1_ + j) * d2_ + k];
  }
  const Complex& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * d1_ + j) * d2_ + k];
  }

  // Gathers the d0-vector at (j, k), e.g. y(l, k) across channels.
  CVector column(std::size_t j, std::size_t k) const {
    CVector v(static_cast<Eigen::Index>(d0_));
    for (std::size_t i = 0; i < d0_; ++i) v(static_cast<Eigen::Index>(i)) = (*this)(i, j, k);
    return v;
  }
  void set_column(std::size_t j, std::size_t k, const CVector& v) {
    for (std::size_t i = 0; i < d0_; ++i) (*this)(i, j, k) = v(static_cast<Eigen::Index>(i));
  }

  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }

  bool same_shape(const Tensor3& other) const {
    return d0_ == other.d0_ && d1_ == other.d1_ && d2_ == other.d2_;
  }

 private:
  std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<Complex> data_;
};

// Multichannel real signal, one vector per channel.
using Signal = std::vector<std::vector<double>>;

}  // namespace rtfbeam
