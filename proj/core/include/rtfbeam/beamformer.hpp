#pragma once

#include <cstddef>
#include <vector>

#include "rtfbeam/common.hpp"
#include "rtfbeam/covariance.hpp"
#include "rtfbeam/rtf.hpp"
#include "rtfbeam/stft.hpp"

namespace rtfbeam::beamformer {

inline constexpr double kSpeedOfSound = 343.0;

// Filter-and-sum weights w(l,k); the output is w^H y.
struct BeamformerWeights {
  Tensor3 w;  // (m, k, l)
  Side side = Side::left;
  std::size_t ref_channel = 0;
  // Bins where no frame had a usable RTF; these pass the reference through.
  std::vector<std::size_t> passthrough_bins;

  std::size_t channels() const { return w.dim0(); }
  std::size_t bins() const { return w.dim1(); }
  std::size_t frames() const { return w.dim2(); }
  CVector at(std::size_t k, std::size_t l) const { return w.column(k, l); }
};

// w = Phi^-1 a / (a^H Phi^-1 a) per (k, l) with loaded Phi. Invalid RTF cells
// reuse the previous frame's weights.
BeamformerWeights mvdr_weights(const rtf::RtfTrajectory& rtf, const covariance::HermitianMatrixField& phi_nn,
                               double loading = covariance::kDefaultLoading);

// w = e_ref everywhere.
BeamformerWeights passthrough_weights(std::size_t channels, std::size_t bins, std::size_t frames, std::size_t ref,
                                      Side side);

// s_hat(l,k) = w^H(l,k) y(l,k).
stft::ComplexSpectrogram apply(const BeamformerWeights& weights, const stft::ComplexSpectrogram& spec);

// Far-field plane-wave response of a linear array with element coordinates
// `positions` (metres along the array axis). theta is measured from broadside,
// positive toward the +axis end: tau_m = -x_m sin(theta) / c and
// h_m = exp(-j 2 pi f_k (tau_m - tau_ref)).
CVector steering_vector(const std::vector<double>& positions, double theta_deg, std::size_t k,
                        const stft::StftConfig& config, double speed_of_sound = kSpeedOfSound, std::size_t ref = 0);

// Delay-and-sum toward theta0: w = h(theta0) / M, constant over frames.
BeamformerWeights delay_and_sum_weights(const std::vector<double>& positions, double theta0_deg,
                                        const stft::StftConfig& config, std::size_t frames,
                                        double speed_of_sound = kSpeedOfSound);

std::vector<double> angle_grid(double step_deg, double lo_deg = -90.0, double hi_deg = 90.0);

struct BeampatternGrid {
  std::vector<double> angles_deg;
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<double> narrowband;  // |B(k, theta, l)|, (k, theta, l) row-major
  std::vector<double> wideband;    // P(theta, l), (theta, l) row-major

  double magnitude(std::size_t k, std::size_t a, std::size_t l) const {
    return narrowband[(k * angles_deg.size() + a) * frames + l];
  }
  double power(std::size_t a, std::size_t l) const { return wideband[a * frames + l]; }
};

// |w^H(k,l) h(k,theta)| on the angle grid. Leaves `wideband` empty.
BeampatternGrid narrowband_beampattern(const BeamformerWeights& weights, const std::vector<double>& positions,
                                       const std::vector<double>& angles_deg, const stft::StftConfig& config,
                                       double speed_of_sound = kSpeedOfSound);

// P(theta, l) = sum_k |B(k, theta, l)|^2 from the stored magnitudes.
void wideband_beampower(BeampatternGrid& grid);

// Index of the largest P(theta, l) for frame l.
std::size_t peak_angle_index(const BeampatternGrid& grid, std::size_t l);

}  // namespace rtfbeam::beamformer
