#include "rtfbeam/beamformer.hpp"

#include <cmath>
#include <numbers>

namespace rtfbeam::beamformer {

namespace {

CVector unit_vector(std::size_t channels, std::size_t ref) {
  CVector e = CVector::Zero(static_cast<Eigen::Index>(channels));
  e(static_cast<Eigen::Index>(ref)) = 1.0;
  return e;
}

}  // namespace

BeamformerWeights mvdr_weights(const rtf::RtfTrajectory& rtf, const covariance::HermitianMatrixField& phi_nn,
                               double loading) {
  if (phi_nn.bins() != rtf.bins() || phi_nn.channels() != rtf.channels())
    throw ConfigError("beamformer: noise covariance does not match RTF shape");

  const auto phi_inv = covariance::inverse(phi_nn, loading);
  BeamformerWeights out;
  out.w = Tensor3(rtf.channels(), rtf.bins(), rtf.frames());
  out.side = rtf.side;
  out.ref_channel = rtf.ref_channel;

  const CVector passthrough = unit_vector(rtf.channels(), rtf.ref_channel);
  for (std::size_t k = 0; k < rtf.bins(); ++k) {
    bool any = false;
    CVector held = passthrough;
    for (std::size_t l = 0; l < rtf.frames(); ++l) {
      if (rtf.is_valid(k, l)) {
        const CVector a = rtf.at(k, l);
        const CVector u = phi_inv[k] * a;
        const Complex q = u.dot(a);  // u^H a
        if (std::abs(q) > 0.0 && std::isfinite(std::abs(q))) {
          held = u / std::conj(q);
          any = true;
        }
      }
      out.w.set_column(k, l, held);
    }
    if (!any) out.passthrough_bins.push_back(k);
  }
  return out;
}

BeamformerWeights passthrough_weights(std::size_t channels, std::size_t bins, std::size_t frames, std::size_t ref,
                                      Side side) {
  if (ref >= channels) throw ConfigError("beamformer: reference channel out of range");
  BeamformerWeights out;
  out.w = Tensor3(channels, bins, frames);
  out.side = side;
  out.ref_channel = ref;
  for (std::size_t k = 0; k < bins; ++k)
    for (std::size_t l = 0; l < frames; ++l) out.w(ref, k, l) = 1.0;
  return out;
}

stft::ComplexSpectrogram apply(const BeamformerWeights& weights, const stft::ComplexSpectrogram& spec) {
  if (weights.channels() != spec.channels() || weights.bins() != spec.bins() || weights.frames() != spec.frames())
    throw ConfigError("beamformer: weights do not match spectrogram shape");
  stft::ComplexSpectrogram out{Tensor3(1, spec.bins(), spec.frames()), spec.config};
  for (std::size_t k = 0; k < spec.bins(); ++k) {
    for (std::size_t l = 0; l < spec.frames(); ++l) {
      Complex acc{0.0, 0.0};
      for (std::size_t m = 0; m < spec.channels(); ++m) acc += std::conj(weights.w(m, k, l)) * spec.data(m, k, l);
      out.data(0, k, l) = acc;
    }
  }
  return out;
}

CVector steering_vector(const std::vector<double>& positions, double theta_deg, std::size_t k,
                        const stft::StftConfig& config, double speed_of_sound, std::size_t ref) {
  if (positions.empty() || ref >= positions.size()) throw ConfigError("beamformer: invalid array geometry");
  if (!(speed_of_sound > 0.0)) throw ConfigError("beamformer: speed of sound must be positive");
  if (k >= config.num_bins()) throw ConfigError("beamformer: bin index out of range");

  const double sin_theta = std::sin(theta_deg * std::numbers::pi / 180.0);
  const double f = config.bin_frequency(k);
  const double tau_ref = -positions[ref] * sin_theta / speed_of_sound;
  CVector h(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t m = 0; m < positions.size(); ++m) {
    const double tau = -positions[m] * sin_theta / speed_of_sound;
    h(static_cast<Eigen::Index>(m)) = std::polar(1.0, -2.0 * std::numbers::pi * f * (tau - tau_ref));
  }
  h(static_cast<Eigen::Index>(ref)) = 1.0;
  return h;
}

BeamformerWeights delay_and_sum_weights(const std::vector<double>& positions, double theta0_deg,
                                        const stft::StftConfig& config, std::size_t frames, double speed_of_sound) {
  const std::size_t channels = positions.size();
  BeamformerWeights out;
  out.w = Tensor3(channels, config.num_bins(), frames);
  for (std::size_t k = 0; k < config.num_bins(); ++k) {
    const CVector w = steering_vector(positions, theta0_deg, k, config, speed_of_sound) / static_cast<double>(channels);
    for (std::size_t l = 0; l < frames; ++l) out.w.set_column(k, l, w);
  }
  return out;
}

std::vector<double> angle_grid(double step_deg, double lo_deg, double hi_deg) {
  if (!(step_deg > 0.0) || hi_deg < lo_deg) throw ConfigError("beamformer: invalid angle grid");
  const auto count = static_cast<std::size_t>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = lo_deg + static_cast<double>(i) * step_deg;
  return grid;
}

BeampatternGrid narrowband_beampattern(const BeamformerWeights& weights, const std::vector<double>& positions,
                                       const std::vector<double>& angles_deg, const stft::StftConfig& config,
                                       double speed_of_sound) {
  if (positions.size() != weights.channels()) throw ConfigError("beamformer: geometry does not match weights");
  if (weights.bins() != config.num_bins()) throw ConfigError("beamformer: weights do not match STFT config");

  BeampatternGrid grid;
  grid.angles_deg = angles_deg;
  grid.bins = weights.bins();
  grid.frames = weights.frames();
  grid.narrowband.assign(grid.bins * angles_deg.size() * grid.frames, 0.0);
  for (std::size_t k = 0; k < grid.bins; ++k) {
    for (std::size_t a = 0; a < angles_deg.size(); ++a) {
      const CVector h = steering_vector(positions, angles_deg[a], k, config, speed_of_sound);
      for (std::size_t l = 0; l < grid.frames; ++l) {
        Complex b{0.0, 0.0};
        for (std::size_t m = 0; m < weights.channels(); ++m)
          b += std::conj(weights.w(m, k, l)) * h(static_cast<Eigen::Index>(m));
        grid.narrowband[(k * angles_deg.size() + a) * grid.frames + l] = std::abs(b);
      }
    }
  }
  return grid;
}

void wideband_beampower(BeampatternGrid& grid) {
  const std::size_t angles = grid.angles_deg.size();
  grid.wideband.assign(angles * grid.frames, 0.0);
  for (std::size_t k = 0; k < grid.bins; ++k) {
    for (std::size_t a = 0; a < angles; ++a) {
      for (std::size_t l = 0; l < grid.frames; ++l) {
        const double mag = grid.magnitude(k, a, l);
        grid.wideband[a * grid.frames + l] += mag * mag;
      }
    }
  }
}

std::size_t peak_angle_index(const BeampatternGrid& grid, std::size_t l) {
  if (grid.wideband.empty() || l >= grid.frames) throw ConfigError("beamformer: wideband power not available");
  std::size_t best = 0;
  for (std::size_t a = 1; a < grid.angles_deg.size(); ++a)
    if (grid.power(a, l) > grid.power(best, l)) best = a;
  return best;
}

}  // namespace rtfbeam::beamformer
