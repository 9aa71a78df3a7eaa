#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "rtfbeam/common.hpp"

namespace rtfbeam::stft {

enum class WindowType { hann, sqrt_hann };

std::string to_string(WindowType type);
WindowType window_from_string(const std::string& name);

struct StftConfig {
  unsigned sample_rate_hz = 16000;
  std::size_t window_len = 512;
  std::size_t hop = 256;
  WindowType window = WindowType::sqrt_hann;

  std::size_t num_bins() const { return window_len / 2 + 1; }
  double bin_frequency(std::size_t k) const {
    return static_cast<double>(k) * sample_rate_hz / static_cast<double>(window_len);
  }
  // Frame l covers samples [l*hop, l*hop + window_len).
  double frame_center_seconds(std::size_t l) const {
    return (static_cast<double>(l * hop) + 0.5 * static_cast<double>(window_len)) / sample_rate_hz;
  }
  std::size_t num_frames(std::size_t num_samples) const {
    return num_samples < window_len ? 0 : 1 + (num_samples - window_len) / hop;
  }

  bool operator==(const StftConfig&) const = default;
};

// Periodic analysis window. hann pairs with a rectangular synthesis window,
// sqrt_hann uses the same window on both sides.
std::vector<double> analysis_window(const StftConfig& config);
std::vector<double> synthesis_window(const StftConfig& config);

// Maximum relative deviation from flatness of sum_l wa[n - l*hop] * ws[n - l*hop].
double cola_deviation(const StftConfig& config);

// Throws ConfigError when the config violates its invariants (including COLA).
void validate(const StftConfig& config);

struct ComplexSpectrogram {
  Tensor3 data;  // (m, k, l)
  StftConfig config;

  std::size_t channels() const { return data.dim0(); }
  std::size_t bins() const { return data.dim1(); }
  std::size_t frames() const { return data.dim2(); }
};

ComplexSpectrogram analyze(const Signal& signal, const StftConfig& config);

// Overlap-add resynthesis of a single-channel spectrogram. Output length is
// (L - 1) * hop + window_len.
std::vector<double> synthesize(const ComplexSpectrogram& spec);
std::vector<double> synthesize(const ComplexSpectrogram& spec, const StftConfig& expected);

// Picks channel m of a multichannel spectrogram as a single-channel one.
ComplexSpectrogram select_channel(const ComplexSpectrogram& spec, std::size_t m);

}  // namespace rtfbeam::stft
