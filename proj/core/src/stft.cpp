#include "rtfbeam/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace rtfbeam::stft {

namespace {

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

// Sum of shifted analysis*synthesis products over one hop period.
std::vector<double> overlap_sum(const StftConfig& config) {
  const auto wa = analysis_window(config);
  const auto ws = synthesis_window(config);
  std::vector<double> sum(config.hop, 0.0);
  for (std::size_t n = 0; n < config.window_len; ++n) sum[n % config.hop] += wa[n] * ws[n];
  return sum;
}

}  // namespace

std::string to_string(WindowType type) { return type == WindowType::hann ? "hann" : "sqrt_hann"; }

WindowType window_from_string(const std::string& name) {
  if (name == "hann") return WindowType::hann;
  if (name == "sqrt_hann") return WindowType::sqrt_hann;
  throw ConfigError("unknown window type '" + name + "'");
}

std::vector<double> analysis_window(const StftConfig& config) {
  auto w = periodic_hann(config.window_len);
  if (config.window == WindowType::sqrt_hann)
    for (auto& v : w) v = std::sqrt(v);
  return w;
}

std::vector<double> synthesis_window(const StftConfig& config) {
  if (config.window == WindowType::hann) return std::vector<double>(config.window_len, 1.0);
  return analysis_window(config);
}

double cola_deviation(const StftConfig& config) {
  const auto sum = overlap_sum(config);
  const auto [lo, hi] = std::minmax_element(sum.begin(), sum.end());
  if (*hi <= 0.0) return 1.0;
  return (*hi - *lo) / *hi;
}

void validate(const StftConfig& config) {
  if (config.sample_rate_hz == 0) throw ConfigError("stft: sample rate must be positive");
  if (config.window_len == 0 || config.window_len % 2 != 0)
    throw ConfigError("stft: window length must be positive and even");
  if (config.hop == 0 || config.hop > config.window_len)
    throw ConfigError("stft: hop must be in [1, window_len]");
  if (cola_deviation(config) > 1e-10)
    throw ConfigError("stft: window/hop pair does not satisfy constant overlap-add");
}

ComplexSpectrogram analyze(const Signal& signal, const StftConfig& config) {
  validate(config);
  if (signal.empty()) throw ConfigError("stft: no channels");
  const std::size_t n = signal.front().size();
  for (const auto& ch : signal) {
    if (ch.size() != n) throw ConfigError("stft: channel length mismatch");
    for (double v : ch)
      if (!std::isfinite(v)) throw ConfigError("stft: non-finite sample");
  }
  if (n < config.window_len) throw ConfigError("stft: signal shorter than one window");

  const std::size_t frames = config.num_frames(n);
  const std::size_t bins = config.num_bins();
  const auto window = analysis_window(config);

  ComplexSpectrogram out{Tensor3(signal.size(), bins, frames), config};
  detail::RealFft fft(config.window_len);
  for (std::size_t m = 0; m < signal.size(); ++m) {
    for (std::size_t l = 0; l < frames; ++l) {
      const double* src = signal[m].data() + l * config.hop;
      for (std::size_t i = 0; i < config.window_len; ++i) fft.time()[i] = src[i] * window[i];
      fft.forward();
      for (std::size_t k = 0; k < bins; ++k) out.data(m, k, l) = fft.bin(k);
    }
  }
  return out;
}

std::vector<double> synthesize(const ComplexSpectrogram& spec, const StftConfig& expected) {
  if (!(spec.config == expected)) throw ConfigError("stft: spectrogram config mismatch");
  return synthesize(spec);
}

std::vector<double> synthesize(const ComplexSpectrogram& spec) {
  const auto& config = spec.config;
  validate(config);
  if (spec.channels() != 1) throw ConfigError("stft: synthesize expects a single channel");
  if (spec.bins() != config.num_bins()) throw ConfigError("stft: bin count does not match config");
  const std::size_t frames = spec.frames();
  if (frames == 0) return {};

  const auto window = synthesis_window(config);
  // Flat by COLA; dividing by it makes analysis followed by synthesis the identity.
  const double gain = overlap_sum(config).front();
  const double scale = 1.0 / (static_cast<double>(config.window_len) * gain);

  std::vector<double> out((frames - 1) * config.hop + config.window_len, 0.0);
  detail::RealFft fft(config.window_len);
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t k = 0; k < spec.bins(); ++k) {
      Complex v = spec.data(0, k, l);
      // DC and Nyquist of a real signal carry no imaginary part.
      if (k == 0 || k == spec.bins() - 1) v = {v.real(), 0.0};
      fft.set_bin(k, v);
    }
    fft.inverse();
    double* dst = out.data() + l * config.hop;
    for (std::size_t i = 0; i < config.window_len; ++i) dst[i] += fft.time()[i] * window[i] * scale;
  }
  return out;
}

ComplexSpectrogram select_channel(const ComplexSpectrogram& spec, std::size_t m) {
  if (m >= spec.channels()) throw ConfigError("stft: channel index out of range");
  ComplexSpectrogram out{Tensor3(1, spec.bins(), spec.frames()), spec.config};
  for (std::size_t k = 0; k < spec.bins(); ++k)
    for (std::size_t l = 0; l < spec.frames(); ++l) out.data(0, k, l) = spec.data(m, k, l);
  return out;
}

}  // namespace rtfbeam::stft
