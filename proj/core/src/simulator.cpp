#include "rtfbeam/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

#include "fft.hpp"
#include "random.hpp"

namespace rtfbeam::sim {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr int kHalfTaps = 16;  // 32-tap kernel: offsets -15 .. +16
constexpr double kWallInset = 0.3;
constexpr double kCenterJitter = 0.25;
constexpr double kArcLimitDeg = 80.0;
constexpr double kModulationHz = 4.0;
constexpr double kModulationDepth = 0.5;
constexpr double kPinkFloorHz = 50.0;

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }

Vec3 lerp(const Vec3& a, const Vec3& b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)};
}

// Blackman-windowed sinc fractional-delay taps for reading the source at
// i0 + frac; taps[j + 15] multiplies source[i0 + j].
class SincKernel {
 public:
  SincKernel() {
    for (int j = -kHalfTaps + 1; j <= kHalfTaps; ++j) {
      const double b = std::numbers::pi * j / kHalfTaps;
      cos_b_[static_cast<std::size_t>(j + kHalfTaps - 1)] = std::cos(b);
      sin_b_[static_cast<std::size_t>(j + kHalfTaps - 1)] = std::sin(b);
    }
  }

  void taps(double frac, std::array<double, 2 * kHalfTaps>& out) const {
    const double sin_pf = std::sin(std::numbers::pi * frac);
    const double a = std::numbers::pi * frac / kHalfTaps;
    const double cos_a = std::cos(a), sin_a = std::sin(a);
    for (int j = -kHalfTaps + 1; j <= kHalfTaps; ++j) {
      const auto idx = static_cast<std::size_t>(j + kHalfTaps - 1);
      const double u = frac - j;
      double sinc;
      if (u == 0.0) {
        sinc = 1.0;
      } else {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;  // sin(pi (frac - j)) = (-1)^j sin(pi frac)
        sinc = sign * sin_pf / (std::numbers::pi * u);
      }
      const double c1 = cos_a * cos_b_[idx] + sin_a * sin_b_[idx];  // cos(pi u / 16)
      const double window = 0.42 + 0.5 * c1 + 0.08 * (2.0 * c1 * c1 - 1.0);
      out[idx] = sinc * window;
    }
  }

 private:
  std::array<double, 2 * kHalfTaps> cos_b_{};
  std::array<double, 2 * kHalfTaps> sin_b_{};
};

double read_delayed(const std::vector<double>& source, double position, const SincKernel& kernel,
                    std::array<double, 2 * kHalfTaps>& taps) {
  const double floor_pos = std::floor(position);
  const auto i0 = static_cast<long long>(floor_pos);
  kernel.taps(position - floor_pos, taps);
  const auto n = static_cast<long long>(source.size());
  double acc = 0.0;
  for (int j = -kHalfTaps + 1; j <= kHalfTaps; ++j) {
    const long long i = i0 + j;
    if (i < 0 || i >= n) continue;
    acc += taps[static_cast<std::size_t>(j + kHalfTaps - 1)] * source[static_cast<std::size_t>(i)];
  }
  return acc;
}

Vec3 babbler_position(const Room& room, double perimeter_pos, double height) {
  const double w = room.width - 2.0 * kWallInset;
  const double l = room.length - 2.0 * kWallInset;
  double t = perimeter_pos;
  if (t < w) return {kWallInset + t, kWallInset, height};
  t -= w;
  if (t < l) return {room.width - kWallInset, kWallInset + t, height};
  t -= l;
  if (t < w) return {room.width - kWallInset - t, room.length - kWallInset, height};
  t -= w;
  return {kWallInset, room.length - kWallInset - std::min(t, l), height};
}

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

bool Room::contains(const Vec3& p) const {
  return p.x > 0.0 && p.x < width && p.y > 0.0 && p.y < length && p.z > 0.0 && p.z < height;
}

Vec3 ArrayGeometry::axis() const {
  const double phi = rotation_deg * kDegToRad;
  return {std::cos(phi), std::sin(phi), 0.0};
}

Vec3 ArrayGeometry::broadside() const {
  const double phi = rotation_deg * kDegToRad;
  return {-std::sin(phi), std::cos(phi), 0.0};
}

std::vector<double> ArrayGeometry::axis_positions() const {
  std::vector<double> x(num_mics);
  for (std::size_t m = 0; m < num_mics; ++m)
    x[m] = (static_cast<double>(m) - 0.5 * static_cast<double>(num_mics - 1)) * spacing_m;
  return x;
}

std::vector<Vec3> ArrayGeometry::mic_positions() const {
  std::vector<Vec3> mics;
  const Vec3 ax = axis();
  for (double x : axis_positions()) mics.push_back(center + x * ax);
  return mics;
}

std::size_t Scenario::num_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

std::size_t Scenario::silence_samples() const {
  return static_cast<std::size_t>(std::llround(silence_s * sample_rate_hz));
}

double Scenario::doa_at(double t) const {
  const double span = duration_s - silence_s;
  const double progress = span > 0.0 ? std::clamp((t - silence_s) / span, 0.0, 1.0) : 0.0;
  return source.start_deg + source.displacement_deg * progress;
}

Vec3 Scenario::source_position_at(double t) const {
  const double theta = doa_at(t) * kDegToRad;
  return array.center + source.radius_m * (std::sin(theta) * array.axis() + std::cos(theta) * array.broadside());
}

Scenario sample_scenario(std::uint64_t seed, const ScenarioOptions& options) {
  detail::Rng rng(detail::derive_seed(seed, 0x5CE7A210ULL));
  Scenario s;
  s.seed = seed;
  s.room.width = rng.uniform(6.0, 9.0);
  s.room.length = rng.uniform(6.0, 9.0);
  s.room.height = 3.0;
  s.array.center = {0.5 * s.room.width + rng.uniform(-kCenterJitter, kCenterJitter),
                    0.5 * s.room.length + rng.uniform(-kCenterJitter, kCenterJitter), 1.3};
  s.array.rotation_deg = rng.uniform(-45.0, 45.0);
  s.array.num_mics = 8;
  s.array.spacing_m = 0.05;
  s.source.radius_m = rng.uniform(1.0, 1.5);
  s.sensor_noise_db = options.sensor_noise_db;
  if (options.moving) {
    const double magnitude = rng.uniform(45.0, 150.0);
    const bool positive = rng.uniform01() < 0.5;
    // Keep the whole arc on the broadside half-plane so the DOA stays monotone.
    const double lo = positive ? -kArcLimitDeg : -kArcLimitDeg + magnitude;
    const double hi = positive ? kArcLimitDeg - magnitude : kArcLimitDeg;
    s.source.start_deg = rng.uniform(lo, hi);
    s.source.displacement_deg = positive ? magnitude : -magnitude;
  } else {
    s.source.start_deg = rng.uniform(-60.0, 60.0);
    s.source.displacement_deg = 0.0;
  }
  const double perimeter = 2.0 * (s.room.width + s.room.length - 4.0 * kWallInset);
  for (std::size_t i = 0; i < options.num_babblers; ++i) {
    const double pos = rng.uniform(0.0, perimeter);
    const double height = rng.uniform(1.2, 1.9);
    s.babblers.push_back(babbler_position(s.room, pos, height));
  }
  validate(s);
  return s;
}

void validate(const Scenario& scenario) {
  if (scenario.sample_rate_hz == 0 || !(scenario.duration_s > scenario.silence_s) || scenario.silence_s < 0.0)
    throw ConfigError("sim: invalid timing");
  if (scenario.array.num_mics < 2) throw ConfigError("sim: array needs at least two mics");
  for (const auto& mic : scenario.array.mic_positions())
    if (!scenario.room.contains(mic)) throw ConfigError("sim: array does not fit in the room");
  constexpr int kChecks = 64;
  for (int i = 0; i <= kChecks; ++i) {
    const double t = scenario.duration_s * i / kChecks;
    if (!scenario.room.contains(scenario.source_position_at(t)))
      throw ConfigError(fmt::format("sim: source trajectory leaves the room at t = {:.3f} s", t));
  }
  for (const auto& b : scenario.babblers)
    if (!scenario.room.contains(b)) throw ConfigError("sim: babbler outside the room");
}

Signal render_point_source(const std::vector<double>& source, const std::vector<Vec3>& path, std::size_t hop,
                           const std::vector<Vec3>& mics, unsigned sample_rate_hz, double speed_of_sound) {
  if (path.empty() || hop == 0) throw ConfigError("sim: empty source path");
  const std::size_t n = source.size();
  const double fs = sample_rate_hz;
  const SincKernel kernel;
  std::array<double, 2 * kHalfTaps> taps{};

  const bool is_static = std::all_of(path.begin(), path.end(), [&](const Vec3& p) {
    return p.x == path.front().x && p.y == path.front().y && p.z == path.front().z;
  });

  Signal out(mics.size(), std::vector<double>(n, 0.0));
  for (std::size_t m = 0; m < mics.size(); ++m) {
    auto& y = out[m];
    if (is_static) {
      const double d = distance(path.front(), mics[m]);
      const double delay = d / speed_of_sound * fs;
      // n - delay = (n - ceil(delay)) + frac, the same kernel for every sample.
      const double frac = std::ceil(delay) - delay;
      const auto shift = static_cast<long long>(std::ceil(delay));
      kernel.taps(frac, taps);
      for (std::size_t i = 0; i < n; ++i) {
        const long long i0 = static_cast<long long>(i) - shift;
        double acc = 0.0;
        for (int j = -kHalfTaps + 1; j <= kHalfTaps; ++j) {
          const long long src = i0 + j;
          if (src < 0 || src >= static_cast<long long>(n)) continue;
          acc += taps[static_cast<std::size_t>(j + kHalfTaps - 1)] * source[static_cast<std::size_t>(src)];
        }
        y[i] = acc / d;
      }
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t seg = i / hop;
      const double t = static_cast<double>(i % hop) / static_cast<double>(hop);
      const Vec3& a = path[std::min(seg, path.size() - 1)];
      const Vec3& b = path[std::min(seg + 1, path.size() - 1)];
      const double d = distance(lerp(a, b, t), mics[m]);
      const double read_pos = static_cast<double>(i) - d / speed_of_sound * fs;
      y[i] = read_delayed(source, read_pos, kernel, taps) / d;
    }
  }
  return out;
}

CVector free_field_rtf(const Vec3& source, const std::vector<Vec3>& mics, double f_hz, std::size_t ref,
                       double speed_of_sound) {
  if (ref >= mics.size()) throw ConfigError("sim: reference mic out of range");
  const double d_ref = distance(source, mics[ref]);
  CVector a(static_cast<Eigen::Index>(mics.size()));
  for (std::size_t m = 0; m < mics.size(); ++m) {
    const double d = distance(source, mics[m]);
    const double dtau = (d - d_ref) / speed_of_sound;
    a(static_cast<Eigen::Index>(m)) = std::polar(d_ref / d, -2.0 * std::numbers::pi * f_hz * dtau);
  }
  a(static_cast<Eigen::Index>(ref)) = 1.0;
  return a;
}

std::size_t noise_only_frames(const Scenario& scenario, const stft::StftConfig& config) {
  return config.num_frames(scenario.silence_samples());
}

RenderedSource render_moving_source(const std::vector<double>& source, const Scenario& scenario,
                                    const stft::StftConfig& config) {
  validate(scenario);
  stft::validate(config);
  if (config.sample_rate_hz != scenario.sample_rate_hz) throw ConfigError("sim: STFT rate differs from scenario rate");
  const std::size_t n = scenario.num_samples();
  if (source.size() != n)
    throw ConfigError(fmt::format("sim: source has {} samples, scenario needs {}", source.size(), n));

  std::vector<double> muted = source;
  std::fill(muted.begin(), muted.begin() + static_cast<std::ptrdiff_t>(scenario.silence_samples()), 0.0);

  const double fs = scenario.sample_rate_hz;
  std::vector<Vec3> path;
  for (std::size_t i = 0; i <= n / config.hop + 1; ++i)
    path.push_back(scenario.source_position_at(static_cast<double>(i * config.hop) / fs));

  const auto mics = scenario.array.mic_positions();
  RenderedSource out;
  out.clean = render_point_source(muted, path, config.hop, mics, scenario.sample_rate_hz, scenario.speed_of_sound);

  auto& truth = out.truth;
  const std::size_t frames = config.num_frames(n);
  const std::size_t bins = config.num_bins();
  const std::size_t right = mics.size() - 1;
  truth.noise_frames = noise_only_frames(scenario, config);
  truth.rtf_left = rtf::RtfTrajectory(mics.size(), bins, frames, 0, Side::left);
  truth.rtf_right = rtf::RtfTrajectory(mics.size(), bins, frames, right, Side::right);
  for (std::size_t l = 0; l < frames; ++l) {
    const double t = config.frame_center_seconds(l);
    truth.doa_per_frame.push_back(scenario.doa_at(t));
    truth.speech_active.push_back(t >= scenario.silence_s ? 1 : 0);
    const Vec3 pos = scenario.source_position_at(t);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = config.bin_frequency(k);
      truth.rtf_left.values.set_column(k, l, free_field_rtf(pos, mics, f, 0, scenario.speed_of_sound));
      truth.rtf_right.values.set_column(k, l, free_field_rtf(pos, mics, f, right, scenario.speed_of_sound));
      truth.rtf_left.set_valid(k, l, f <= scenario.band_limit_hz);
      truth.rtf_right.set_valid(k, l, f <= scenario.band_limit_hz);
    }
  }
  truth.clean_ref_left = out.clean.front();
  truth.clean_ref_right = out.clean.back();
  return out;
}

Signal render_babble(const Scenario& scenario, const std::vector<std::vector<double>>& babbler_signals) {
  if (babbler_signals.size() != scenario.babblers.size())
    throw ConfigError(fmt::format("sim: {} babbler signals for {} babbler positions", babbler_signals.size(),
                                  scenario.babblers.size()));
  const std::size_t n = scenario.num_samples();
  const auto mics = scenario.array.mic_positions();
  Signal noise(mics.size(), std::vector<double>(n, 0.0));
  for (std::size_t b = 0; b < babbler_signals.size(); ++b) {
    if (babbler_signals[b].size() != n) throw ConfigError("sim: babbler signal length mismatch");
    const auto rendered = render_point_source(babbler_signals[b], {scenario.babblers[b]}, n, mics,
                                              scenario.sample_rate_hz, scenario.speed_of_sound);
    for (std::size_t m = 0; m < mics.size(); ++m)
      for (std::size_t i = 0; i < n; ++i) noise[m][i] += rendered[m][i];
  }
  return noise;
}

Mixture mix_at_snr(const Signal& clean, const Signal& noise, double snr_db, std::size_t ref) {
  if (clean.size() != noise.size() || clean.empty()) throw ConfigError("sim: clean and noise channel counts differ");
  for (std::size_t m = 0; m < clean.size(); ++m)
    if (clean[m].size() != noise[m].size()) throw ConfigError("sim: clean and noise lengths differ");
  if (ref >= clean.size()) throw ConfigError("sim: reference channel out of range");

  const auto power = [](const std::vector<double>& x) {
    double sum = 0.0;
    for (double v : x) sum += v * v;
    return sum / static_cast<double>(x.size());
  };
  const double p_clean = power(clean[ref]);
  const double p_noise = power(noise[ref]);
  if (p_clean <= 0.0) throw ConfigError("sim: clean signal has zero power at the reference channel");
  if (p_noise <= 0.0) throw ConfigError("sim: noise has zero power at the reference channel");

  Mixture out;
  out.noise_gain = snr_db >= kSnrCapDb ? 0.0 : std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  out.noise = noise;
  out.mixture = clean;
  for (std::size_t m = 0; m < clean.size(); ++m) {
    for (std::size_t i = 0; i < clean[m].size(); ++i) {
      out.noise[m][i] *= out.noise_gain;
      out.mixture[m][i] += out.noise[m][i];
    }
  }
  return out;
}

std::vector<std::vector<double>> synthesize_babbler_signals(std::uint64_t seed, std::size_t count, double duration_s,
                                                            unsigned sample_rate_hz, double band_limit_hz) {
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
  if (n < 2) throw ConfigError("sim: babbler duration too short");
  std::vector<std::vector<double>> out;
  out.reserve(count);
  detail::RealFft fft(n);
  for (std::size_t c = 0; c < count; ++c) {
    detail::Rng rng(detail::derive_seed(seed, 0xBABB1E00ULL + c));
    for (std::size_t i = 0; i < n; ++i) fft.time()[i] = rng.gaussian();
    fft.forward();
    // 1/f power above the floor, flat below it, nothing at DC or above the band limit.
    fft.set_bin(0, 0.0);
    for (std::size_t k = 1; k <= n / 2; ++k) {
      const double f_bin = static_cast<double>(k) * sample_rate_hz / static_cast<double>(n);
      const double f = std::max(kPinkFloorHz, f_bin);
      fft.set_bin(k, f_bin > band_limit_hz ? Complex{0.0, 0.0} : fft.bin(k) / std::sqrt(f / kPinkFloorHz));
    }
    fft.inverse();
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::vector<double> x(n);
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate_hz;
      const double envelope = 1.0 + kModulationDepth * std::sin(2.0 * std::numbers::pi * kModulationHz * t + phase);
      x[i] = fft.time()[i] * envelope;
      energy += x[i] * x[i];
    }
    const double rms = std::sqrt(energy / static_cast<double>(n));
    for (auto& v : x) v /= rms;
    out.push_back(std::move(x));
  }
  return out;
}

void add_sensor_noise(Signal& noise, std::uint64_t seed, double relative_db) {
  if (noise.empty() || noise.front().empty()) return;
  double power = 0.0;
  for (double v : noise.front()) power += v * v;
  power /= static_cast<double>(noise.front().size());
  const double sigma = std::sqrt(power * std::pow(10.0, relative_db / 10.0));
  for (std::size_t m = 0; m < noise.size(); ++m) {
    detail::Rng rng(detail::derive_seed(seed, 0x5E4502ULL + m));
    for (auto& v : noise[m]) v += sigma * rng.gaussian();
  }
}

std::string scenario_to_json(const Scenario& s) {
  using nlohmann::json;
  const auto vec = [](const Vec3& v) { return json::array({v.x, v.y, v.z}); };
  json babblers = json::array();
  for (const auto& b : s.babblers) babblers.push_back(vec(b));
  json j = {
      {"seed", s.seed},
      {"room", {{"width_m", s.room.width}, {"length_m", s.room.length}, {"height_m", s.room.height}}},
      {"array",
       {{"center_m", vec(s.array.center)},
        {"rotation_deg", s.array.rotation_deg},
        {"num_mics", s.array.num_mics},
        {"spacing_m", s.array.spacing_m}}},
      {"source",
       {{"radius_m", s.source.radius_m},
        {"start_deg", s.source.start_deg},
        {"displacement_deg", s.source.displacement_deg}}},
      {"babblers_m", babblers},
      {"duration_s", s.duration_s},
      {"sample_rate_hz", s.sample_rate_hz},
      {"silence_s", s.silence_s},
      {"speed_of_sound_mps", s.speed_of_sound},
      {"band_limit_hz", s.band_limit_hz},
      {"sensor_noise_db", s.sensor_noise_db},
  };
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    const auto vec = [](const json& v) { return Vec3{v.at(0).get<double>(), v.at(1).get<double>(), v.at(2).get<double>()}; };
    Scenario s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.room = {j.at("room").at("width_m").get<double>(), j.at("room").at("length_m").get<double>(),
              j.at("room").at("height_m").get<double>()};
    const auto& a = j.at("array");
    s.array.center = vec(a.at("center_m"));
    s.array.rotation_deg = a.at("rotation_deg").get<double>();
    s.array.num_mics = a.at("num_mics").get<std::size_t>();
    s.array.spacing_m = a.at("spacing_m").get<double>();
    const auto& src = j.at("source");
    s.source = {src.at("radius_m").get<double>(), src.at("start_deg").get<double>(),
                src.at("displacement_deg").get<double>()};
    for (const auto& b : j.at("babblers_m")) s.babblers.push_back(vec(b));
    s.duration_s = j.at("duration_s").get<double>();
    s.sample_rate_hz = j.at("sample_rate_hz").get<unsigned>();
    s.silence_s = j.at("silence_s").get<double>();
    s.speed_of_sound = j.at("speed_of_sound_mps").get<double>();
    s.band_limit_hz = j.at("band_limit_hz").get<double>();
    s.sensor_noise_db = j.at("sensor_noise_db").get<double>();
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sim: malformed scenario JSON: ") + e.what());
  }
}

}  // namespace rtfbeam::sim
