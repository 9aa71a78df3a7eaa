#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rtfbeam/common.hpp"
#include "rtfbeam/rtf.hpp"
#include "rtfbeam/stft.hpp"

namespace rtfbeam::sim {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

double distance(const Vec3& a, const Vec3& b);

struct Room {
  double width = 7.5;   // x extent
  double length = 7.5;  // y extent
  double height = 3.0;

  bool contains(const Vec3& p) const;
};

// Uniform linear array in the horizontal plane. Element m sits at
// (m - (M-1)/2) * spacing along `axis()`; element 0 is the left-most mic.
struct ArrayGeometry {
  Vec3 center{3.75, 3.75, 1.3};
  double rotation_deg = 0.0;
  std::size_t num_mics = 8;
  double spacing_m = 0.05;

  Vec3 axis() const;
  Vec3 broadside() const;
  std::vector<double> axis_positions() const;
  std::vector<Vec3> mic_positions() const;
};

// Circular path around the array center. Angles are measured from broadside,
// positive toward the +axis end, in the array's horizontal plane. The source
// holds start_deg during the leading silence and then moves at constant
// angular speed until the end of the signal.
struct SourceTrajectory {
  double radius_m = 1.25;
  double start_deg = 0.0;
  double displacement_deg = 0.0;
};

struct Scenario {
  std::uint64_t seed = 0;
  Room room;
  ArrayGeometry array;
  SourceTrajectory source;
  std::vector<Vec3> babblers;
  double duration_s = 4.0;
  unsigned sample_rate_hz = 16000;
  double silence_s = 0.5;
  double speed_of_sound = 343.0;
  // Source signals carry no energy above this; ground-truth RTFs are only
  // defined (valid) at or below it.
  double band_limit_hz = 7000.0;
  // Spatially white microphone self-noise relative to the babble power.
  double sensor_noise_db = -10.0;

  std::size_t num_samples() const;
  std::size_t silence_samples() const;
  double doa_at(double t_seconds) const;
  Vec3 source_position_at(double t_seconds) const;
};

struct ScenarioOptions {
  bool moving = true;
  std::size_t num_babblers = 20;
  double sensor_noise_db = -10.0;
};

inline constexpr std::size_t kDefaultBabblers = 20;

// Deterministic in (seed, options). Room 6-9 m x 6-9 m x 3 m, 8 mics at 1.3 m
// rotated within +-45 deg, radius 1-1.5 m, |displacement| in [45, 150] deg
// when moving (0 otherwise), babblers 0.3 m inside the walls.
Scenario sample_scenario(std::uint64_t seed, const ScenarioOptions& options = {});

// Throws ConfigError if the array, trajectory or babblers leave the room.
void validate(const Scenario& scenario);

struct GroundTruth {
  std::vector<double> doa_per_frame;
  std::vector<std::uint8_t> speech_active;  // per frame
  std::size_t noise_frames = 0;             // leading frames with no target energy
  rtf::RtfTrajectory rtf_left;
  rtf::RtfTrajectory rtf_right;
  std::vector<double> clean_ref_left;
  std::vector<double> clean_ref_right;
};

// Free-field rendering of a point source whose position is given at every
// `hop`-th sample (linearly interpolated in between). Each mic receives
// source(n - d(n)/c * fs) / d(n) through a 32-tap windowed-sinc fractional delay.
Signal render_point_source(const std::vector<double>& source, const std::vector<Vec3>& path, std::size_t hop,
                           const std::vector<Vec3>& mics, unsigned sample_rate_hz, double speed_of_sound);

// Analytic free-field RTF (d_ref/d_m) exp(-j 2 pi f_k (tau_m - tau_ref)) for
// a source at `source`.
CVector free_field_rtf(const Vec3& source, const std::vector<Vec3>& mics, double f_hz, std::size_t ref,
                       double speed_of_sound);

struct RenderedSource {
  Signal clean;
  GroundTruth truth;
};

// The first silence_s seconds of `source` are muted.
RenderedSource render_moving_source(const std::vector<double>& source, const Scenario& scenario,
                                    const stft::StftConfig& config);

// Sum of static renderings, one per babbler position.
Signal render_babble(const Scenario& scenario, const std::vector<std::vector<double>>& babbler_signals);

struct Mixture {
  Signal mixture;
  Signal noise;  // scaled
  double noise_gain = 0.0;
};

inline constexpr double kSnrCapDb = 120.0;

// Scales noise so that the clean/noise power ratio at `ref` equals snr_db;
// at or above kSnrCapDb the noise is dropped.
Mixture mix_at_snr(const Signal& clean, const Signal& noise, double snr_db, std::size_t ref);

inline constexpr double kDefaultBandLimitHz = 7000.0;

// Speech-shaped noise: pink (-3 dB/octave) Gaussian noise band-limited to
// band_limit_hz, with a 4 Hz amplitude modulation, unit RMS, independent per
// signal.
std::vector<std::vector<double>> synthesize_babbler_signals(std::uint64_t seed, std::size_t count, double duration_s,
                                                            unsigned sample_rate_hz,
                                                            double band_limit_hz = kDefaultBandLimitHz);

// Adds independent white Gaussian noise to every channel, with power
// relative_db below the mean power of `noise` at channel 0.
void add_sensor_noise(Signal& noise, std::uint64_t seed, double relative_db);

// Number of leading STFT frames that end before the target becomes audible.
std::size_t noise_only_frames(const Scenario& scenario, const stft::StftConfig& config);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

}  // namespace rtfbeam::sim
