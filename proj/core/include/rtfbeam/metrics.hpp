#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rtfbeam/beamformer.hpp"

namespace rtfbeam::metrics {

inline constexpr double kSdrClampDb = 120.0;
inline constexpr double kFlatPeakRatio = 1.01;

// Scale-invariant SDR in dB, clamped to +-120 dB. Throws ConfigError for an
// all-zero reference or mismatched lengths; an all-zero estimate scores -120.
double si_sdr(const std::vector<double>& est, const std::vector<double>& ref);

// Sum of the two negated SI-SDR terms.
double binaural_loss(const std::vector<double>& est_left, const std::vector<double>& est_right,
                     const std::vector<double>& ref_left, const std::vector<double>& ref_right);

// |a - b| folded onto [0, 180].
double angular_distance_deg(double a_deg, double b_deg);

struct DoaError {
  std::vector<double> per_frame_deg;  // NaN where the frame is inactive or flat
  double mean_deg = 0.0;
  std::size_t frames_used = 0;
  std::size_t flat_frames = 0;

  double fraction_within(double tolerance_deg) const;
};

// Per-frame |argmax_theta P(theta, l) - doa(l)| over frames with
// active[l] != 0; frames whose max/min power ratio is below 1.01 are skipped
// and counted as flat.
DoaError doa_error(const beamformer::BeampatternGrid& grid, const std::vector<double>& true_doa_deg,
                   const std::vector<std::uint8_t>& active);

struct EvalReport {
  std::uint64_t scenario_id = 0;
  double snr_db = 0.0;
  std::string method;
  double si_sdr_left = 0.0;
  double si_sdr_right = 0.0;
  double si_sdr_input_left = 0.0;   // left reference channel
  double si_sdr_input_right = 0.0;  // right reference channel
  double si_sdr_input_best_left = 0.0;
  double si_sdr_input_best_right = 0.0;
  double binaural_loss = 0.0;
  double rtf_mse_left_db = 0.0;   // NaN when the method has no RTF
  double rtf_mse_right_db = 0.0;
  double doa_error_deg = 0.0;     // NaN when not computed
  double doa_within_10deg = 0.0;
  std::vector<double> doa_error_per_frame;
  std::string status = "ok";
};

std::string csv_header();
// Fixed-precision row matching csv_header(); identical inputs give identical text.
std::string csv_row(const EvalReport& report);
std::string to_json(const EvalReport& report);

}  // namespace rtfbeam::metrics
