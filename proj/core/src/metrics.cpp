#include "rtfbeam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

namespace rtfbeam::metrics {

namespace {

std::string fixed(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.6f}", v);
}

}  // namespace

double si_sdr(const std::vector<double>& est, const std::vector<double>& ref) {
  if (est.size() != ref.size()) throw ConfigError("metrics: estimate and reference lengths differ");
  double ref_energy = 0.0, cross = 0.0, est_energy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref_energy += ref[i] * ref[i];
    cross += est[i] * ref[i];
    est_energy += est[i] * est[i];
  }
  if (ref_energy == 0.0) throw ConfigError("metrics: reference signal is all zero");
  if (est_energy == 0.0) return -kSdrClampDb;

  const double scale = cross / ref_energy;
  double target = 0.0, distortion = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double t = scale * ref[i];
    target += t * t;
    distortion += (est[i] - t) * (est[i] - t);
  }
  if (distortion == 0.0) return kSdrClampDb;
  if (target == 0.0) return -kSdrClampDb;
  return std::clamp(10.0 * std::log10(target / distortion), -kSdrClampDb, kSdrClampDb);
}

double binaural_loss(const std::vector<double>& est_left, const std::vector<double>& est_right,
                     const std::vector<double>& ref_left, const std::vector<double>& ref_right) {
  return -si_sdr(est_left, ref_left) - si_sdr(est_right, ref_right);
}

double angular_distance_deg(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

double DoaError::fraction_within(double tolerance_deg) const {
  if (frames_used == 0) return 0.0;
  std::size_t hits = 0;
  for (double e : per_frame_deg)
    if (!std::isnan(e) && e <= tolerance_deg) ++hits;
  return static_cast<double>(hits) / static_cast<double>(frames_used);
}

DoaError doa_error(const beamformer::BeampatternGrid& grid, const std::vector<double>& true_doa_deg,
                   const std::vector<std::uint8_t>& active) {
  if (true_doa_deg.size() != grid.frames || active.size() != grid.frames)
    throw ConfigError("metrics: DOA truth does not match beampattern frame count");
  if (grid.wideband.empty()) throw ConfigError("metrics: wideband beampower missing");

  DoaError out;
  out.per_frame_deg.assign(grid.frames, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  for (std::size_t l = 0; l < grid.frames; ++l) {
    if (active[l] == 0) continue;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t a = 0; a < grid.angles_deg.size(); ++a) {
      lo = std::min(lo, grid.power(a, l));
      hi = std::max(hi, grid.power(a, l));
    }
    if (!(hi >= kFlatPeakRatio * lo)) {
      ++out.flat_frames;
      continue;
    }
    const double err = angular_distance_deg(grid.angles_deg[beamformer::peak_angle_index(grid, l)], true_doa_deg[l]);
    out.per_frame_deg[l] = err;
    sum += err;
    ++out.frames_used;
  }
  out.mean_deg = out.frames_used > 0 ? sum / static_cast<double>(out.frames_used)
                                     : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::string csv_header() {
  return "scenario_id,snr_db,method,si_sdr_left,si_sdr_right,si_sdr_input_left,si_sdr_input_right,"
         "si_sdr_input_best_left,si_sdr_input_best_right,binaural_loss,rtf_mse_left_db,rtf_mse_right_db,"
         "doa_error_deg,doa_within_10deg,status";
}

std::string csv_row(const EvalReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.scenario_id, fixed(r.snr_db), r.method,
                     fixed(r.si_sdr_left), fixed(r.si_sdr_right), fixed(r.si_sdr_input_left),
                     fixed(r.si_sdr_input_right), fixed(r.si_sdr_input_best_left), fixed(r.si_sdr_input_best_right),
                     fixed(r.binaural_loss), fixed(r.rtf_mse_left_db), fixed(r.rtf_mse_right_db),
                     fixed(r.doa_error_deg), fixed(r.doa_within_10deg), r.status);
}

std::string to_json(const EvalReport& r) {
  const auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::json per_frame = nlohmann::json::array();
  for (double v : r.doa_error_per_frame) per_frame.push_back(num(v));
  const nlohmann::json j = {
      {"scenario_id", r.scenario_id},
      {"snr_db", r.snr_db},
      {"method", r.method},
      {"si_sdr_left_db", r.si_sdr_left},
      {"si_sdr_right_db", r.si_sdr_right},
      {"si_sdr_input_left_db", r.si_sdr_input_left},
      {"si_sdr_input_right_db", r.si_sdr_input_right},
      {"si_sdr_input_best_left_db", r.si_sdr_input_best_left},
      {"si_sdr_input_best_right_db", r.si_sdr_input_best_right},
      {"binaural_loss", r.binaural_loss},
      {"rtf_mse_left_db", num(r.rtf_mse_left_db)},
      {"rtf_mse_right_db", num(r.rtf_mse_right_db)},
      {"doa_error_deg", num(r.doa_error_deg)},
      {"doa_within_10deg", r.doa_within_10deg},
      {"doa_error_per_frame_deg", per_frame},
      {"status", r.status},
  };
  return j.dump(2);
}

}  // namespace rtfbeam::metrics
