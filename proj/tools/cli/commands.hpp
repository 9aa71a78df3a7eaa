#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rtfbeam/pipeline.hpp"
#include "rtfbeam/stft.hpp"
#include "rtfbeam/wav.hpp"

namespace rtfbeam::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeError = 3 };

// Default output root: $RTFBEAM_OUTPUT_ROOT if set, else the working directory.
fs::path default_output_root();

// Bundle directory name for a seed, e.g. scene_000007.
std::string bundle_name(std::uint64_t seed);

struct SimulateConfig {
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::size_t count = 1;
  double snr_db = 10.0;
  bool static_source = false;
  std::size_t babblers = sim::kDefaultBabblers;
  double sensor_noise_db = -10.0;
  stft::StftConfig stft;
  wav::SampleFormat format = wav::SampleFormat::float32;
};

// Writes one bundle per seed in [seed, seed + count). Returns the bundle paths.
std::vector<fs::path> cmd_simulate(const SimulateConfig& config);

struct EstimateConfig {
  fs::path bundle;
  fs::path out_dir;  // empty = the bundle
  pipeline::Method method = pipeline::Method::past;
  pipeline::Options options;
  bool compute_mse = true;
};

struct EstimateResult {
  rtf::MseResult mse_left;
  rtf::MseResult mse_right;
};

std::optional<EstimateResult> cmd_estimate_rtf(const EstimateConfig& config);

struct BeamformConfig {
  fs::path bundle;
  fs::path out_dir;       // empty = the bundle
  fs::path results_csv;   // empty = <out_dir>/results.csv
  pipeline::Method method = pipeline::Method::past;
  pipeline::Options options;
};

metrics::EvalReport cmd_beamform(const BeamformConfig& config);

struct BeampatternConfig {
  fs::path bundle;
  fs::path out_dir;  // empty = the bundle
  pipeline::Method method = pipeline::Method::oracle;
  std::optional<double> delay_sum_steer_deg;  // overrides method when set
  pipeline::Options options;
  bool narrowband_csv = false;
};

struct BeampatternResult {
  std::string name;
  std::size_t angles = 0;
  std::size_t frames = 0;
  std::optional<metrics::DoaError> doa;
};

BeampatternResult cmd_beampattern(const BeampatternConfig& config);

struct EvaluateConfig {
  fs::path out_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<double> snrs_db;
  std::vector<pipeline::Method> methods;
  bool static_source = false;
  std::size_t babblers = sim::kDefaultBabblers;
  double sensor_noise_db = -10.0;
  std::size_t jobs = 1;
  stft::StftConfig stft;
  pipeline::Options options;
};

struct EvaluateSummary {
  std::size_t computed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  fs::path csv;
};

// Runs the seed x SNR x method grid into <out_dir>/results.csv. Rows already
// present with status "ok" are kept and not recomputed.
EvaluateSummary cmd_evaluate(const EvaluateConfig& config);

// Parses "3", "0-19" or "1,4,7-9".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

// Loads a bundle written by cmd_simulate.
pipeline::Scene load_bundle(const fs::path& bundle);

}  // namespace rtfbeam::cli
