#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rtfbeam/beamformer.hpp"
#include "rtfbeam/covariance.hpp"
#include "rtfbeam/metrics.hpp"
#include "rtfbeam/rtf.hpp"
#include "rtfbeam/simulator.hpp"
#include "rtfbeam/stft.hpp"

// End-to-end glue shared by the CLI, the acceptance suite and the benchmarks:
// scene synthesis, RTF estimation per method, MVDR enhancement and scoring.
namespace rtfbeam::pipeline {

enum class Method { cw_batch, past, oracle, none };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct Options {
  double beta = rtf::kDefaultBeta;
  std::size_t noise_frames = 0;  // 0 = derive from the scenario's leading silence
  double loading = covariance::kDefaultLoading;
  double grid_step_deg = 1.0;
  bool beampattern = true;
};

// Clean target and unscaled noise (babble plus sensor noise) for one seed,
// before SNR mixing.
struct RenderedScene {
  sim::Scenario scenario;
  stft::StftConfig config;
  Signal clean;
  Signal babble;
  sim::GroundTruth truth;
};

struct Scene {
  sim::Scenario scenario;
  stft::StftConfig config;
  Signal clean;
  Signal noise;
  Signal mixture;
  sim::GroundTruth truth;
  double snr_db = 0.0;
};

RenderedScene render_scene(std::uint64_t seed, const sim::ScenarioOptions& options, const stft::StftConfig& config);

// SNR is measured at the left reference channel.
Scene mix_scene(const RenderedScene& rendered, double snr_db);

struct NoiseModel {
  covariance::HermitianMatrixField phi_nn;
  covariance::HermitianMatrixField sqrt;      // loaded Phi_nn^{1/2}
  covariance::HermitianMatrixField inv_sqrt;  // loaded Phi_nn^{-1/2}
  std::size_t noise_frames = 0;
};

NoiseModel fit_noise_model(const stft::ComplexSpectrogram& mixture, std::size_t noise_frames, double loading);

// Method::none has no RTF and throws ConfigError; Method::oracle requires truth.
rtf::RtfTrajectory estimate_rtf(Method method, const stft::ComplexSpectrogram& mixture, const NoiseModel& noise,
                                Side side, const sim::GroundTruth* truth, const Options& options);

beamformer::BeamformerWeights design_weights(Method method, const std::optional<rtf::RtfTrajectory>& rtf,
                                             const NoiseModel& noise, std::size_t channels,
                                             const stft::ComplexSpectrogram& mixture, Side side,
                                             const Options& options);

struct SideOutput {
  std::optional<rtf::RtfTrajectory> rtf;
  beamformer::BeamformerWeights weights;
  std::vector<double> enhanced;
  std::optional<rtf::MseResult> mse;
};

struct MethodResult {
  SideOutput left;
  SideOutput right;
  std::optional<beamformer::BeampatternGrid> beampattern;  // left side
  metrics::EvalReport report;
};

std::size_t resolve_noise_frames(const Scene& scene, const Options& options);

MethodResult run_method(const Scene& scene, Method method, const Options& options);

}  // namespace rtfbeam::pipeline
