#include "rtfbeam/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "random.hpp"

namespace rtfbeam::pipeline {

namespace {

constexpr std::uint64_t kTargetStream = 0x7A26E7ULL;
constexpr std::uint64_t kBabbleStream = 0xBAB61EULL;
constexpr std::uint64_t kSensorStream = 0x5E750AULL;

std::vector<double> truncate(const std::vector<double>& x, std::size_t n) {
  return {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(std::min(n, x.size()))};
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::cw_batch: return "cw-batch";
    case Method::past: return "past";
    case Method::oracle: return "oracle";
    case Method::none: return "none";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "cw-batch") return Method::cw_batch;
  if (name == "past") return Method::past;
  if (name == "oracle") return Method::oracle;
  if (name == "none") return Method::none;
  throw ConfigError("unknown method '" + name + "' (expected cw-batch, past, oracle or none)");
}

RenderedScene render_scene(std::uint64_t seed, const sim::ScenarioOptions& options, const stft::StftConfig& config) {
  RenderedScene out;
  out.scenario = sim::sample_scenario(seed, options);
  out.config = config;
  const auto& s = out.scenario;
  const auto target = sim::synthesize_babbler_signals(detail::derive_seed(seed, kTargetStream), 1, s.duration_s,
                                                      s.sample_rate_hz, s.band_limit_hz);
  auto rendered = sim::render_moving_source(target.front(), s, config);
  out.clean = std::move(rendered.clean);
  out.truth = std::move(rendered.truth);
  const auto babblers = sim::synthesize_babbler_signals(detail::derive_seed(seed, kBabbleStream), s.babblers.size(),
                                                        s.duration_s, s.sample_rate_hz, s.band_limit_hz);
  out.babble = sim::render_babble(s, babblers);
  sim::add_sensor_noise(out.babble, detail::derive_seed(seed, kSensorStream), s.sensor_noise_db);
  return out;
}

Scene mix_scene(const RenderedScene& rendered, double snr_db) {
  auto mixed = sim::mix_at_snr(rendered.clean, rendered.babble, snr_db, 0);
  Scene scene;
  scene.scenario = rendered.scenario;
  scene.config = rendered.config;
  scene.clean = rendered.clean;
  scene.noise = std::move(mixed.noise);
  scene.mixture = std::move(mixed.mixture);
  scene.truth = rendered.truth;
  scene.snr_db = snr_db;
  return scene;
}

NoiseModel fit_noise_model(const stft::ComplexSpectrogram& mixture, std::size_t noise_frames, double loading) {
  NoiseModel model;
  model.noise_frames = noise_frames;
  model.phi_nn = covariance::estimate_noise_covariance(mixture, noise_frames);
  model.sqrt = covariance::sqrt_hermitian(model.phi_nn, loading);
  model.inv_sqrt = covariance::inverse_sqrt(model.phi_nn, loading);
  return model;
}

rtf::RtfTrajectory estimate_rtf(Method method, const stft::ComplexSpectrogram& mixture, const NoiseModel& noise,
                                Side side, const sim::GroundTruth* truth, const Options& options) {
  const std::size_t ref = reference_channel(side, mixture.channels());
  switch (method) {
    case Method::cw_batch: {
      const auto phi_yy = covariance::estimate_mixture_covariance(mixture, noise.noise_frames);
      const auto phi_ww = covariance::congruence(noise.inv_sqrt, phi_yy);
      return rtf::to_trajectory(rtf::estimate_rtf_cw(noise.sqrt, phi_ww, ref), mixture.frames(), ref, side);
    }
    case Method::past: {
      const auto whitened = covariance::whiten(mixture, noise.inv_sqrt);
      return rtf::track_rtf_past(whitened, noise.sqrt, ref, side, {options.beta, 1.0});
    }
    case Method::oracle:
      if (!truth) throw ConfigError("pipeline: oracle method needs ground truth");
      return side == Side::left ? truth->rtf_left : truth->rtf_right;
    case Method::none: break;
  }
  throw ConfigError("pipeline: method 'none' has no RTF");
}

beamformer::BeamformerWeights design_weights(Method method, const std::optional<rtf::RtfTrajectory>& rtf,
                                             const NoiseModel& noise, std::size_t channels,
                                             const stft::ComplexSpectrogram& mixture, Side side,
                                             const Options& options) {
  if (method == Method::none || !rtf)
    return beamformer::passthrough_weights(channels, mixture.bins(), mixture.frames(),
                                           reference_channel(side, channels), side);
  return beamformer::mvdr_weights(*rtf, noise.phi_nn, options.loading);
}

std::size_t resolve_noise_frames(const Scene& scene, const Options& options) {
  return options.noise_frames > 0 ? options.noise_frames : scene.truth.noise_frames;
}

MethodResult run_method(const Scene& scene, Method method, const Options& options) {
  const auto spec = stft::analyze(scene.mixture, scene.config);
  const auto noise = fit_noise_model(spec, resolve_noise_frames(scene, options), options.loading);
  const std::size_t channels = spec.channels();

  MethodResult result;
  const auto run_side = [&](Side side, SideOutput& out) {
    if (method != Method::none) {
      out.rtf = estimate_rtf(method, spec, noise, side, &scene.truth, options);
      const auto& truth = side == Side::left ? scene.truth.rtf_left : scene.truth.rtf_right;
      out.mse = rtf::rtf_mse(*out.rtf, truth, &scene.truth.speech_active);
    }
    out.weights = design_weights(method, out.rtf, noise, channels, spec, side, options);
    out.enhanced = stft::synthesize(beamformer::apply(out.weights, spec));
  };
  run_side(Side::left, result.left);
  run_side(Side::right, result.right);

  const std::size_t n = result.left.enhanced.size();
  const auto& clean_left = scene.truth.clean_ref_left;
  const auto& clean_right = scene.truth.clean_ref_right;
  const auto ref_left = truncate(clean_left, n);
  const auto ref_right = truncate(clean_right, n);

  auto& r = result.report;
  r.scenario_id = scene.scenario.seed;
  r.snr_db = scene.snr_db;
  r.method = to_string(method);
  r.si_sdr_left = metrics::si_sdr(truncate(result.left.enhanced, n), ref_left);
  r.si_sdr_right = metrics::si_sdr(truncate(result.right.enhanced, n), ref_right);
  r.si_sdr_input_left = metrics::si_sdr(truncate(scene.mixture.front(), n), ref_left);
  r.si_sdr_input_right = metrics::si_sdr(truncate(scene.mixture.back(), n), ref_right);
  r.si_sdr_input_best_left = -metrics::kSdrClampDb;
  r.si_sdr_input_best_right = -metrics::kSdrClampDb;
  for (const auto& ch : scene.mixture) {
    const auto x = truncate(ch, n);
    r.si_sdr_input_best_left = std::max(r.si_sdr_input_best_left, metrics::si_sdr(x, ref_left));
    r.si_sdr_input_best_right = std::max(r.si_sdr_input_best_right, metrics::si_sdr(x, ref_right));
  }
  r.binaural_loss = -r.si_sdr_left - r.si_sdr_right;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.rtf_mse_left_db = result.left.mse ? result.left.mse->mean_db : nan;
  r.rtf_mse_right_db = result.right.mse ? result.right.mse->mean_db : nan;
  r.doa_error_deg = nan;

  if (options.beampattern) {
    const auto positions = scene.scenario.array.axis_positions();
    auto grid = beamformer::narrowband_beampattern(result.left.weights, positions,
                                                   beamformer::angle_grid(options.grid_step_deg), scene.config,
                                                   scene.scenario.speed_of_sound);
    beamformer::wideband_beampower(grid);
    const auto doa = metrics::doa_error(grid, scene.truth.doa_per_frame, scene.truth.speech_active);
    r.doa_error_deg = doa.mean_deg;
    r.doa_within_10deg = doa.fraction_within(10.0);
    r.doa_error_per_frame = doa.per_frame_deg;
    result.beampattern = std::move(grid);
  }
  return result;
}

}  // namespace rtfbeam::pipeline
