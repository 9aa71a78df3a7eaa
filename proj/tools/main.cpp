#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cli/commands.hpp"

namespace {

using namespace rtfbeam;

struct StftFlags {
  std::size_t window_len = 512;
  std::size_t hop = 256;
  std::string window = "sqrt_hann";

  void attach(CLI::App* app) {
    app->add_option("--window-len", window_len, "STFT window length in samples")->capture_default_str();
    app->add_option("--hop", hop, "STFT hop in samples")->capture_default_str();
    app->add_option("--window", window, "Analysis window: hann or sqrt_hann")->capture_default_str();
  }

  stft::StftConfig build() const {
    stft::StftConfig c;
    c.window_len = window_len;
    c.hop = hop;
    c.window = stft::window_from_string(window);
    stft::validate(c);
    return c;
  }
};

struct PipelineFlags {
  pipeline::Options options;
  std::string method = "past";

  void attach(CLI::App* app, bool with_method, const std::string& default_method) {
    method = default_method;
    if (with_method)
      app->add_option("--method", method, "cw-batch, past, oracle or none")->capture_default_str();
    app->add_option("--beta", options.beta, "PAST forgetting factor in (0, 1]")->capture_default_str();
    app->add_option("--noise-frames", options.noise_frames,
                    "Noise-only frames for the noise covariance (0 = leading silence)")
        ->capture_default_str();
    app->add_option("--loading", options.loading, "Diagonal loading relative to trace/M")->capture_default_str();
  }

  pipeline::Method parsed_method() const { return pipeline::method_from_string(method); }

  void validate() const {
    if (!(options.beta > 0.0 && options.beta <= 1.0)) throw ConfigError("--beta must be in (0, 1]");
    if (!(options.loading >= 0.0)) throw ConfigError("--loading must be non-negative");
  }
};

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid number '" + item + "' in list '" + text + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binaural MVDR speech enhancement with tracked relative transfer functions"};
  app.require_subcommand(1);

  // simulate
  cli::SimulateConfig sim_cfg;
  StftFlags sim_stft;
  std::string sim_out, sim_format = "float32";
  auto* simulate = app.add_subcommand("simulate", "Render anechoic scenario bundles");
  simulate->add_option("--seed", sim_cfg.seed, "First scenario seed")->capture_default_str();
  simulate->add_option("--count", sim_cfg.count, "Number of bundles (seeds seed..seed+count-1)")
      ->capture_default_str();
  simulate->add_option("--snr", sim_cfg.snr_db, "Input SNR in dB at the left reference mic")->capture_default_str();
  simulate->add_flag("--static", sim_cfg.static_source, "Keep the target source fixed");
  simulate->add_option("--babblers", sim_cfg.babblers, "Number of babble sources")->capture_default_str();
  simulate->add_option("--sensor-noise", sim_cfg.sensor_noise_db, "Sensor noise level relative to babble, dB")
      ->capture_default_str();
  simulate->add_option("--format", sim_format, "WAV sample format: float32 or pcm16")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output root (default: $RTFBEAM_OUTPUT_ROOT or .)");
  sim_stft.attach(simulate);

  // estimate-rtf
  cli::EstimateConfig est_cfg;
  PipelineFlags est_flags;
  std::string est_bundle, est_out;
  bool est_no_mse = false;
  auto* estimate = app.add_subcommand("estimate-rtf", "Estimate left/right RTF trajectories for a bundle");
  estimate->add_option("bundle", est_bundle, "Scenario bundle directory")->required();
  estimate->add_option("--out", est_out, "Output directory (default: the bundle)");
  estimate->add_flag("--no-mse", est_no_mse, "Skip the MSE against ground truth");
  est_flags.attach(estimate, true, "past");

  // beamform
  cli::BeamformConfig bf_cfg;
  PipelineFlags bf_flags;
  std::string bf_bundle, bf_out, bf_results;
  auto* beamform = app.add_subcommand("beamform", "MVDR-enhance a bundle and score it");
  beamform->add_option("bundle", bf_bundle, "Scenario bundle directory")->required();
  beamform->add_option("--out", bf_out, "Output directory (default: the bundle)");
  beamform->add_option("--results", bf_results, "Results CSV to update (default: <out>/results.csv)");
  bf_flags.attach(beamform, true, "past");

  // beampattern
  cli::BeampatternConfig bp_cfg;
  PipelineFlags bp_flags;
  std::string bp_bundle, bp_out;
  double bp_steer = 0.0;
  auto* beampattern = app.add_subcommand("beampattern", "Export narrowband beampatterns and wideband beampower");
  beampattern->add_option("bundle", bp_bundle, "Scenario bundle directory")->required();
  beampattern->add_option("--out", bp_out, "Output directory (default: the bundle)");
  beampattern->add_option("--grid-step", bp_flags.options.grid_step_deg, "Angle grid step in degrees")
      ->capture_default_str();
  beampattern->add_flag("--narrowband-csv", bp_cfg.narrowband_csv, "Also write |B(k, theta, l)| as CSV");
  auto* steer_opt = beampattern->add_option("--delay-sum", bp_steer,
                                            "Use delay-and-sum weights steered to this angle instead of MVDR");
  bp_flags.attach(beampattern, true, "oracle");

  // evaluate
  cli::EvaluateConfig ev_cfg;
  PipelineFlags ev_flags;
  StftFlags ev_stft;
  std::string ev_out, ev_seeds = "0-4", ev_snrs = "3,6,10", ev_methods = "cw-batch,past,oracle,none";
  auto* evaluate = app.add_subcommand("evaluate", "Run a seed x SNR x method sweep into results.csv");
  evaluate->add_option("--seeds", ev_seeds, "Seeds, e.g. 0-19 or 1,3,5")->capture_default_str();
  evaluate->add_option("--snrs", ev_snrs, "Comma-separated input SNRs in dB")->capture_default_str();
  evaluate->add_option("--methods", ev_methods, "Comma-separated methods")->capture_default_str();
  evaluate->add_flag("--static", ev_cfg.static_source, "Keep the target source fixed");
  evaluate->add_option("--babblers", ev_cfg.babblers, "Number of babble sources")->capture_default_str();
  evaluate->add_option("--sensor-noise", ev_cfg.sensor_noise_db, "Sensor noise level relative to babble, dB")
      ->capture_default_str();
  evaluate->add_option("--jobs", ev_cfg.jobs, "Worker threads over scenarios")->capture_default_str();
  evaluate->add_option("--out", ev_out, "Output directory (default: $RTFBEAM_OUTPUT_ROOT or .)");
  evaluate->add_flag("--no-beampattern", [&](std::int64_t) { ev_flags.options.beampattern = false; },
                     "Skip the beampattern-based DOA columns");
  ev_stft.attach(evaluate);
  ev_flags.attach(evaluate, false, "past");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kConfigError;
  }

  try {
    if (*simulate) {
      sim_cfg.out_dir = sim_out;
      sim_cfg.stft = sim_stft.build();
      if (sim_format == "float32") {
        sim_cfg.format = wav::SampleFormat::float32;
      } else if (sim_format == "pcm16") {
        sim_cfg.format = wav::SampleFormat::pcm16;
      } else {
        throw ConfigError("--format must be float32 or pcm16");
      }
      for (const auto& b : cli::cmd_simulate(sim_cfg)) fmt::print("{}\n", b.string());
    } else if (*estimate) {
      est_flags.validate();
      est_cfg.bundle = est_bundle;
      est_cfg.out_dir = est_out;
      est_cfg.method = est_flags.parsed_method();
      est_cfg.options = est_flags.options;
      est_cfg.compute_mse = !est_no_mse;
      if (const auto r = cli::cmd_estimate_rtf(est_cfg))
        fmt::print("rtf mse left {:.3f} dB, right {:.3f} dB\n", r->mse_left.mean_db, r->mse_right.mean_db);
    } else if (*beamform) {
      bf_flags.validate();
      bf_cfg.bundle = bf_bundle;
      bf_cfg.out_dir = bf_out;
      bf_cfg.results_csv = bf_results;
      bf_cfg.method = bf_flags.parsed_method();
      bf_cfg.options = bf_flags.options;
      const auto r = cli::cmd_beamform(bf_cfg);
      fmt::print("si-sdr left {:.3f} dB (input {:.3f}), right {:.3f} dB (input {:.3f})\n", r.si_sdr_left,
                 r.si_sdr_input_left, r.si_sdr_right, r.si_sdr_input_right);
    } else if (*beampattern) {
      bp_flags.validate();
      bp_cfg.bundle = bp_bundle;
      bp_cfg.out_dir = bp_out;
      bp_cfg.method = bp_flags.parsed_method();
      bp_cfg.options = bp_flags.options;
      if (steer_opt->count() > 0) bp_cfg.delay_sum_steer_deg = bp_steer;
      const auto r = cli::cmd_beampattern(bp_cfg);
      fmt::print("{}: {} angles x {} frames", r.name, r.angles, r.frames);
      if (r.doa) fmt::print(", mean doa error {:.2f} deg", r.doa->mean_deg);
      fmt::print("\n");
    } else if (*evaluate) {
      ev_flags.validate();
      ev_cfg.out_dir = ev_out;
      ev_cfg.seeds = cli::parse_seed_list(ev_seeds);
      ev_cfg.snrs_db = parse_doubles(ev_snrs);
      ev_cfg.methods.clear();
      std::size_t pos = 0;
      while (pos <= ev_methods.size()) {
        const auto comma = ev_methods.find(',', pos);
        ev_cfg.methods.push_back(pipeline::method_from_string(
            ev_methods.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      ev_cfg.stft = ev_stft.build();
      ev_cfg.options = ev_flags.options;
      const auto s = cli::cmd_evaluate(ev_cfg);
      fmt::print("{}: {} computed, {} skipped, {} failed\n", s.csv.string(), s.computed, s.skipped, s.failed);
      if (s.failed > 0) return cli::kRuntimeError;
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return cli::kConfigError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return cli::kRuntimeError;
  }
  return cli::kOk;
}
