#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "rtfbeam/io_util.hpp"
#include "rtfbeam/tensor_io.hpp"

namespace rtfbeam::cli {

namespace {

using nlohmann::json;

constexpr const char* kScenarioFile = "scenario.json";
constexpr const char* kTruthFile = "ground_truth.json";

json stft_to_json(const stft::StftConfig& c) {
  return {{"sample_rate_hz", c.sample_rate_hz},
          {"window_len", c.window_len},
          {"hop", c.hop},
          {"window", stft::to_string(c.window)}};
}

stft::StftConfig stft_from_json(const json& j) {
  stft::StftConfig c;
  c.sample_rate_hz = j.at("sample_rate_hz").get<unsigned>();
  c.window_len = j.at("window_len").get<std::size_t>();
  c.hop = j.at("hop").get<std::size_t>();
  c.window = stft::window_from_string(j.at("window").get<std::string>());
  return c;
}

void write_text(const fs::path& path, const std::string& text) { io::write_atomic(path, text); }

fs::path resolve_out(const fs::path& out, const fs::path& fallback) { return out.empty() ? fallback : out; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir.string() + "'");
}

void require_bundle(const fs::path& bundle) {
  if (!fs::is_directory(bundle)) throw ConfigError("bundle directory '" + bundle.string() + "' does not exist");
  if (!fs::exists(bundle / kScenarioFile))
    throw ConfigError("'" + bundle.string() + "' is not a scenario bundle (no scenario.json)");
}

std::string fixed6(double v) { return std::isnan(v) ? "nan" : fmt::format("{:.6f}", v); }

std::string sanitize(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return text;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// Results table keyed by (scenario_id, snr_db, method), always written sorted
// so the file content does not depend on completion order.
class ResultsTable {
 public:
  using Key = std::tuple<std::uint64_t, double, std::string>;

  explicit ResultsTable(fs::path path) : path_(std::move(path)) {
    if (!fs::exists(path_)) return;
    std::stringstream in(io::read_file(path_));
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        header = false;
        if (line != metrics::csv_header())
          throw ConfigError("'" + path_.string() + "' has an unexpected header; refusing to overwrite");
        continue;
      }
      if (line.empty()) continue;
      const auto fields = split(line, ',');
      if (fields.size() < 4) continue;
      rows_[key_of(fields)] = line;
    }
  }

  bool completed(const Key& key) const {
    const auto it = rows_.find(key);
    if (it == rows_.end()) return false;
    const auto fields = split(it->second, ',');
    return fields.back() == "ok";
  }

  void put(const metrics::EvalReport& report) {
    const std::string line = metrics::csv_row(report);
    rows_[key_of(split(line, ','))] = line;
  }

  void flush() const {
    std::string text = metrics::csv_header() + "\n";
    for (const auto& [key, line] : rows_) text += line + "\n";
    write_text(path_, text);
  }

  static Key key(std::uint64_t id, double snr, pipeline::Method method) {
    return {id, std::stod(fixed6(snr)), pipeline::to_string(method)};
  }

 private:
  static Key key_of(const std::vector<std::string>& fields) {
    return {std::stoull(fields[0]), std::stod(fields[1]), fields[2]};
  }

  fs::path path_;
  std::map<Key, std::string> rows_;
};

void write_bundle(const fs::path& dir, const pipeline::Scene& scene, wav::SampleFormat format) {
  ensure_dir(dir);
  const auto& s = scene.scenario;
  const unsigned fs_hz = s.sample_rate_hz;

  const json meta = {{"seed", s.seed},
                     {"snr_db", scene.snr_db},
                     {"stft", stft_to_json(scene.config)},
                     {"scenario", json::parse(sim::scenario_to_json(s))}};
  write_text(dir / kScenarioFile, meta.dump(2) + "\n");

  wav::write(dir / "mixture.wav", scene.mixture, fs_hz, format);
  wav::write(dir / "clean.wav", scene.clean, fs_hz, format);
  wav::write(dir / "noise.wav", scene.noise, fs_hz, format);
  wav::write(dir / "clean_ref_left.wav", {scene.truth.clean_ref_left}, fs_hz, format);
  wav::write(dir / "clean_ref_right.wav", {scene.truth.clean_ref_right}, fs_hz, format);

  const auto& t = scene.truth;
  json truth = {{"noise_frames", t.noise_frames},
                {"doa_deg", t.doa_per_frame},
                {"speech_active", t.speech_active},
                {"rtf_left", "rtf_true_left.bdt"},
                {"rtf_right", "rtf_true_right.bdt"}};
  write_text(dir / kTruthFile, truth.dump(2) + "\n");

  std::string csv = "frame,time_s,doa_deg,speech_active\n";
  for (std::size_t l = 0; l < t.doa_per_frame.size(); ++l)
    csv += fmt::format("{},{:.6f},{:.6f},{}\n", l, scene.config.frame_center_seconds(l), t.doa_per_frame[l],
                       static_cast<int>(t.speech_active[l]));
  write_text(dir / "doa.csv", csv);

  tensor_io::save_rtf(dir / "rtf_true_left.bdt", t.rtf_left, scene.config);
  tensor_io::save_rtf(dir / "rtf_true_right.bdt", t.rtf_right, scene.config);
}

void write_mse_csv(const fs::path& dir, const std::string& method, const rtf::MseResult& left,
                   const rtf::MseResult& right) {
  std::string summary = "side,mean_db,pooled_db,cells\n";
  summary += fmt::format("left,{},{},{}\n", fixed6(left.mean_db), fixed6(left.pooled_db), left.cells);
  summary += fmt::format("right,{},{},{}\n", fixed6(right.mean_db), fixed6(right.pooled_db), right.cells);
  write_text(dir / fmt::format("rtf_mse_{}.csv", method), summary);

  std::string frames = "frame,mse_left_db,mse_right_db\n";
  for (std::size_t l = 0; l < left.per_frame_db.size(); ++l)
    frames += fmt::format("{},{},{}\n", l, fixed6(left.per_frame_db[l]), fixed6(right.per_frame_db[l]));
  write_text(dir / fmt::format("rtf_mse_{}_frames.csv", method), frames);
}

void write_beampattern(const fs::path& dir, const std::string& name, const beamformer::BeampatternGrid& grid,
                       const stft::StftConfig& config, bool narrowband_csv) {
  std::string csv = "frame,bin,angle_deg,value\n";
  for (std::size_t l = 0; l < grid.frames; ++l)
    for (std::size_t a = 0; a < grid.angles_deg.size(); ++a)
      csv += fmt::format("{},wideband,{:.3f},{:.9e}\n", l, grid.angles_deg[a], grid.power(a, l));
  write_text(dir / fmt::format("beampower_{}.csv", name), csv);

  tensor_io::TensorFile file;
  file.data = Tensor3(grid.bins, grid.angles_deg.size(), grid.frames);
  for (std::size_t i = 0; i < grid.narrowband.size(); ++i) file.data.data()[i] = grid.narrowband[i];
  file.config = config;
  tensor_io::write(dir / fmt::format("beampattern_{}.bdt", name), file);

  if (narrowband_csv) {
    std::string nb = "frame,bin,angle_deg,value\n";
    for (std::size_t l = 0; l < grid.frames; ++l)
      for (std::size_t k = 0; k < grid.bins; ++k)
        for (std::size_t a = 0; a < grid.angles_deg.size(); ++a)
          nb += fmt::format("{},{},{:.3f},{:.9e}\n", l, k, grid.angles_deg[a], grid.magnitude(k, a, l));
    write_text(dir / fmt::format("beampattern_{}.csv", name), nb);
  }
}

metrics::EvalReport failed_report(std::uint64_t id, double snr, pipeline::Method method, const std::string& what) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  metrics::EvalReport r;
  r.scenario_id = id;
  r.snr_db = snr;
  r.method = pipeline::to_string(method);
  r.si_sdr_left = r.si_sdr_right = r.si_sdr_input_left = r.si_sdr_input_right = nan;
  r.si_sdr_input_best_left = r.si_sdr_input_best_right = r.binaural_loss = nan;
  r.rtf_mse_left_db = r.rtf_mse_right_db = r.doa_error_deg = r.doa_within_10deg = nan;
  r.status = "error: " + sanitize(what);
  return r;
}

}  // namespace

fs::path default_output_root() {
  if (const char* env = std::getenv("RTFBEAM_OUTPUT_ROOT"); env && *env) return env;
  return fs::current_path();
}

std::string bundle_name(std::uint64_t seed) { return fmt::format("scene_{:06d}", seed); }

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  try {
    for (const auto& part : split(text, ',')) {
      if (part.empty()) throw ConfigError("empty entry");
      const auto dash = part.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(part));
        continue;
      }
      const auto lo = std::stoull(part.substr(0, dash));
      const auto hi = std::stoull(part.substr(dash + 1));
      if (hi < lo) throw ConfigError("descending range");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    }
  } catch (const std::exception& e) {
    throw ConfigError("invalid seed list '" + text + "': " + e.what());
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (seeds.empty()) throw ConfigError("seed list is empty");
  return seeds;
}

std::vector<fs::path> cmd_simulate(const SimulateConfig& config) {
  stft::validate(config.stft);
  if (config.count == 0) throw ConfigError("--count must be positive");
  const fs::path root = resolve_out(config.out_dir, default_output_root());
  ensure_dir(root);

  sim::ScenarioOptions options;
  options.moving = !config.static_source;
  options.num_babblers = config.babblers;
  options.sensor_noise_db = config.sensor_noise_db;

  std::vector<fs::path> bundles;
  for (std::size_t i = 0; i < config.count; ++i) {
    const std::uint64_t seed = config.seed + i;
    const auto rendered = pipeline::render_scene(seed, options, config.stft);
    const auto scene = pipeline::mix_scene(rendered, config.snr_db);
    const fs::path dir = root / bundle_name(seed);
    write_bundle(dir, scene, config.format);
    bundles.push_back(dir);
  }
  return bundles;
}

pipeline::Scene load_bundle(const fs::path& bundle) {
  require_bundle(bundle);
  json meta;
  try {
    meta = json::parse(io::read_file(bundle / kScenarioFile));
  } catch (const json::exception& e) {
    throw ConfigError("scenario.json: " + std::string(e.what()));
  }

  pipeline::Scene scene;
  try {
    scene.scenario = sim::scenario_from_json(meta.at("scenario").dump());
    scene.config = stft_from_json(meta.at("stft"));
    scene.snr_db = meta.at("snr_db").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError("scenario.json: " + std::string(e.what()));
  }
  stft::validate(scene.config);

  const unsigned rate = scene.scenario.sample_rate_hz;
  scene.mixture = wav::read(bundle / "mixture.wav", rate).channels;
  if (scene.mixture.size() != scene.scenario.array.num_mics)
    throw ConfigError("mixture.wav channel count does not match the array");
  if (fs::exists(bundle / "clean.wav")) scene.clean = wav::read(bundle / "clean.wav", rate).channels;
  if (fs::exists(bundle / "noise.wav")) scene.noise = wav::read(bundle / "noise.wav", rate).channels;

  const auto truth_path = bundle / kTruthFile;
  if (fs::exists(truth_path)) {
    auto& t = scene.truth;
    try {
      const json j = json::parse(io::read_file(truth_path));
      t.noise_frames = j.at("noise_frames").get<std::size_t>();
      t.doa_per_frame = j.at("doa_deg").get<std::vector<double>>();
      t.speech_active = j.at("speech_active").get<std::vector<std::uint8_t>>();
    } catch (const json::exception& e) {
      throw ConfigError("ground_truth.json: " + std::string(e.what()));
    }
    t.rtf_left = tensor_io::load_rtf(bundle / "rtf_true_left.bdt");
    t.rtf_right = tensor_io::load_rtf(bundle / "rtf_true_right.bdt");
    t.clean_ref_left = wav::read(bundle / "clean_ref_left.wav", rate).channels.at(0);
    t.clean_ref_right = wav::read(bundle / "clean_ref_right.wav", rate).channels.at(0);
  } else {
    scene.truth.noise_frames = sim::noise_only_frames(scene.scenario, scene.config);
  }
  return scene;
}

namespace {

bool has_truth(const pipeline::Scene& scene) { return scene.truth.rtf_left.frames() > 0; }

}  // namespace

std::optional<EstimateResult> cmd_estimate_rtf(const EstimateConfig& config) {
  if (config.method == pipeline::Method::none) throw ConfigError("estimate-rtf needs a method with an RTF");
  const auto scene = load_bundle(config.bundle);
  if (!has_truth(scene) && (config.compute_mse || config.method == pipeline::Method::oracle))
    throw ConfigError("bundle has no ground truth; pass --no-mse or use a simulated bundle");
  const fs::path out = resolve_out(config.out_dir, config.bundle);
  ensure_dir(out);

  const auto spec = stft::analyze(scene.mixture, scene.config);
  const auto noise = pipeline::fit_noise_model(spec, pipeline::resolve_noise_frames(scene, config.options),
                                               config.options.loading);
  const std::string name = pipeline::to_string(config.method);
  const auto left = pipeline::estimate_rtf(config.method, spec, noise, Side::left, &scene.truth, config.options);
  const auto right = pipeline::estimate_rtf(config.method, spec, noise, Side::right, &scene.truth, config.options);
  tensor_io::save_rtf(out / fmt::format("rtf_{}_left.bdt", name), left, scene.config);
  tensor_io::save_rtf(out / fmt::format("rtf_{}_right.bdt", name), right, scene.config);

  if (!config.compute_mse) return std::nullopt;
  EstimateResult result;
  result.mse_left = rtf::rtf_mse(left, scene.truth.rtf_left, &scene.truth.speech_active);
  result.mse_right = rtf::rtf_mse(right, scene.truth.rtf_right, &scene.truth.speech_active);
  write_mse_csv(out, name, result.mse_left, result.mse_right);
  return result;
}

metrics::EvalReport cmd_beamform(const BeamformConfig& config) {
  const auto scene = load_bundle(config.bundle);
  if (!has_truth(scene)) throw ConfigError("beamform needs a bundle with ground truth for scoring");
  const fs::path out = resolve_out(config.out_dir, config.bundle);
  ensure_dir(out);

  const auto result = pipeline::run_method(scene, config.method, config.options);
  const std::string name = pipeline::to_string(config.method);
  wav::write(out / fmt::format("enhanced_{}.wav", name), {result.left.enhanced, result.right.enhanced},
             scene.scenario.sample_rate_hz);
  write_text(out / fmt::format("eval_{}.json", name), metrics::to_json(result.report) + "\n");

  ResultsTable table(resolve_out(config.results_csv, out / "results.csv"));
  table.put(result.report);
  table.flush();
  return result.report;
}

BeampatternResult cmd_beampattern(const BeampatternConfig& config) {
  if (config.options.grid_step_deg <= 0.0 || config.options.grid_step_deg > 180.0)
    throw ConfigError("--grid-step must be in (0, 180]");
  const auto scene = load_bundle(config.bundle);
  const fs::path out = resolve_out(config.out_dir, config.bundle);
  ensure_dir(out);

  BeampatternResult res;
  beamformer::BeampatternGrid grid;
  const auto angles = beamformer::angle_grid(config.options.grid_step_deg);
  const auto positions = scene.scenario.array.axis_positions();
  if (config.delay_sum_steer_deg) {
    const double steer = *config.delay_sum_steer_deg;
    if (std::abs(steer) > 90.0) throw ConfigError("--steer must be within [-90, 90] degrees");
    const std::size_t frames = scene.config.num_frames(scene.mixture.front().size());
    const auto w = beamformer::delay_and_sum_weights(positions, steer, scene.config, frames,
                                                     scene.scenario.speed_of_sound);
    grid = beamformer::narrowband_beampattern(w, positions, angles, scene.config, scene.scenario.speed_of_sound);
    beamformer::wideband_beampower(grid);
    res.name = "delay-sum";
  } else {
    if (config.method == pipeline::Method::oracle && !has_truth(scene))
      throw ConfigError("oracle beampattern needs a bundle with ground truth");
    auto options = config.options;
    options.beampattern = true;
    auto result = pipeline::run_method(scene, config.method, options);
    grid = std::move(*result.beampattern);
    res.name = pipeline::to_string(config.method);
  }
  if (has_truth(scene)) {
    res.doa = metrics::doa_error(grid, scene.truth.doa_per_frame, scene.truth.speech_active);
    const auto& d = *res.doa;
    const json j = {{"method", res.name},
                    {"mean_error_deg", std::isnan(d.mean_deg) ? json(nullptr) : json(d.mean_deg)},
                    {"frames_used", d.frames_used},
                    {"flat_frames", d.flat_frames},
                    {"fraction_within_10deg", d.fraction_within(10.0)}};
    write_text(out / fmt::format("doa_{}.json", res.name), j.dump(2) + "\n");
  }
  write_beampattern(out, res.name, grid, scene.config, config.narrowband_csv);
  res.angles = grid.angles_deg.size();
  res.frames = grid.frames;
  return res;
}

EvaluateSummary cmd_evaluate(const EvaluateConfig& config) {
  stft::validate(config.stft);
  if (config.seeds.empty() || config.snrs_db.empty() || config.methods.empty())
    throw ConfigError("evaluate needs at least one seed, SNR and method");
  if (config.jobs == 0) throw ConfigError("--jobs must be positive");
  const fs::path root = resolve_out(config.out_dir, default_output_root());
  ensure_dir(root);

  EvaluateSummary summary;
  summary.csv = root / "results.csv";
  ResultsTable table(summary.csv);

  sim::ScenarioOptions scenario_options;
  scenario_options.moving = !config.static_source;
  scenario_options.num_babblers = config.babblers;
  scenario_options.sensor_noise_db = config.sensor_noise_db;

  std::mutex mutex;
  std::size_t next = 0;
  const auto worker = [&] {
    for (;;) {
      std::uint64_t seed = 0;
      std::vector<std::pair<double, pipeline::Method>> todo;
      {
        std::lock_guard lock(mutex);
        if (next >= config.seeds.size()) return;
        seed = config.seeds[next++];
        for (double snr : config.snrs_db)
          for (auto m : config.methods) {
            if (table.completed(ResultsTable::key(seed, snr, m))) {
              ++summary.skipped;
            } else {
              todo.emplace_back(snr, m);
            }
          }
      }
      if (todo.empty()) continue;

      std::vector<metrics::EvalReport> reports;
      std::optional<pipeline::RenderedScene> rendered;
      std::string render_error;
      try {
        rendered = pipeline::render_scene(seed, scenario_options, config.stft);
      } catch (const std::exception& e) {
        render_error = e.what();
      }
      for (const auto& [snr, method] : todo) {
        if (!rendered) {
          reports.push_back(failed_report(seed, snr, method, render_error));
          continue;
        }
        try {
          const auto scene = pipeline::mix_scene(*rendered, snr);
          reports.push_back(pipeline::run_method(scene, method, config.options).report);
        } catch (const std::exception& e) {
          reports.push_back(failed_report(seed, snr, method, e.what()));
        }
      }

      std::lock_guard lock(mutex);
      for (const auto& r : reports) {
        table.put(r);
        if (r.status == "ok") {
          ++summary.computed;
        } else {
          ++summary.failed;
        }
      }
      table.flush();
    }
  };

  const std::size_t n = std::min(config.jobs, config.seeds.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 1; i < n; ++i) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  table.flush();
  return summary;
}

}  // namespace rtfbeam::cli
