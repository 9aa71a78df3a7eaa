// Acceptance suite: prints one PASS/FAIL line per criterion and exits nonzero
// if any fails. Scenario-based criteria use seeds 2000-2019, which were not
// used while choosing defaults.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cli/commands.hpp"
#include "oracles.hpp"
#include "rtfbeam/io_util.hpp"
#include "rtfbeam/pipeline.hpp"

using namespace rtfbeam;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFirstSeed = 2000;
constexpr std::size_t kSeeds = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string join(const std::vector<double>& v, const char* fmt_spec = "{:.2f}") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format(fmt::runtime(fmt_spec), v[i]);
  }
  return out;
}

Outcome past_convergence() {
  const auto t0 = Clock::now();
  std::mt19937_64 g(1);
  double worst = 0.0;
  for (std::size_t m : {2u, 4u, 8u}) {
    const auto mi = static_cast<Eigen::Index>(m);
    for (int trial = 0; trial < 10; ++trial) {
      const CVector a = oracle::random_vector(g, mi);
      auto st = rtf::past_init(m, 1.0);
      for (int l = 0; l < 500; ++l) {
        CVector y = (Complex(oracle::randn(g), oracle::randn(g)) / std::sqrt(2.0)) * a;
        for (Eigen::Index i = 0; i < mi; ++i) y(i) += 0.1 * Complex(oracle::randn(g), oracle::randn(g)) / std::sqrt(2.0);
        rtf::past_update(st, y);
      }
      const CMatrix r = a * a.adjoint() + 0.01 * CMatrix::Identity(mi, mi);
      worst = std::max(worst, oracle::line_angle(st.psi, covariance::hermitian_evd(r).vectors.col(0)));
    }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-2 && t < 1.0, fmt::format("max principal angle {:.2e} rad over M=2,4,8 x 10 trials, {:.3f} s", worst, t)};
}

Outcome whitening_identity() {
  std::mt19937_64 g(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = static_cast<Eigen::Index>(2 + trial % 7);
    const CMatrix phi = oracle::random_spd(g, m);
    const CMatrix w = covariance::hermitian_power(phi, -0.5, 0.0);
    worst = std::max(worst, (w * phi * w.adjoint() - CMatrix::Identity(m, m)).norm());
  }
  return {worst < 1e-8, fmt::format("max ||W Phi W^H - I||_F = {:.2e}", worst)};
}

Outcome distortionless() {
  stft::StftConfig cfg;
  const auto scene = pipeline::mix_scene(pipeline::render_scene(kFirstSeed, {}, cfg), 10.0);
  pipeline::Options opt;
  opt.beampattern = false;
  double worst = 0.0;
  std::size_t cells = 0;
  for (auto method : {pipeline::Method::oracle, pipeline::Method::past, pipeline::Method::cw_batch}) {
    const auto r = pipeline::run_method(scene, method, opt);
    for (const auto* side : {&r.left, &r.right}) {
      const auto& a = *side->rtf;
      for (std::size_t k = 0; k < a.bins(); ++k)
        for (std::size_t l = 0; l < a.frames(); ++l) {
          worst = std::max(worst, std::abs(side->weights.at(k, l).dot(a.at(k, l)) - 1.0));
          ++cells;
        }
    }
  }
  return {worst < 1e-8, fmt::format("max |w^H a - 1| = {:.2e} over {} cells (oracle, past, cw-batch; both sides)", worst, cells)};
}

double mean_rtf_mse(const pipeline::Scene& scene, pipeline::Method method, const pipeline::Options& opt) {
  const auto spec = stft::analyze(scene.mixture, scene.config);
  const auto noise = pipeline::fit_noise_model(spec, pipeline::resolve_noise_frames(scene, opt), opt.loading);
  double sum = 0.0;
  for (Side side : {Side::left, Side::right}) {
    const auto est = pipeline::estimate_rtf(method, spec, noise, side, &scene.truth, opt);
    const auto& truth = side == Side::left ? scene.truth.rtf_left : scene.truth.rtf_right;
    sum += rtf::rtf_mse(est, truth, &scene.truth.speech_active).mean_db;
  }
  return sum / 2.0;
}

Outcome mse_trend() {
  const auto t0 = Clock::now();
  const std::vector<double> snrs{-10.0, 0.0, 10.0, 20.0, 30.0};
  std::vector<double> past(snrs.size(), 0.0), cw(snrs.size(), 0.0);
  stft::StftConfig cfg;
  sim::ScenarioOptions so;
  so.moving = false;
  pipeline::Options opt;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    const auto rendered = pipeline::render_scene(kFirstSeed + s, so, cfg);
    for (std::size_t i = 0; i < snrs.size(); ++i) {
      const auto scene = pipeline::mix_scene(rendered, snrs[i]);
      past[i] += mean_rtf_mse(scene, pipeline::Method::past, opt) / kSeeds;
      cw[i] += mean_rtf_mse(scene, pipeline::Method::cw_batch, opt) / kSeeds;
    }
  }
  const double t = seconds_since(t0);
  bool monotone = true;
  for (std::size_t i = 1; i < snrs.size(); ++i) monotone = monotone && past[i] < past[i - 1];
  const bool accurate = past[2] <= -20.0 && past[3] <= -20.0 && past[4] <= -20.0;
  return {monotone && accurate && t < 300.0,
          fmt::format("PAST beta=0.95 static, SNR -10..30 dB: [{}] dB (monotone {}, <= -20 dB at >= 10 dB {}); "
                      "cw-batch [{}] dB; {:.1f} s",
                      join(past), monotone ? "yes" : "no", accurate ? "yes" : "no", join(cw), t)};
}

Outcome si_sdr_gain(double past_beta) {
  stft::StftConfig cfg;
  pipeline::Options opt;
  opt.beampattern = false;
  double input = 0.0, oracle_out = 0.0, past_out = 0.0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    const auto rendered = pipeline::render_scene(kFirstSeed + s, {}, cfg);
    for (double snr : {3.0, 6.0, 10.0}) {
      const auto scene = pipeline::mix_scene(rendered, snr);
      opt.beta = rtf::kDefaultBeta;
      const auto o = pipeline::run_method(scene, pipeline::Method::oracle, opt).report;
      opt.beta = past_beta;
      const auto p = pipeline::run_method(scene, pipeline::Method::past, opt).report;
      input += (o.si_sdr_input_left + o.si_sdr_input_right) / 2.0;
      oracle_out += (o.si_sdr_left + o.si_sdr_right) / 2.0;
      past_out += (p.si_sdr_left + p.si_sdr_right) / 2.0;
      ++n;
    }
  }
  input /= static_cast<double>(n);
  oracle_out /= static_cast<double>(n);
  past_out /= static_cast<double>(n);
  const double gain = oracle_out - input, gap = oracle_out - past_out;
  return {gain >= 3.0 && gap <= 2.0,
          fmt::format("moving, 3/6/10 dB, {} runs: input {:.2f}, oracle {:.2f} (gain {:.2f}), PAST beta={} {:.2f} "
                      "(gap {:.2f}) dB",
                      n, input, oracle_out, gain, past_beta, past_out, gap)};
}

Outcome beampattern_tracking() {
  stft::StftConfig cfg;
  pipeline::Options opt;
  std::size_t within = 0, used = 0;
  double worst = 1.0;
  for (std::size_t s = 0; s < kSeeds; ++s) {
    const auto scene = pipeline::mix_scene(pipeline::render_scene(kFirstSeed + s, {}, cfg), 10.0);
    const auto r = pipeline::run_method(scene, pipeline::Method::oracle, opt);
    const auto doa = metrics::doa_error(*r.beampattern, scene.truth.doa_per_frame, scene.truth.speech_active);
    std::size_t w = 0;
    for (double e : doa.per_frame_deg)
      if (!std::isnan(e) && e <= 10.0) ++w;
    within += w;
    used += doa.frames_used;
    worst = std::min(worst, doa.fraction_within(10.0));
  }
  const double pooled = static_cast<double>(within) / static_cast<double>(used);
  return {pooled >= 0.8, fmt::format("oracle MVDR, moving, 10 dB: {:.1f}% of {} active frames within 10 deg "
                                     "(worst scene {:.1f}%)",
                                     100.0 * pooled, used, 100.0 * worst)};
}

Outcome si_sdr_invariance() {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 64 + g() % 512;
    std::vector<double> est(n), ref(n);
    for (std::size_t i = 0; i < n; ++i) {
      ref[i] = oracle::randn(g);
      est[i] = ref[i] + 0.5 * oracle::randn(g);
    }
    const double alpha = std::pow(10.0, log_scale(g)) * (g() % 2 ? 1.0 : -1.0);
    std::vector<double> scaled(est);
    for (auto& v : scaled) v *= alpha;
    worst = std::max(worst, std::abs(metrics::si_sdr(scaled, ref) - metrics::si_sdr(est, ref)));
  }
  return {worst < 1e-9, fmt::format("max |delta| = {:.2e} dB over 1000 triples", worst)};
}

Outcome op_count_linearity() {
  const std::vector<double> ms{2, 4, 8, 16};
  std::vector<double> ops;
  for (double m : ms) {
    auto st = rtf::past_init(static_cast<std::size_t>(m), 0.9);
    rtf::OpCounter c;
    rtf::past_update(st, CVector::Ones(static_cast<Eigen::Index>(m)), &c);
    ops.push_back(static_cast<double>(c.multiply_adds));
  }
  const double mx = std::accumulate(ms.begin(), ms.end(), 0.0) / 4.0;
  const double my = std::accumulate(ops.begin(), ops.end(), 0.0) / 4.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    sxy += (ms[i] - mx) * (ops[i] - my);
    sxx += (ms[i] - mx) * (ms[i] - mx);
  }
  const double slope = sxy / sxx, intercept = my - slope * mx;
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(ops[i] - (slope * ms[i] + intercept)));
  return {worst <= 1.0, fmt::format("ops [{}] for M=2,4,8,16; fit {:.3f} M + {:.3f}, max residual {:.3f}",
                                    join(ops, "{:.0f}"), slope, intercept, worst)};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || io::read_file(e.path()) != io::read_file(other)) return false;
    ++files;
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++count_b;
  return count_b == files;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / fmt::format("rtfbeam_acceptance_{}", std::random_device{}());
  std::size_t files = 0;
  bool same = true;
  for (const char* run : {"a", "b"}) {
    cli::SimulateConfig sc;
    sc.out_dir = root / run / "sim";
    sc.seed = kFirstSeed;
    sc.count = 2;
    cli::cmd_simulate(sc);
    cli::EvaluateConfig ec;
    ec.out_dir = root / run / "eval";
    ec.seeds = {kFirstSeed};
    ec.snrs_db = {3.0, 10.0};
    ec.methods = {pipeline::Method::cw_batch, pipeline::Method::past, pipeline::Method::oracle, pipeline::Method::none};
    cli::cmd_evaluate(ec);
  }
  same = same_tree(root / "a", root / "b", files);
  fs::remove_all(root);
  return {same && files > 0, fmt::format("{} files compared (2 simulated bundles, 8-row evaluate)", files)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"1 PAST converges to the EVD eigenvector", past_convergence},
      {"2 whitening identity", whitening_identity},
      {"3 MVDR distortionless constraint", distortionless},
      {"4 RTF MSE trend over SNR", mse_trend},
      {"5 SI-SDR gain of oracle/PAST MVDR", [] { return si_sdr_gain(0.7); }},
      {"6 beampattern tracks the speaker", beampattern_tracking},
      {"7 SI-SDR scale invariance", si_sdr_invariance},
      {"8 PAST op count linear in M", op_count_linearity},
      {"9 simulate/evaluate determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    if (!o.pass) ++failed;
    fmt::print("{} | criterion {} | {}\n", o.pass ? "PASS" : "FAIL", c.name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
