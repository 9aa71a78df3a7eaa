#include <random>

#include <benchmark/benchmark.h>

#include "rtfbeam/beamformer.hpp"
#include "rtfbeam/covariance.hpp"
#include "rtfbeam/rtf.hpp"
#include "rtfbeam/stft.hpp"

using namespace rtfbeam;

namespace {

CVector random_vector(std::mt19937_64& g, Eigen::Index m) {
  std::normal_distribution<double> n;
  CVector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = Complex(n(g), n(g));
  return v;
}

CMatrix random_spd(std::mt19937_64& g, Eigen::Index m) {
  CMatrix a(m, m);
  for (Eigen::Index j = 0; j < m; ++j) a.col(j) = random_vector(g, m);
  return a * a.adjoint() + 0.1 * CMatrix::Identity(m, m);
}

void BM_PastUpdate(benchmark::State& state) {
  const auto m = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 g(1);
  auto st = rtf::past_init(static_cast<std::size_t>(m), 0.95);
  std::vector<CVector> ys;
  for (int i = 0; i < 256; ++i) ys.push_back(random_vector(g, m));
  std::size_t i = 0;
  for (auto _ : state) {
    rtf::past_update(st, ys[i++ & 255]);
    benchmark::DoNotOptimize(st.psi.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PastUpdate)->RangeMultiplier(2)->Range(2, 32)->Complexity(benchmark::oN);

void BM_HermitianEvd(benchmark::State& state) {
  std::mt19937_64 g(2);
  const CMatrix a = random_spd(g, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(covariance::hermitian_evd(a));
}
BENCHMARK(BM_HermitianEvd)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_InverseSqrt(benchmark::State& state) {
  std::mt19937_64 g(3);
  covariance::HermitianMatrixField f;
  for (int k = 0; k < 257; ++k) f.matrices.push_back(random_spd(g, 8));
  for (auto _ : state) benchmark::DoNotOptimize(covariance::inverse_sqrt(f));
}
BENCHMARK(BM_InverseSqrt)->Unit(benchmark::kMillisecond);

void BM_StftAnalyze(benchmark::State& state) {
  std::mt19937_64 g(4);
  std::normal_distribution<double> n;
  Signal x(8, std::vector<double>(64000));
  for (auto& ch : x)
    for (auto& v : ch) v = n(g);
  stft::StftConfig c;
  for (auto _ : state) benchmark::DoNotOptimize(stft::analyze(x, c));
  state.SetItemsProcessed(state.iterations() * 8 * 64000);
}
BENCHMARK(BM_StftAnalyze)->Unit(benchmark::kMillisecond);

void BM_TrackPast(benchmark::State& state) {
  std::mt19937_64 g(5);
  stft::ComplexSpectrogram w;
  w.data = Tensor3(8, 257, 250);
  std::normal_distribution<double> n;
  for (auto& v : w.data.data()) v = Complex(n(g), n(g));
  covariance::HermitianMatrixField s;
  for (int k = 0; k < 257; ++k) s.matrices.push_back(random_spd(g, 8));
  for (auto _ : state) benchmark::DoNotOptimize(rtf::track_rtf_past(w, s, 0, Side::left));
}
BENCHMARK(BM_TrackPast)->Unit(benchmark::kMillisecond);

void BM_MvdrWeights(benchmark::State& state) {
  std::mt19937_64 g(6);
  rtf::RtfTrajectory a(8, 257, 250, 0, Side::left);
  std::normal_distribution<double> n;
  for (auto& v : a.values.data()) v = Complex(n(g), n(g));
  for (std::size_t k = 0; k < 257; ++k)
    for (std::size_t l = 0; l < 250; ++l) a.values(0, k, l) = 1.0;
  covariance::HermitianMatrixField phi;
  for (int k = 0; k < 257; ++k) phi.matrices.push_back(random_spd(g, 8));
  for (auto _ : state) benchmark::DoNotOptimize(beamformer::mvdr_weights(a, phi));
}
BENCHMARK(BM_MvdrWeights)->Unit(benchmark::kMillisecond);

void BM_Beampattern(benchmark::State& state) {
  const std::vector<double> positions{-0.175, -0.125, -0.075, -0.025, 0.025, 0.075, 0.125, 0.175};
  const stft::StftConfig c;
  const auto w = beamformer::delay_and_sum_weights(positions, 30.0, c, 50);
  const auto grid = beamformer::angle_grid(1.0);
  for (auto _ : state) {
    auto bp = beamformer::narrowband_beampattern(w, positions, grid, c);
    beamformer::wideband_beampower(bp);
    benchmark::DoNotOptimize(bp.wideband.data());
  }
}
BENCHMARK(BM_Beampattern)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
