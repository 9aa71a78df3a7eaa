#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rtfbeam/beamformer.hpp"

using namespace rtfbeam;
using oracle::cd;

namespace {

rtf::RtfTrajectory random_rtf(std::mt19937_64& g, std::size_t m, std::size_t bins, std::size_t frames, std::size_t ref) {
  rtf::RtfTrajectory t(m, bins, frames, ref, ref == 0 ? Side::left : Side::right);
  for (std::size_t k = 0; k < bins; ++k)
    for (std::size_t l = 0; l < frames; ++l) {
      CVector a = oracle::random_vector(g, static_cast<Eigen::Index>(m));
      a /= a(static_cast<Eigen::Index>(ref));
      a(static_cast<Eigen::Index>(ref)) = 1.0;
      t.values.set_column(k, l, a);
    }
  return t;
}

covariance::HermitianMatrixField random_field(std::mt19937_64& g, std::size_t m, std::size_t bins) {
  covariance::HermitianMatrixField f;
  for (std::size_t k = 0; k < bins; ++k) f.matrices.push_back(oracle::random_spd(g, static_cast<Eigen::Index>(m)));
  return f;
}

}  // namespace

TEST_CASE("MVDR matches the explicit 2x2 inverse") {
  std::mt19937_64 g(1);
  const auto rtf = random_rtf(g, 2, 3, 4, 0);
  const auto phi = random_field(g, 2, 3);
  const auto w = beamformer::mvdr_weights(rtf, phi, 0.0);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 4; ++l) {
      const CVector ref = oracle::mvdr_2x2(phi[k], rtf.at(k, l));
      CHECK((w.at(k, l) - ref).norm() < 1e-10 * ref.norm());
    }
  CHECK(w.passthrough_bins.empty());
}

TEST_CASE("MVDR is distortionless and minimizes output noise power") {
  std::mt19937_64 g(2);
  const auto rtf = random_rtf(g, 6, 4, 3, 5);
  const auto phi = random_field(g, 6, 4);
  const auto w = beamformer::mvdr_weights(rtf, phi);
  CHECK(w.ref_channel == 5);
  CHECK(w.side == Side::right);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t l = 0; l < 3; ++l) {
      const CVector a = rtf.at(k, l), wk = w.at(k, l);
      CHECK(std::abs(wk.dot(a) - 1.0) < 1e-8);
      // Any other distortionless vector has at least the MVDR output power.
      const double p_mvdr = std::real(wk.dot(phi[k] * wk));
      for (int trial = 0; trial < 5; ++trial) {
        CVector v = oracle::random_vector(g, 6);
        v -= a * (a.dot(v) / a.squaredNorm());  // v orthogonal to a, so (wk + v)^H a = 1
        const CVector alt = wk + 0.1 * v;
        CHECK(std::abs(alt.dot(a) - 1.0) < 1e-10);
        CHECK(std::real(alt.dot(phi[k] * alt)) >= p_mvdr * (1.0 - 1e-12));
      }
    }
}

TEST_CASE("invalid cells reuse the previous frame; bins without valid frames pass through") {
  std::mt19937_64 g(3);
  auto rtf = random_rtf(g, 3, 2, 4, 0);
  rtf.set_valid(0, 2, false);
  for (std::size_t l = 0; l < 4; ++l) rtf.set_valid(1, l, false);
  const auto phi = random_field(g, 3, 2);
  const auto w = beamformer::mvdr_weights(rtf, phi);
  CHECK((w.at(0, 2) - w.at(0, 1)).norm() == 0.0);
  CHECK((w.at(0, 3) - w.at(0, 2)).norm() > 0.0);
  REQUIRE(w.passthrough_bins.size() == 1);
  CHECK(w.passthrough_bins[0] == 1);
  for (std::size_t l = 0; l < 4; ++l) CHECK((w.at(1, l) - CVector::Unit(3, 0)).norm() == 0.0);
  CHECK_THROWS_AS(beamformer::mvdr_weights(rtf, random_field(g, 3, 3)), ConfigError);
}

TEST_CASE("passthrough weights reproduce the reference channel") {
  std::mt19937_64 g(4);
  stft::ComplexSpectrogram spec;
  spec.data = Tensor3(4, 5, 6);
  for (auto& v : spec.data.data()) v = cd(oracle::randn(g), oracle::randn(g));
  const auto w = beamformer::passthrough_weights(4, 5, 6, 3, Side::right);
  const auto out = beamformer::apply(w, spec);
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t l = 0; l < 6; ++l) CHECK(out.data(0, k, l) == spec.data(3, k, l));
  CHECK_THROWS_AS(beamformer::passthrough_weights(4, 5, 6, 4, Side::right), ConfigError);
}

TEST_CASE("apply computes w^H y per cell") {
  std::mt19937_64 g(5);
  stft::ComplexSpectrogram spec;
  spec.data = Tensor3(3, 2, 2);
  for (auto& v : spec.data.data()) v = cd(oracle::randn(g), oracle::randn(g));
  beamformer::BeamformerWeights w;
  w.w = Tensor3(3, 2, 2);
  for (auto& v : w.w.data()) v = cd(oracle::randn(g), oracle::randn(g));
  const auto out = beamformer::apply(w, spec);
  for (std::size_t k = 0; k < 2; ++k)
    for (std::size_t l = 0; l < 2; ++l) {
      cd acc = 0.0;
      for (std::size_t m = 0; m < 3; ++m) acc += std::conj(w.w(m, k, l)) * spec.data(m, k, l);
      CHECK(std::abs(out.data(0, k, l) - acc) < 1e-14);
    }
  beamformer::BeamformerWeights wrong;
  wrong.w = Tensor3(2, 2, 2);
  CHECK_THROWS_AS(beamformer::apply(wrong, spec), ConfigError);
}

TEST_CASE("steering vector hand values") {
  stft::StftConfig c;  // 16 kHz, N = 512: bin 32 is 1 kHz
  const std::vector<double> pos{0.0, 0.1};
  const CVector broadside = beamformer::steering_vector(pos, 0.0, 32, c);
  CHECK(std::abs(broadside(1) - 1.0) < 1e-15);
  // theta = 90: the +axis mic is closer, tau_1 = -0.1/343, phase +2 pi 1000 0.1 / 343.
  const CVector endfire = beamformer::steering_vector(pos, 90.0, 32, c, 343.0);
  const double phase = 2.0 * std::numbers::pi * 1000.0 * 0.1 / 343.0;
  CHECK(endfire(0) == cd(1.0, 0.0));
  CHECK(std::abs(endfire(1) - std::polar(1.0, phase)) < 1e-12);
  // Referenced to mic 1, mic 0 lags.
  const CVector right = beamformer::steering_vector(pos, 90.0, 32, c, 343.0, 1);
  CHECK(right(1) == cd(1.0, 0.0));
  CHECK(std::abs(right(0) - std::polar(1.0, -phase)) < 1e-12);
  // DC is all ones.
  CHECK((beamformer::steering_vector(pos, 37.0, 0, c) - CVector::Ones(2)).norm() < 1e-15);
  CHECK_THROWS_AS(beamformer::steering_vector({}, 0.0, 0, c), ConfigError);
  CHECK_THROWS_AS(beamformer::steering_vector(pos, 0.0, 257, c), ConfigError);
  CHECK_THROWS_AS(beamformer::steering_vector(pos, 0.0, 3, c, 0.0), ConfigError);
}

TEST_CASE("angle grid") {
  CHECK(beamformer::angle_grid(1.0).size() == 181);
  const auto g2 = beamformer::angle_grid(2.0);
  CHECK(g2.size() == 91);
  CHECK(g2.front() == -90.0);
  CHECK(g2.back() == 90.0);
  CHECK(beamformer::angle_grid(0.5).size() == 361);
  CHECK(beamformer::angle_grid(7.0).size() == 26);
  CHECK_THROWS_AS(beamformer::angle_grid(0.0), ConfigError);
  CHECK_THROWS_AS(beamformer::angle_grid(1.0, 10.0, -10.0), ConfigError);
}

TEST_CASE("delay-and-sum steered to 30 deg peaks at 30 deg in every frame") {
  stft::StftConfig c;
  std::vector<double> pos;
  for (int m = 0; m < 8; ++m) pos.push_back((m - 3.5) * 0.05);
  const auto w = beamformer::delay_and_sum_weights(pos, 30.0, c, 4);
  for (std::size_t k = 0; k < c.num_bins(); k += 32)
    CHECK(std::abs(w.at(k, 0).dot(beamformer::steering_vector(pos, 30.0, k, c)) - 1.0) < 1e-12);
  auto grid = beamformer::narrowband_beampattern(w, pos, beamformer::angle_grid(1.0), c);
  CHECK(grid.wideband.empty());
  beamformer::wideband_beampower(grid);
  for (std::size_t l = 0; l < 4; ++l) CHECK(grid.angles_deg[beamformer::peak_angle_index(grid, l)] == 30.0);
  // Main-lobe magnitude is exactly one.
  CHECK(grid.magnitude(100, 120, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("narrowband and wideband beampatterns match naive sums") {
  std::mt19937_64 g(6);
  stft::StftConfig c;
  c.window_len = 16;
  c.hop = 8;
  const std::vector<double> pos{-0.05, 0.0, 0.05};
  beamformer::BeamformerWeights w;
  w.w = Tensor3(3, c.num_bins(), 2);
  for (auto& v : w.w.data()) v = cd(oracle::randn(g), oracle::randn(g));
  const auto angles = beamformer::angle_grid(30.0);
  auto grid = beamformer::narrowband_beampattern(w, pos, angles, c);
  beamformer::wideband_beampower(grid);
  for (std::size_t a = 0; a < angles.size(); ++a)
    for (std::size_t l = 0; l < 2; ++l) {
      double p = 0.0;
      for (std::size_t k = 0; k < c.num_bins(); ++k) {
        const CVector h = beamformer::steering_vector(pos, angles[a], k, c);
        const double mag = std::abs(w.at(k, l).dot(h));
        CHECK(grid.magnitude(k, a, l) == doctest::Approx(mag).epsilon(1e-12));
        p += mag * mag;
      }
      CHECK(grid.power(a, l) == doctest::Approx(p).epsilon(1e-12));
    }
  CHECK_THROWS_AS(beamformer::narrowband_beampattern(w, {0.0, 0.1}, angles, c), ConfigError);
  beamformer::BeampatternGrid empty;
  CHECK_THROWS_AS(beamformer::peak_angle_index(empty, 0), ConfigError);
}
