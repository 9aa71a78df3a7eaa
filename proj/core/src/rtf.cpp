#include "rtfbeam/rtf.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace rtfbeam::rtf {

std::optional<CVector> normalize_rtf(const CMatrix& phi_nn_sqrt, const CVector& psi, std::size_t ref) {
  if (ref >= static_cast<std::size_t>(psi.size())) throw ConfigError("rtf: reference channel out of range");
  CVector a = phi_nn_sqrt * psi;
  const Complex denom = a(static_cast<Eigen::Index>(ref));
  if (!(std::abs(denom) >= kDenominatorFloor)) return std::nullopt;
  a /= denom;
  a(static_cast<Eigen::Index>(ref)) = Complex{1.0, 0.0};
  if (!a.allFinite()) return std::nullopt;
  return a;
}

CwEstimate estimate_rtf_cw(const covariance::HermitianMatrixField& phi_nn_sqrt,
                           const covariance::HermitianMatrixField& phi_ww, std::size_t ref) {
  if (phi_nn_sqrt.bins() != phi_ww.bins() || phi_nn_sqrt.channels() != phi_ww.channels())
    throw ConfigError("rtf: covariance fields differ in shape");
  if (ref >= phi_ww.channels()) throw ConfigError("rtf: reference channel out of range");

  const auto m = static_cast<Eigen::Index>(phi_ww.channels());
  CwEstimate out;
  out.rtf.reserve(phi_ww.bins());
  out.valid.reserve(phi_ww.bins());
  for (std::size_t k = 0; k < phi_ww.bins(); ++k) {
    const auto evd = covariance::hermitian_evd(phi_ww[k]);
    const auto a = normalize_rtf(phi_nn_sqrt[k], evd.vectors.col(0), ref);
    if (a) {
      out.rtf.push_back(*a);
      out.valid.push_back(1);
    } else {
      CVector trivial = CVector::Zero(m);
      trivial(static_cast<Eigen::Index>(ref)) = 1.0;
      out.rtf.push_back(trivial);
      out.valid.push_back(0);
    }
  }
  return out;
}

RtfTrajectory to_trajectory(const CwEstimate& estimate, std::size_t frames, std::size_t ref, Side side) {
  const std::size_t bins = estimate.rtf.size();
  const std::size_t channels = bins == 0 ? 0 : static_cast<std::size_t>(estimate.rtf.front().size());
  RtfTrajectory out(channels, bins, frames, ref, side);
  for (std::size_t k = 0; k < bins; ++k) {
    for (std::size_t l = 0; l < frames; ++l) {
      out.values.set_column(k, l, estimate.rtf[k]);
      out.set_valid(k, l, estimate.valid[k] != 0);
    }
  }
  return out;
}

PastState past_init(std::size_t channels, double beta, double delta0, std::optional<CVector> psi0, std::size_t ref) {
  if (channels == 0) throw ConfigError("rtf: PAST needs at least one channel");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError(fmt::format("rtf: forgetting factor {} outside (0, 1]", beta));
  if (!(delta0 > 0.0)) throw ConfigError("rtf: initial delta must be positive");
  if (ref >= channels) throw ConfigError("rtf: reference channel out of range");

  PastState state;
  state.beta = beta;
  state.delta = delta0;
  if (psi0) {
    if (static_cast<std::size_t>(psi0->size()) != channels) throw ConfigError("rtf: psi0 has wrong length");
    state.psi = *psi0;
  } else {
    state.psi = CVector::Zero(static_cast<Eigen::Index>(channels));
    state.psi(static_cast<Eigen::Index>(ref)) = 1.0;
  }
  return state;
}

void past_update(PastState& state, const CVector& y_w, OpCounter* counter) {
  const Eigen::Index m = state.psi.size();
  if (y_w.size() != m) throw ConfigError("rtf: observation length differs from tracker size");
  if (!y_w.allFinite()) throw NumericalError("rtf: non-finite observation");

  Complex alpha{0.0, 0.0};
  for (Eigen::Index i = 0; i < m; ++i) alpha += std::conj(state.psi(i)) * y_w(i);

  state.delta = state.beta * state.delta + std::norm(alpha);

  CVector e(m);
  for (Eigen::Index i = 0; i < m; ++i) e(i) = y_w(i) - state.psi(i) * alpha;

  // delta > 0 is guaranteed while delta0 > 0 and beta > 0.
  const Complex gain = std::conj(alpha) / state.delta;
  for (Eigen::Index i = 0; i < m; ++i) state.psi(i) += e(i) * gain;

  if (counter) counter->multiply_adds += 3 * static_cast<std::size_t>(m) + 2;
}

RtfTrajectory track_rtf_past(const stft::ComplexSpectrogram& whitened,
                             const covariance::HermitianMatrixField& phi_nn_sqrt, std::size_t ref, Side side,
                             const PastOptions& options) {
  const std::size_t channels = whitened.channels();
  const std::size_t bins = whitened.bins();
  const std::size_t frames = whitened.frames();
  if (phi_nn_sqrt.bins() != bins || phi_nn_sqrt.channels() != channels)
    throw ConfigError("rtf: de-whitening field does not match spectrogram");
  if (ref >= channels) throw ConfigError("rtf: reference channel out of range");

  RtfTrajectory out(channels, bins, frames, ref, side);
  CVector trivial = CVector::Zero(static_cast<Eigen::Index>(channels));
  trivial(static_cast<Eigen::Index>(ref)) = 1.0;

  for (std::size_t k = 0; k < bins; ++k) {
    auto state = past_init(channels, options.beta, options.delta0, std::nullopt, ref);
    CVector held = trivial;
    for (std::size_t l = 0; l < frames; ++l) {
      past_update(state, whitened.data.column(k, l));
      if (auto a = normalize_rtf(phi_nn_sqrt[k], state.psi, ref)) {
        held = *a;
        out.set_valid(k, l, true);
      } else {
        out.set_valid(k, l, false);
      }
      out.values.set_column(k, l, held);
    }
  }
  return out;
}

MseResult rtf_mse(const RtfTrajectory& estimate, const RtfTrajectory& truth,
                  const std::vector<std::uint8_t>* frame_mask) {
  if (!estimate.values.same_shape(truth.values)) throw ConfigError("rtf: trajectory shapes differ");
  if (estimate.ref_channel != truth.ref_channel) throw ConfigError("rtf: reference channels differ");
  if (frame_mask && frame_mask->size() != estimate.frames()) throw ConfigError("rtf: frame mask length mismatch");

  const auto to_db = [](double v) { return v > 0.0 ? std::max(kMseFloorDb, 10.0 * std::log10(v)) : kMseFloorDb; };

  MseResult out;
  out.per_frame_db.assign(estimate.frames(), std::numeric_limits<double>::quiet_NaN());
  double sum_frames = 0.0, sum_frames_db = 0.0;
  std::size_t used_frames = 0;
  for (std::size_t l = 0; l < estimate.frames(); ++l) {
    if (frame_mask && (*frame_mask)[l] == 0) continue;
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t k = 0; k < estimate.bins(); ++k) {
      if (!estimate.is_valid(k, l) || !truth.is_valid(k, l)) continue;
      const CVector a = truth.at(k, l);
      const double norm = a.squaredNorm();
      if (norm == 0.0) continue;
      sum += (estimate.at(k, l) - a).squaredNorm() / norm;
      ++cells;
    }
    if (cells == 0) continue;
    const double frame_mse = sum / static_cast<double>(cells);
    out.per_frame_db[l] = to_db(frame_mse);
    sum_frames += frame_mse;
    sum_frames_db += out.per_frame_db[l];
    ++used_frames;
    out.cells += cells;
  }
  if (used_frames == 0) throw NumericalError("rtf: no usable cells for MSE");
  out.mean_db = sum_frames_db / static_cast<double>(used_frames);
  out.pooled_db = to_db(sum_frames / static_cast<double>(used_frames));
  return out;
}

}  // namespace rtfbeam::rtf
