#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rtfbeam/common.hpp"
#include "rtfbeam/covariance.hpp"
#include "rtfbeam/stft.hpp"

namespace rtfbeam::rtf {

inline constexpr double kDefaultBeta = 0.95;
inline constexpr double kDenominatorFloor = 1e-12;
inline constexpr double kMseFloorDb = -120.0;

// Per-bin, per-frame RTF vectors a(l,k) with a(ref) == 1 in every valid cell.
struct RtfTrajectory {
  Tensor3 values;              // (m, k, l)
  std::vector<std::uint8_t> valid;  // (k, l) row-major, 1 = valid
  std::size_t ref_channel = 0;
  Side side = Side::left;

  RtfTrajectory() = default;
  RtfTrajectory(std::size_t channels, std::size_t bins, std::size_t frames, std::size_t ref, Side s)
      : values(channels, bins, frames), valid(bins * frames, 1), ref_channel(ref), side(s) {}

  std::size_t channels() const { return values.dim0(); }
  std::size_t bins() const { return values.dim1(); }
  std::size_t frames() const { return values.dim2(); }
  bool is_valid(std::size_t k, std::size_t l) const { return valid[k * frames() + l] != 0; }
  void set_valid(std::size_t k, std::size_t l, bool v) { valid[k * frames() + l] = v ? 1 : 0; }
  CVector at(std::size_t k, std::size_t l) const { return values.column(k, l); }
};

// e_ref^T-normalized de-whitening: (S psi) / (S psi)[ref]. Returns nullopt
// when the reference entry is below kDenominatorFloor in magnitude.
std::optional<CVector> normalize_rtf(const CMatrix& phi_nn_sqrt, const CVector& psi, std::size_t ref);

struct CwEstimate {
  std::vector<CVector> rtf;          // per bin
  std::vector<std::uint8_t> valid;   // per bin
};

// Batch covariance-whitening estimate from the principal eigenvector of the
// whitened mixture covariance.
CwEstimate estimate_rtf_cw(const covariance::HermitianMatrixField& phi_nn_sqrt,
                           const covariance::HermitianMatrixField& phi_ww, std::size_t ref);

// Repeats a per-bin estimate over `frames` frames.
RtfTrajectory to_trajectory(const CwEstimate& estimate, std::size_t frames, std::size_t ref, Side side);

// Recursive principal-eigenvector tracker state for one frequency bin.
struct PastState {
  CVector psi;
  double delta = 1.0;
  double beta = kDefaultBeta;
};

// Complex multiply-adds performed by past_update, for complexity checks.
struct OpCounter {
  std::size_t multiply_adds = 0;
};

// psi0 defaults to e_ref.
PastState past_init(std::size_t channels, double beta, double delta0 = 1.0,
                    std::optional<CVector> psi0 = std::nullopt, std::size_t ref = 0);

// One projection-approximation step:
//   alpha = psi^H y_w
//   delta = beta * delta + |alpha|^2
//   e     = y_w - psi * alpha
//   psi   = psi + e * conj(alpha) / delta
// psi is not renormalized.
void past_update(PastState& state, const CVector& y_w, OpCounter* counter = nullptr);

struct PastOptions {
  double beta = kDefaultBeta;
  double delta0 = 1.0;
};

// Causal tracking over a whitened spectrogram with one tracker per bin; cells
// whose normalization fails hold the previous frame's value and are flagged.
RtfTrajectory track_rtf_past(const stft::ComplexSpectrogram& whitened,
                             const covariance::HermitianMatrixField& phi_nn_sqrt, std::size_t ref, Side side,
                             const PastOptions& options = {});

struct MseResult {
  double mean_db = kMseFloorDb;    // mean of per-frame dB values
  double pooled_db = kMseFloorDb;  // per-frame linear values averaged, then dB
  std::vector<double> per_frame_db;  // NaN for frames without usable cells
  std::size_t cells = 0;
};

// Normalized MSE ||a_hat - a||^2 / ||a||^2 per (k,l) cell, averaged over
// bins within a frame and converted to dB (floor -120 dB); mean_db averages
// those frame values across time.
// Frames outside `frame_mask` (if given) and cells flagged invalid in the
// estimate or with zero-norm truth are excluded.
MseResult rtf_mse(const RtfTrajectory& estimate, const RtfTrajectory& truth,
                  const std::vector<std::uint8_t>* frame_mask = nullptr);

}  // namespace rtfbeam::rtf
