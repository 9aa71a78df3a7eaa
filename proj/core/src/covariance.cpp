#include "rtfbeam/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "rtfbeam/io_util.hpp"

namespace rtfbeam::covariance {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kJacobiTolerance = 1e-12;

double off_diagonal_norm(const CMatrix& a) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j) sum += std::norm(a(i, j));
  return std::sqrt(sum);
}

void check_square(const CMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ConfigError("covariance: matrix must be square and non-empty");
}

// Applies the unitary U (identity except the (p,q) block
// [[c, s], [-s e^{-i phi}, c e^{-i phi}]]) as A <- U^H A U and V <- V U.
void rotate(CMatrix& a, CMatrix& v, Eigen::Index p, Eigen::Index q, double c, double s, Complex phase) {
  const Complex phase_conj = std::conj(phase);
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex ap = a(i, p), aq = a(i, q);
    a(i, p) = c * ap - s * phase * aq;
    a(i, q) = s * ap + c * phase * aq;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex ap = a(p, j), aq = a(q, j);
    a(p, j) = c * ap - s * phase_conj * aq;
    a(q, j) = s * ap + c * phase_conj * aq;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex vp = v(i, p), vq = v(i, q);
    v(i, p) = c * vp - s * phase * vq;
    v(i, q) = s * vp + c * phase * vq;
  }
}

}  // namespace

double hermitian_defect(const CMatrix& a) {
  check_square(a);
  double worst = 0.0, scale = 1.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - std::conj(a(j, i))));
      scale = std::max(scale, std::abs(a(i, j)));
    }
  }
  return worst / scale;
}

CMatrix hermitian_part(const CMatrix& a) {
  check_square(a);
  CMatrix h = 0.5 * (a + a.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = {h(i, i).real(), 0.0};
  return h;
}

HermitianMatrixField estimate_covariance(const stft::ComplexSpectrogram& spec, std::size_t first, std::size_t last) {
  if (first >= last || last > spec.frames()) throw ConfigError("covariance: empty or out-of-range frame range");
  const auto m = static_cast<Eigen::Index>(spec.channels());
  const double norm = 1.0 / static_cast<double>(last - first);
  HermitianMatrixField field;
  field.matrices.assign(spec.bins(), CMatrix::Zero(m, m));
  for (std::size_t k = 0; k < spec.bins(); ++k) {
    CMatrix& phi = field.matrices[k];
    for (std::size_t l = first; l < last; ++l) {
      const CVector y = spec.data.column(k, l);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i; j < m; ++j) phi(i, j) += y(i) * std::conj(y(j));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      phi(i, i) = {phi(i, i).real() * norm, 0.0};
      for (Eigen::Index j = i + 1; j < m; ++j) {
        phi(i, j) *= norm;
        phi(j, i) = std::conj(phi(i, j));
      }
    }
  }
  return field;
}

HermitianMatrixField estimate_noise_covariance(const stft::ComplexSpectrogram& spec, std::size_t noise_frames) {
  if (noise_frames < 1 || noise_frames > spec.frames())
    throw ConfigError(fmt::format("covariance: noise frame count {} outside [1, {}]", noise_frames, spec.frames()));
  return estimate_covariance(spec, 0, noise_frames);
}

HermitianMatrixField estimate_mixture_covariance(const stft::ComplexSpectrogram& spec, std::size_t noise_frames) {
  if (noise_frames >= spec.frames())
    throw ConfigError(fmt::format("covariance: no mixture frames after {} noise frames", noise_frames));
  return estimate_covariance(spec, noise_frames, spec.frames());
}

EigenDecomposition hermitian_evd(const CMatrix& input) {
  check_square(input);
  if (hermitian_defect(input) > kHermitianTolerance) throw ConfigError("covariance: matrix is not Hermitian");

  const Eigen::Index n = input.rows();
  CMatrix a = hermitian_part(input);
  CMatrix v = CMatrix::Identity(n, n);
  const double scale = a.norm();

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= kJacobiTolerance * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const Complex phase = a(p, q) / mag;
        // Real symmetric Jacobi on [[a_pp, |a_pq|], [|a_pq|, a_qq]].
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        rotate(a, v, p, q, c, s, std::conj(phase));
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = {a(p, p).real(), 0.0};
        a(q, q) = {a(q, q).real(), 0.0};
      }
    }
  }
  if (sweep == kMaxSweeps && off_diagonal_norm(a) > kJacobiTolerance * scale)
    throw NumericalError("covariance: Jacobi eigensolver did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() > a(y, y).real(); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.sweeps = sweep;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    out.values(i) = a(src, src).real();
    out.vectors.col(i) = v.col(src);
  }
  return out;
}

std::vector<EigenDecomposition> hermitian_evd(const HermitianMatrixField& field) {
  std::vector<EigenDecomposition> out;
  out.reserve(field.bins());
  for (const auto& m : field.matrices) out.push_back(hermitian_evd(m));
  return out;
}

CMatrix hermitian_power(const CMatrix& a, double exponent, double loading) {
  if (loading < 0.0) throw ConfigError("covariance: loading must be non-negative");
  check_square(a);
  const auto n = a.rows();
  const double mean_eig = a.trace().real() / static_cast<double>(n);
  const double epsilon = loading * std::abs(mean_eig);

  const auto evd = hermitian_evd(a);
  const double floor = -1e-10 * std::abs(a.trace().real());
  Eigen::VectorXd powered(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lambda = evd.values(i) + epsilon;
    if (exponent < 0.0) {
      if (lambda <= 0.0)
        throw NumericalError("covariance: singular matrix (eigenvalue <= 0 after loading); raise loading or noise frames");
    } else if (lambda < 0.0) {
      if (lambda < floor) throw NumericalError("covariance: matrix is not positive semidefinite");
      lambda = 0.0;
    }
    powered(i) = std::pow(lambda, exponent);
  }
  return hermitian_part(evd.vectors * powered.asDiagonal() * evd.vectors.adjoint());
}

namespace {

HermitianMatrixField map_power(const HermitianMatrixField& field, double exponent, double loading) {
  HermitianMatrixField out;
  out.matrices.reserve(field.bins());
  for (const auto& m : field.matrices) out.matrices.push_back(hermitian_power(m, exponent, loading));
  return out;
}

}  // namespace

HermitianMatrixField inverse_sqrt(const HermitianMatrixField& field, double loading) {
  return map_power(field, -0.5, loading);
}

HermitianMatrixField sqrt_hermitian(const HermitianMatrixField& field, double loading) {
  return map_power(field, 0.5, loading);
}

HermitianMatrixField inverse(const HermitianMatrixField& field, double loading) {
  return map_power(field, -1.0, loading);
}

stft::ComplexSpectrogram whiten(const stft::ComplexSpectrogram& spec, const HermitianMatrixField& w) {
  if (w.bins() != spec.bins() || w.channels() != spec.channels())
    throw ConfigError("covariance: whitening field does not match spectrogram shape");
  stft::ComplexSpectrogram out{Tensor3(spec.channels(), spec.bins(), spec.frames()), spec.config};
  for (std::size_t k = 0; k < spec.bins(); ++k)
    for (std::size_t l = 0; l < spec.frames(); ++l) out.data.set_column(k, l, w[k] * spec.data.column(k, l));
  return out;
}

HermitianMatrixField congruence(const HermitianMatrixField& w, const HermitianMatrixField& phi) {
  if (w.bins() != phi.bins() || w.channels() != phi.channels())
    throw ConfigError("covariance: field shapes differ");
  HermitianMatrixField out;
  out.matrices.reserve(phi.bins());
  for (std::size_t k = 0; k < phi.bins(); ++k) out.matrices.push_back(hermitian_part(w[k] * phi[k] * w[k].adjoint()));
  return out;
}

void write_eigenvalue_csv(const std::filesystem::path& path, const std::vector<EigenDecomposition>& evds) {
  std::string out = "k,index,eigenvalue\n";
  for (std::size_t k = 0; k < evds.size(); ++k)
    for (Eigen::Index i = 0; i < evds[k].values.size(); ++i)
      out += fmt::format("{},{},{:.12e}\n", k, i, evds[k].values(i));
  io::write_atomic(path, out);
}

}  // namespace rtfbeam::covariance
