#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "rtfbeam/common.hpp"
#include "rtfbeam/stft.hpp"

namespace rtfbeam::covariance {

inline constexpr double kDefaultLoading = 1e-6;
inline constexpr double kHermitianTolerance = 1e-12;

// One M x M Hermitian matrix per frequency bin.
struct HermitianMatrixField {
  std::vector<CMatrix> matrices;

  std::size_t bins() const { return matrices.size(); }
  std::size_t channels() const { return matrices.empty() ? 0 : static_cast<std::size_t>(matrices.front().rows()); }
  const CMatrix& operator[](std::size_t k) const { return matrices[k]; }
  CMatrix& operator[](std::size_t k) { return matrices[k]; }
};

struct EigenDecomposition {
  Eigen::VectorXd values;  // descending
  CMatrix vectors;         // orthonormal columns, column i pairs with values(i)
  int sweeps = 0;
};

// Largest entrywise |A - A^H|, relative to max(1, max |A_ij|).
double hermitian_defect(const CMatrix& a);

// (A + A^H) / 2 with an exactly real diagonal.
CMatrix hermitian_part(const CMatrix& a);

// Sample covariance (1/n) sum_l y(l,k) y(l,k)^H over frames [first, last).
// Only the upper triangle is accumulated and mirrored, so the result is
// exactly Hermitian.
HermitianMatrixField estimate_covariance(const stft::ComplexSpectrogram& spec, std::size_t first, std::size_t last);

// Frames [0, noise_frames).
HermitianMatrixField estimate_noise_covariance(const stft::ComplexSpectrogram& spec, std::size_t noise_frames);

// Frames [noise_frames, L).
HermitianMatrixField estimate_mixture_covariance(const stft::ComplexSpectrogram& spec, std::size_t noise_frames);

// Cyclic Jacobi eigensolver for a Hermitian matrix.
EigenDecomposition hermitian_evd(const CMatrix& a);
std::vector<EigenDecomposition> hermitian_evd(const HermitianMatrixField& field);

// (A + loading * trace(A)/M * I)^p evaluated through the EVD. Negative
// exponents throw NumericalError if a loaded eigenvalue is not positive.
CMatrix hermitian_power(const CMatrix& a, double exponent, double loading);

HermitianMatrixField inverse_sqrt(const HermitianMatrixField& field, double loading = kDefaultLoading);

// Hermitian square root V diag(sqrt(lambda)) V^H; with the same loading it is
// the exact inverse of inverse_sqrt.
HermitianMatrixField sqrt_hermitian(const HermitianMatrixField& field, double loading = 0.0);

HermitianMatrixField inverse(const HermitianMatrixField& field, double loading = kDefaultLoading);

// y_w(l,k) = W(k) y(l,k).
stft::ComplexSpectrogram whiten(const stft::ComplexSpectrogram& spec, const HermitianMatrixField& w);

// W(k) Phi(k) W(k)^H per bin, made exactly Hermitian.
HermitianMatrixField congruence(const HermitianMatrixField& w, const HermitianMatrixField& phi);

// Diagnostics: one row per (bin, eigenvalue index).
void write_eigenvalue_csv(const std::filesystem::path& path, const std::vector<EigenDecomposition>& evds);

}  // namespace rtfbeam::covariance
