#pragma once

// Reference implementations used as test oracles. They are deliberately
// naive (direct sums, power iteration, closed forms) and share no code with
// the library beyond the basic types.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(0x5EED);
  return g;
}

inline double randn(std::mt19937_64& g) { return std::normal_distribution<double>(0.0, 1.0)(g); }

inline Vec random_vector(std::mt19937_64& g, Eigen::Index m) {
  Vec v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = cd(randn(g), randn(g));
  return v;
}

inline Mat random_matrix(std::mt19937_64& g, Eigen::Index m) {
  Mat a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = cd(randn(g), randn(g));
  return a;
}

// B B^H + shift I, Hermitian positive definite.
inline Mat random_spd(std::mt19937_64& g, Eigen::Index m, double shift = 0.1) {
  const Mat b = random_matrix(g, m);
  Mat a = b * b.adjoint() + shift * Mat::Identity(m, m);
  return 0.5 * (a + a.adjoint());
}

// X[k] = sum_n x[n] w[n] exp(-j 2 pi k n / N), k = 0..N/2.
inline std::vector<cd> direct_dft(const std::vector<double>& frame, const std::vector<double>& window) {
  const std::size_t n = frame.size();
  std::vector<cd> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    cd acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += frame[t] * window[t] *
             std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
    out[k] = acc;
  }
  return out;
}

// Dominant eigenpair by power iteration.
inline std::pair<double, Vec> power_method(const Mat& a, int iterations = 5000) {
  Vec v = Vec::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  v(0) += cd(0.3, 0.1);
  v.normalize();
  double lambda = 0.0;
  for (int i = 0; i < iterations; ++i) {
    Vec w = a * v;
    lambda = std::real(v.dot(w));
    v = w.normalized();
  }
  return {lambda, v};
}

// All eigenvalues (descending) by power iteration with Hotelling deflation.
// Shifts by the Gershgorin bound so every eigenvalue is positive first.
inline std::vector<double> eigenvalues_by_deflation(const Mat& a) {
  double bound = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) bound = std::max(bound, a.row(i).cwiseAbs().sum());
  Mat b = a + bound * Mat::Identity(a.rows(), a.rows());
  std::vector<double> values;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    auto [lambda, v] = power_method(b, 20000);
    values.push_back(lambda - bound);
    b -= lambda * v * v.adjoint();
  }
  return values;
}

// M = 2 MVDR by explicit 2x2 inverse: w = R^-1 a / (a^H R^-1 a).
inline Vec mvdr_2x2(const Mat& r, const Vec& a) {
  const cd det = r(0, 0) * r(1, 1) - r(0, 1) * r(1, 0);
  Mat inv(2, 2);
  inv << r(1, 1), -r(0, 1), -r(1, 0), r(0, 0);
  inv /= det;
  const Vec u = inv * a;
  const cd q = a.dot(u);  // a^H u
  return u / std::conj(q);
}

// Principal angle between two complex lines.
inline double line_angle(const Vec& a, const Vec& b) {
  const double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::acos(std::min(1.0, c));
}

inline double si_sdr_closed_form(const std::vector<double>& est, const std::vector<double>& ref) {
  double rr = 0.0, er = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    rr += ref[i] * ref[i];
    er += est[i] * ref[i];
  }
  const double alpha = er / rr;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    num += alpha * ref[i] * alpha * ref[i];
    den += (est[i] - alpha * ref[i]) * (est[i] - alpha * ref[i]);
  }
  return 10.0 * std::log10(num / den);
}

}  // namespace oracle
