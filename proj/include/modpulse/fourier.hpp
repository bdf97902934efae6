#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace modpulse {

using cplx = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Truncated Fourier series over e^{ikx}, |k| <= K, stored at index k + K.
inline int truncation_of(const cvec& c) { return static_cast<int>((c.size() - 1) / 2); }
inline int basis_size(int K) { return 2 * K + 1; }

/// L^2(0, 2pi) inner product, conjugate-linear in the first slot.
inline cplx inner(const cvec& a, const cvec& b) { return two_pi * a.dot(b); }
inline double l2_norm(const cvec& a) { return std::sqrt(two_pi) * a.norm(); }

/// Coefficients of d/dx.
cvec derivative(const cvec& c);

/// Multiply coefficient k by (k + shift).
cvec times_wavenumber(const cvec& c, double shift = 0.0);

/// Zero-pad or truncate to a new K.
cvec resize(const cvec& c, int K);

/// Coefficients of the complex conjugate function: c_k -> conj(c_{-k}).
cvec conj_function(const cvec& c);

/// Evaluate the series at a single point.
cplx evaluate(const cvec& c, double x);

// Uniform grid on [0, 2pi) with a dense DFT matrix; used for pointwise
// products. P must exceed the total degree of the products formed.
class FourierGrid {
 public:
  FourierGrid(int K, int points);

  int truncation() const { return K_; }
  int points() const { return P_; }
  double node(int j) const { return two_pi * j / P_; }

  cvec to_grid(const cvec& coeffs) const;
  cvec from_grid(const cvec& values) const;
  /// Trapezoidal rule for the integral over one period.
  cplx integrate(const cvec& values) const { return two_pi * values.mean(); }

 private:
  int K_;
  int P_;
  cmat dft_;  // P x (2K+1), entry (j, k) = exp(i k x_j)
};

/// Smallest even grid size that resolves products of total degree `degree`
/// projected back onto |k| <= K without aliasing, and at least `minimum`.
int product_grid_size(int degree, int K, int minimum = 0);

// A 2pi-periodic, even, strictly positive coefficient stored by cosine
// coefficients: value(x) = sum_k a_k cos(k x).
class PeriodicCoefficient {
 public:
  explicit PeriodicCoefficient(std::vector<double> cos_coeffs, std::string label = {});
  static PeriodicCoefficient constant(double value, std::string label = {});

  double operator()(double x) const;
  const std::vector<double>& cos_coeffs() const { return coeffs_; }
  const std::string& label() const { return label_; }
  int highest_harmonic() const { return static_cast<int>(coeffs_.size()) - 1; }
  /// Minimum over the validation grid (the positivity constant).
  double lower_bound() const { return lower_bound_; }
  double upper_bound() const { return upper_bound_; }
  bool is_constant() const { return highest_harmonic() == 0; }

  /// Exponential-basis coefficients rho_hat_k for |k| <= K.
  cvec exponential_coeffs(int K) const;
  /// Samples on a uniform grid x_j = j * spacing.
  std::vector<double> sample(std::span<const double> x) const;

 private:
  std::vector<double> coeffs_;
  std::string label_;
  double lower_bound_ = 0.0;
  double upper_bound_ = 0.0;
};

}  // namespace modpulse
