#include "modpulse/fourier.hpp"

#include "modpulse/errors.hpp"

#include <algorithm>
#include <cmath>

namespace modpulse {

cvec derivative(const cvec& c) {
  const int K = truncation_of(c);
  cvec d(c.size());
  for (int k = -K; k <= K; ++k) d(k + K) = I * static_cast<double>(k) * c(k + K);
  return d;
}

cvec times_wavenumber(const cvec& c, double shift) {
  const int K = truncation_of(c);
  cvec d(c.size());
  for (int k = -K; k <= K; ++k) d(k + K) = (k + shift) * c(k + K);
  return d;
}

cvec resize(const cvec& c, int K) {
  const int K0 = truncation_of(c);
  cvec out = cvec::Zero(basis_size(K));
  const int lim = std::min(K, K0);
  for (int k = -lim; k <= lim; ++k) out(k + K) = c(k + K0);
  return out;
}

cvec conj_function(const cvec& c) { return c.reverse().conjugate(); }

cplx evaluate(const cvec& c, double x) {
  const int K = truncation_of(c);
  cplx s = 0.0;
  for (int k = -K; k <= K; ++k) s += c(k + K) * std::exp(I * (k * x));
  return s;
}

FourierGrid::FourierGrid(int K, int points) : K_(K), P_(points), dft_(points, basis_size(K)) {
  if (K < 0 || points < 1) throw ConfigError("FourierGrid: invalid size");
  for (int j = 0; j < P_; ++j) {
    const double x = node(j);
    for (int k = -K_; k <= K_; ++k) dft_(j, k + K_) = std::exp(I * (k * x));
  }
}

cvec FourierGrid::to_grid(const cvec& coeffs) const {
  if (coeffs.size() != dft_.cols()) return dft_ * resize(coeffs, K_);
  return dft_ * coeffs;
}

cvec FourierGrid::from_grid(const cvec& values) const {
  return dft_.adjoint() * values / static_cast<double>(P_);
}

int product_grid_size(int degree, int K, int minimum) {
  // A product of total degree D has modes up to D*K; projecting onto |k| <= K
  // is alias-free when P > (D+1)K.
  int p = (degree + 1) * K + 1;
  p = std::max(p, minimum);
  if (p % 2) ++p;
  return p;
}

PeriodicCoefficient::PeriodicCoefficient(std::vector<double> cos_coeffs, std::string label)
    : coeffs_(std::move(cos_coeffs)), label_(std::move(label)) {
  if (coeffs_.empty()) throw ConfigError("coefficient '" + label_ + "' has no cosine coefficients");
  for (double a : coeffs_)
    if (!std::isfinite(a)) throw ConfigError("coefficient '" + label_ + "' is not finite");
  lower_bound_ = (*this)(0.0);
  upper_bound_ = lower_bound_;
  constexpr int samples = 1024;
  for (int j = 1; j < samples; ++j) {
    const double v = (*this)(two_pi * j / samples);
    lower_bound_ = std::min(lower_bound_, v);
    upper_bound_ = std::max(upper_bound_, v);
  }
  if (!(lower_bound_ > 0.0))
    throw ConfigError("coefficient '" + label_ + "' is not strictly positive (min " +
                      std::to_string(lower_bound_) + ")");
}

PeriodicCoefficient PeriodicCoefficient::constant(double value, std::string label) {
  return PeriodicCoefficient({value}, std::move(label));
}

double PeriodicCoefficient::operator()(double x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) s += coeffs_[k] * std::cos(static_cast<double>(k) * x);
  return s;
}

cvec PeriodicCoefficient::exponential_coeffs(int K) const {
  cvec out = cvec::Zero(basis_size(K));
  out(K) = coeffs_[0];
  const int lim = std::min(K, highest_harmonic());
  for (int k = 1; k <= lim; ++k) {
    out(K + k) = 0.5 * coeffs_[k];
    out(K - k) = 0.5 * coeffs_[k];
  }
  return out;
}

std::vector<double> PeriodicCoefficient::sample(std::span<const double> x) const {
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [this](double xi) { return (*this)(xi); });
  return out;
}

}  // namespace modpulse
