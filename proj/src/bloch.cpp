#include "modpulse/bloch.hpp"

#include "modpulse/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace modpulse {

cmat assemble_bloch_matrix(const PeriodicCoefficient& rho, double l, int K) {
  if (K < 1) throw ConfigError("Bloch truncation K must be >= 1");
  if (rho.highest_harmonic() > 2 * K)
    throw ConfigError("Bloch truncation K too small for the coefficient's harmonics (aliasing)");
  const int n = basis_size(K);
  const cvec rh = rho.exponential_coeffs(2 * K);
  cmat H(n, n);
  for (int j = -K; j <= K; ++j)
    for (int k = -K; k <= K; ++k) H(j + K, k + K) = rh(j - k + 2 * K);
  for (int k = -K; k <= K; ++k) H(k + K, k + K) += (k + l) * (k + l);
  return H;
}

void apply_gauge(cvec& f_hat) {
  Eigen::Index imax = 0;
  f_hat.cwiseAbs().maxCoeff(&imax);
  const cplx c = f_hat(imax);
  if (std::abs(c) == 0.0) return;
  f_hat *= std::conj(c) / std::abs(c);
  f_hat(imax) = std::abs(f_hat(imax));
}

std::vector<Band> solve_bands(const cmat& matrix) {
  Eigen::SelfAdjointEigenSolver<cmat> es(matrix);
  if (es.info() != Eigen::Success) throw ConvergenceError("Bloch eigensolver did not converge");
  std::vector<Band> out;
  out.reserve(matrix.rows());
  const double scale = 1.0 / std::sqrt(two_pi);
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const double ev = es.eigenvalues()(i);
    if (ev <= 0.0) throw NumericalError("Bloch eigenvalue is not positive");
    Band b;
    b.omega = std::sqrt(ev);
    b.f_hat = es.eigenvectors().col(i) * scale;
    apply_gauge(b.f_hat);
    out.push_back(std::move(b));
  }
  return out;
}

double reduce_to_zone(double l) {
  double r = l - std::floor(l + 0.5);
  if (r <= -0.5) r += 1.0;
  return r;
}

double group_velocity(const BlochPoint& p) {
  const cvec kf = times_wavenumber(p.f_hat, p.l);
  return two_pi * p.f_hat.dot(kf).real() / p.omega;
}

namespace {

cvec dl_rhs(const BlochPoint& p) {
  return 2.0 * p.omega * p.cg * p.f_hat - 2.0 * times_wavenumber(p.f_hat, p.l);
}

}  // namespace

cvec dl_eigenfunction(const PeriodicCoefficient& rho, const BlochPoint& p) {
  const int K = p.truncation();
  const int n = basis_size(K);
  cmat B = cmat::Zero(n + 1, n + 1);
  B.topLeftCorner(n, n) = assemble_bloch_matrix(rho, p.l, K);
  B.topLeftCorner(n, n).diagonal().array() -= p.omega * p.omega;
  B.block(0, n, n, 1) = p.f_hat;
  B.block(n, 0, 1, n) = p.f_hat.adjoint();
  cvec rhs = cvec::Zero(n + 1);
  rhs.head(n) = dl_rhs(p);
  Eigen::FullPivLU<cmat> lu(B);
  if (lu.rank() < n + 1) throw DegeneracyError("bordered system for d_l f is singular");
  const cvec sol = lu.solve(rhs);
  // The border multiplier vanishes by the solvability condition.
  return sol.head(n);
}

double dl_equation_residual(const PeriodicCoefficient& rho, const BlochPoint& p, const cvec& dlf) {
  cmat H = assemble_bloch_matrix(rho, p.l, p.truncation());
  H.diagonal().array() -= p.omega * p.omega;
  return (H * dlf - dl_rhs(p)).norm();
}

double omega_second_derivative(const BlochPoint& p) {
  const cplx fg = inner(p.f_hat, p.dlf_hat);
  // <f, i g'> = -2 pi sum k conj(f_k) g_k
  const cplx f_igp = -inner(p.f_hat, times_wavenumber(p.dlf_hat));
  const cplx num = 1.0 - p.cg * p.cg - 2.0 * (p.omega * p.cg - p.l) * fg - 2.0 * f_igp;
  return num.real() / p.omega;
}

void refresh_derivatives(const PeriodicCoefficient& rho, BlochPoint& p) {
  p.cg = group_velocity(p);
  p.dlf_hat = dl_eigenfunction(rho, p);
  p.omega_pp = omega_second_derivative(p);
}

BlochPoint compute_bloch_point(const PeriodicCoefficient& rho, double l, int n, int K,
                               double degeneracy_tol) {
  if (!(l > -0.5 && l <= 0.5)) throw ConfigError("quasimomentum l must lie in (-1/2, 1/2]");
  if (n < 0 || n >= basis_size(K)) throw ConfigError("band index out of range for truncation K");
  const auto bands = solve_bands(assemble_bloch_matrix(rho, l, K));
  BlochPoint p;
  p.l = l;
  p.n = n;
  p.omega = bands[n].omega;
  p.f_hat = bands[n].f_hat;
  p.gap = std::numeric_limits<double>::infinity();
  if (n > 0) p.gap = std::min(p.gap, p.omega - bands[n - 1].omega);
  if (n + 1 < static_cast<int>(bands.size())) p.gap = std::min(p.gap, bands[n + 1].omega - p.omega);
  if (p.gap <= degeneracy_tol)
    throw DegeneracyError("band " + std::to_string(n) + " is not simple at l = " + std::to_string(l));
  refresh_derivatives(rho, p);
  return p;
}

std::vector<double> band_omegas(const PeriodicCoefficient& rho, double l, int K, int count) {
  const auto bands = solve_bands(assemble_bloch_matrix(rho, l, K));
  std::vector<double> out;
  for (int i = 0; i < count && i < static_cast<int>(bands.size()); ++i) out.push_back(bands[i].omega);
  return out;
}

}  // namespace modpulse
