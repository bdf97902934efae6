#pragma once

#include "modpulse/fourier.hpp"

#include <vector>

namespace modpulse {

struct Band {
  double omega = 0.0;
  cvec f_hat;
};

// One gauge-fixed eigenpair of the Bloch problem plus its l-derivatives.
struct BlochPoint {
  double l = 0.0;
  int n = 0;
  double omega = 0.0;
  cvec f_hat;
  cvec dlf_hat;
  double cg = 0.0;
  double omega_pp = 0.0;
  // Distance in omega to the nearest other band.
  double gap = 0.0;

  int truncation() const { return truncation_of(f_hat); }
};

inline constexpr double kDegeneracyTol = 1e-8;

/// Hermitian matrix (k+l)^2 delta_jk + rho_hat_{j-k} on |k| <= K.
cmat assemble_bloch_matrix(const PeriodicCoefficient& rho, double l, int K);

/// Eigenpairs sorted by omega with the max-coefficient gauge applied.
std::vector<Band> solve_bands(const cmat& matrix);

/// Rotate so that the largest-modulus coefficient is real and positive.
void apply_gauge(cvec& f_hat);

/// Map any real quasimomentum into (-1/2, 1/2].
double reduce_to_zone(double l);

double group_velocity(const BlochPoint& point);

/// Solves the bordered system enforcing <f, d_l f> = 0.
cvec dl_eigenfunction(const PeriodicCoefficient& rho, const BlochPoint& point);

/// Residual of the equation defining d_l f, in coefficient 2-norm.
double dl_equation_residual(const PeriodicCoefficient& rho, const BlochPoint& point, const cvec& dlf);

double omega_second_derivative(const BlochPoint& point);

/// Full pipeline for band n at l: eigensolve, gauge, derivatives.
/// Throws DegeneracyError when the band is not simple.
BlochPoint compute_bloch_point(const PeriodicCoefficient& rho, double l, int n, int K,
                               double degeneracy_tol = kDegeneracyTol);

/// Recompute cg, d_l f and omega'' for a point whose f_hat was changed (e.g. re-phased).
void refresh_derivatives(const PeriodicCoefficient& rho, BlochPoint& point);

/// Omega values of the lowest `count` bands at l.
std::vector<double> band_omegas(const PeriodicCoefficient& rho, double l, int K, int count);

}  // namespace modpulse
