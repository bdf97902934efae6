#pragma once

#include "modpulse/bloch.hpp"
#include "modpulse/grid.hpp"

#include <functional>
#include <span>
#include <vector>

namespace modpulse {

struct EnvelopeParams {
  int n0 = 0;
  double l0 = 0.0;
  double omega0 = 0.0;
  double cg = 0.0;
  double omega_pp = 0.0;
  double gamma = 1.0;
  double gamma_nl = 0.0;
  double omega_tilde = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double epsilon = 0.1;

  /// Temporal frequency of the pulse, omega0 + omega_tilde eps^2.
  double omega() const { return omega0 + omega_tilde * epsilon * epsilon; }
};

/// (3 gamma / omega) * integral of r |f|^4 by the trapezoidal rule.
double nonlinear_coefficient(const BlochPoint& point, const PeriodicCoefficient& r, double gamma,
                             int min_points = 1024);

/// Builds the envelope parameters; refuses non-focusing configurations.
EnvelopeParams make_envelope_params(const BlochPoint& point, const PeriodicCoefficient& r,
                                    double gamma, double epsilon);

double soliton(const EnvelopeParams& params, double X);
double soliton_dX(const EnvelopeParams& params, double X);
double soliton_dXX(const EnvelopeParams& params, double X);

/// Max-norm residual of the stationary NLS on a uniform grid. Central
/// differences of the given even order (4, 6 or 8) are used at interior nodes.
double stationary_nls_residual(const EnvelopeParams& params, std::span<const double> X,
                               std::span<const double> A, int order = 8);

/// Bloch mode and its l-derivative evaluated at a point.
struct ModeSample {
  cplx f;
  cplx dlf;
};
ModeSample sample_mode(const BlochPoint& point, double x);

/// Leading-order approximation eps A(eps xi) f(x) e^{iz} + c.c.
double h_app(const EnvelopeParams& params, const BlochPoint& point, double xi, double z, double x);

/// Two-mode profile psi(xi) f(x) - i phi(xi) d_l f(x), carried by e^{iz} + c.c.
struct EnvelopeProfile {
  std::function<cplx(double)> psi, dpsi, phi, dphi;
};

/// The profile (eps A(eps xi), eps^2 A'(eps xi)) of the leading-order soliton.
EnvelopeProfile soliton_profile(const EnvelopeParams& params);

double modulating_field(const BlochPoint& point, const EnvelopeProfile& profile, double xi, double z, double x);

struct InitialData {
  std::vector<double> u0;
  std::vector<double> u1;
};

struct TaperSpec {
  double xi_max = 0.0;  // profile is untouched for |xi| <= xi_max
  double width = 0.0;   // smooth decay to zero over this distance
};

/// C^2 cutoff equal to 1 on |xi| <= xi_max and 0 beyond xi_max + width, with its derivative.
std::pair<double, double> taper(const TaperSpec& spec, double xi);

/// u0 and u1 on the grid, with the pulse centred at x_center (xi = x - x_center).
InitialData build_initial_data(const EnvelopeParams& params, const BlochPoint& point,
                               const EnvelopeProfile& profile, const LatticeGrid& grid, double x_center,
                               const TaperSpec& spec);

}  // namespace modpulse
