#include "modpulse/envelope.hpp"

#include "modpulse/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace modpulse {

double nonlinear_coefficient(const BlochPoint& point, const PeriodicCoefficient& r, double gamma,
                             int min_points) {
  const int K = point.truncation();
  const int P = std::max(min_points, 4 * K + r.highest_harmonic() + 2);
  const FourierGrid grid(K, P);
  const cvec f = grid.to_grid(point.f_hat);
  double sum = 0.0;
  for (int j = 0; j < P; ++j) sum += r(grid.node(j)) * std::pow(std::norm(f(j)), 2);
  return 3.0 * gamma / point.omega * two_pi * sum / P;
}

EnvelopeParams make_envelope_params(const BlochPoint& point, const PeriodicCoefficient& r, double gamma,
                                    double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (gamma != 1.0 && gamma != -1.0) throw ConfigError("gamma must be +1 or -1");
  EnvelopeParams p;
  p.n0 = point.n;
  p.l0 = point.l;
  p.omega0 = point.omega;
  p.cg = point.cg;
  p.omega_pp = point.omega_pp;
  p.gamma = gamma;
  p.epsilon = epsilon;
  p.gamma_nl = nonlinear_coefficient(point, r, gamma);
  if (!(p.omega_pp * p.gamma_nl > 0.0))
    throw NumericalError("focusing condition omega'' * gamma_nl > 0 fails; no soliton exists");
  p.omega_tilde = p.omega_pp > 0.0 ? -1.0 : 1.0;
  p.gamma1 = std::sqrt(4.0 * std::abs(p.omega_tilde) / std::abs(p.gamma_nl));
  p.gamma2 = std::sqrt(2.0 * std::abs(p.omega_tilde) / std::abs(p.omega_pp));
  return p;
}

double soliton(const EnvelopeParams& p, double X) { return p.gamma1 / std::cosh(p.gamma2 * X); }

double soliton_dX(const EnvelopeParams& p, double X) {
  const double s = 1.0 / std::cosh(p.gamma2 * X);
  return -p.gamma1 * p.gamma2 * s * std::tanh(p.gamma2 * X);
}

double soliton_dXX(const EnvelopeParams& p, double X) {
  const double s = 1.0 / std::cosh(p.gamma2 * X);
  const double t = std::tanh(p.gamma2 * X);
  return p.gamma1 * p.gamma2 * p.gamma2 * s * (t * t - s * s);
}

namespace {

std::vector<double> second_derivative_stencil(int order) {
  switch (order) {
    case 4: return {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};
    case 6: return {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90};
    case 8:
      return {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
    default: throw ConfigError("finite-difference order must be 4, 6 or 8");
  }
}

}  // namespace

double stationary_nls_residual(const EnvelopeParams& p, std::span<const double> X, std::span<const double> A,
                               int order) {
  const auto w = second_derivative_stencil(order);
  const int half = order / 2;
  const int n = static_cast<int>(X.size());
  if (static_cast<int>(A.size()) != n) throw ConfigError("profile and grid sizes differ");
  if (n < 2 * half + 1) throw ConfigError("grid has too few points for the stencil");
  if (std::abs(A.front()) > 1e-12 || std::abs(A.back()) > 1e-12)
    throw ConfigError("grid too narrow: profile does not vanish at the ends");
  const double h = (X.back() - X.front()) / (n - 1);
  double worst = 0.0;
  for (int i = half; i < n - half; ++i) {
    double d2 = 0.0;
    for (int s = -half; s <= half; ++s) d2 += w[s + half] * A[i + s];
    d2 /= h * h;
    const double a = A[i];
    const double res = -p.omega0 * p.omega_pp * d2 - 2.0 * p.omega0 * p.omega_tilde * a -
                       p.omega0 * p.gamma_nl * a * a * a;
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

ModeSample sample_mode(const BlochPoint& point, double x) {
  return {evaluate(point.f_hat, x), evaluate(point.dlf_hat, x)};
}

double h_app(const EnvelopeParams& p, const BlochPoint& point, double xi, double z, double x) {
  const double amp = p.epsilon * soliton(p, p.epsilon * xi);
  return 2.0 * amp * (evaluate(point.f_hat, x) * std::exp(I * z)).real();
}

EnvelopeProfile soliton_profile(const EnvelopeParams& p) {
  const double e = p.epsilon;
  EnvelopeProfile prof;
  prof.psi = [p, e](double xi) { return cplx(e * soliton(p, e * xi)); };
  prof.dpsi = [p, e](double xi) { return cplx(e * e * soliton_dX(p, e * xi)); };
  prof.phi = [p, e](double xi) { return cplx(e * e * soliton_dX(p, e * xi)); };
  prof.dphi = [p, e](double xi) { return cplx(e * e * e * soliton_dXX(p, e * xi)); };
  return prof;
}

double modulating_field(const BlochPoint& point, const EnvelopeProfile& prof, double xi, double z, double x) {
  const auto m = sample_mode(point, x);
  const cplx v = prof.psi(xi) * m.f - I * prof.phi(xi) * m.dlf;
  return 2.0 * (v * std::exp(I * z)).real();
}

std::pair<double, double> taper(const TaperSpec& spec, double xi) {
  const double a = std::abs(xi);
  if (a <= spec.xi_max) return {1.0, 0.0};
  if (spec.width <= 0.0 || a >= spec.xi_max + spec.width) return {0.0, 0.0};
  const double s = (a - spec.xi_max) / spec.width;
  const double step = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  const double dstep = 30.0 * s * s * (1.0 - s) * (1.0 - s) / spec.width;
  return {1.0 - step, -dstep * (xi > 0 ? 1.0 : -1.0)};
}

InitialData build_initial_data(const EnvelopeParams& p, const BlochPoint& point, const EnvelopeProfile& prof,
                               const LatticeGrid& grid, double x_center, const TaperSpec& spec) {
  const int n = grid.size();
  InitialData out{std::vector<double>(n), std::vector<double>(n)};
  const double omega = p.omega();
  // The mode is 2 pi periodic and the grid has whole cells, so one cell suffices.
  const int per_cell = grid.points_per_cell();
  std::vector<ModeSample> modes(per_cell);
  for (int j = 0; j < per_cell; ++j) modes[j] = sample_mode(point, grid.x(j));
  for (int j = 0; j < n; ++j) {
    const double x = grid.x(j);
    const double xi = x - x_center;
    const auto [chi, dchi] = taper(spec, xi);
    if (chi == 0.0 && dchi == 0.0) continue;
    const cplx psi = prof.psi(xi), phi = prof.phi(xi);
    const cplx tpsi = chi * psi, tphi = chi * phi;
    const cplx dtpsi = dchi * psi + chi * prof.dpsi(xi);
    const cplx dtphi = dchi * phi + chi * prof.dphi(xi);
    const auto& m = modes[j % per_cell];
    const cplx carrier = std::exp(I * (p.l0 * x));
    const cplx v = (tpsi * m.f - I * tphi * m.dlf) * carrier;
    const cplx v_xi = (dtpsi * m.f - I * dtphi * m.dlf) * carrier;
    out.u0[j] = 2.0 * v.real();
    out.u1[j] = -p.cg * 2.0 * v_xi.real() - omega * 2.0 * (I * v).real();
  }
  return out;
}

}  // namespace modpulse
