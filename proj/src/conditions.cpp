#include "modpulse/conditions.hpp"

#include "modpulse/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace modpulse {

NondegeneracyMargins check_nondegeneracy(const std::vector<double>& omegas, int n0, std::optional<double> cg,
                                         std::optional<double> omega_pp) {
  if (n0 < 0 || n0 >= static_cast<int>(omegas.size())) throw ConfigError("n0 out of range");
  NondegeneracyMargins out;
  out.nd1 = std::numeric_limits<double>::infinity();
  for (int n = 0; n < static_cast<int>(omegas.size()); ++n) {
    if (n == n0) continue;
    const double d = std::abs(omegas[n] - omegas[n0]);
    if (d < out.nd1) {
      out.nd1 = d;
      out.nd1_nearest = n;
    }
  }
  if (cg && omega_pp) {
    out.nd2_speed = std::abs(1.0 - std::abs(*cg));
    out.nd2_curvature = std::abs(*omega_pp);
    out.nd2_evaluated = true;
  }
  return out;
}

std::vector<ResonanceRow> check_nonresonance(const PeriodicCoefficient& rho, double omega0, double l0, int N,
                                             int K) {
  std::vector<ResonanceRow> rows;
  for (int m = 3; m <= 2 * N + 1; m += 2) {
    ResonanceRow row;
    row.m = m;
    row.l_reduced = reduce_to_zone(m * l0);
    const double target = m * m * omega0 * omega0;
    const auto bands = solve_bands(assemble_bloch_matrix(rho, row.l_reduced, K));
    row.margin = std::numeric_limits<double>::infinity();
    for (int n = 0; n < static_cast<int>(bands.size()); ++n) {
      const double w2 = bands[n].omega * bands[n].omega;
      const double d = std::abs(w2 - target);
      if (d < row.margin) {
        row.margin = d;
        row.n_min = n;
      }
      row.n_max = n;
      // Bands grow monotonically in n, so nothing above can come closer.
      if (w2 > target + 1.0 && w2 - target > row.margin) break;
    }
    if (row.n_max + 1 >= static_cast<int>(bands.size()))
      throw NumericalError("truncation K too small to bracket m^2 omega0^2 for m = " + std::to_string(m));
    rows.push_back(row);
  }
  return rows;
}

std::vector<ZeroEvRow> check_zero_ev_cond2(double s, int N, bool signed_kappa, double window) {
  std::vector<ZeroEvRow> rows;
  for (int m = 3; m <= 2 * N + 1; m += 2) {
    // |value| >= (kappa^2 + 1 - m^2) / (2 m kappa) grows like kappa / (2m), so the
    // values leave [s - window, s + window] once that bound exceeds |s| + window.
    int kappa_max = 1;
    while ((double(kappa_max) * kappa_max + 1 - m * m) / (2.0 * m * kappa_max) <= std::abs(s) + window) ++kappa_max;
    for (int k = signed_kappa ? -kappa_max : 1; k <= kappa_max; ++k) {
      if (k == 0) continue;
      const double value = (m * m - 1.0 - double(k) * k) / (2.0 * m * k);
      const double d = std::abs(s - value);
      if (d > window) continue;
      rows.push_back({m, k, d});
    }
  }
  return rows;
}

DmRow compute_Dm(double s, double omega0, int m, int kappa_limit) {
  DmRow row;
  row.m = m;
  row.value = std::numeric_limits<double>::infinity();
  const double slope = omega0 - std::abs(s);
  for (int k = 1; k <= kappa_limit; ++k) {
    row.kappa_max = k;
    const double a = m - k * s;
    if (a * a >= 1.0) {
      const double v = std::abs(omega0) * std::abs(std::sqrt(a * a - 1.0) - k * omega0);
      if (v < row.value) {
        row.value = v;
        row.kappa = k;
      }
    }
    // For larger kappa the term exceeds |omega0| (kappa (omega0 - |s|) - m).
    if (slope > 0.0 && std::abs(omega0) * ((k + 1) * slope - m) > row.value) break;
  }
  return row;
}

int dominant_exponent(const cvec& f_hat) {
  Eigen::Index i = 0;
  f_hat.cwiseAbs().maxCoeff(&i);
  return static_cast<int>(i) - truncation_of(f_hat);
}

ConditionReport check_conditions(const PeriodicCoefficient& rho, int n0, double l0, int N, int K,
                                 bool signed_kappa) {
  if (N < 0) throw ConfigError("N must be >= 0");
  ConditionReport rep;
  rep.n0 = n0;
  rep.l0 = l0;
  rep.N = N;
  const auto bands = solve_bands(assemble_bloch_matrix(rho, l0, K));
  if (n0 < 0 || n0 >= static_cast<int>(bands.size())) throw ConfigError("n0 out of range");
  std::vector<double> omegas;
  for (const auto& b : bands) omegas.push_back(b.omega);
  rep.omega0 = omegas[n0];
  rep.s = dominant_exponent(bands[n0].f_hat) + l0;
  rep.nd = check_nondegeneracy(omegas, n0);
  if (rep.nd.nd1 > kMarginTol) {
    const auto p = compute_bloch_point(rho, l0, n0, K);
    rep.nd = check_nondegeneracy(omegas, n0, p.cg, p.omega_pp);
  }
  rep.nr = check_nonresonance(rho, rep.omega0, l0, N, K);
  rep.zero_ev = check_zero_ev_cond2(rep.s, N, signed_kappa);
  rep.zero_ev_min = {0, 0, std::numeric_limits<double>::infinity()};
  for (const auto& z : rep.zero_ev)
    if (z.distance < rep.zero_ev_min.distance) rep.zero_ev_min = z;
  for (int m = 1; m <= 2 * N + 1; m += 2) rep.Dm.push_back(compute_Dm(rep.s, rep.omega0, m));

  rep.pass = rep.nd.nd1 > kMarginTol && rep.nd.nd2_evaluated && rep.nd.nd2_speed > kMarginTol &&
             rep.nd.nd2_curvature > kMarginTol;
  for (const auto& r : rep.nr) rep.pass = rep.pass && r.margin > kMarginTol;
  return rep;
}

}  // namespace modpulse
