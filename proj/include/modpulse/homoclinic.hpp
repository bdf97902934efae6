#pragma once

#include "modpulse/envelope.hpp"
#include "modpulse/normal_form.hpp"

#include <array>
#include <vector>

namespace modpulse {

struct ReducedState {
  cplx q0 = 0.0;
  cplx q1 = 0.0;
};

// Leading term Z1 of the truncated reduced system, stored as a polynomial in
// (q0, conj q0, q1, conj q1). Row 0 drives q1', row 1 drives q0' - q1.
class Z1Field {
 public:
  Z1Field(const JordanData& J, const BlochPoint& point, const PeriodicCoefficient& r, double gamma,
          double omega_tilde, int min_points = 1024);

  std::array<cplx, 2> operator()(cplx q0, cplx q1) const;
  std::array<cplx, 2> linear_part(cplx q0, cplx q1) const;
  std::array<cplx, 2> cubic_part(cplx q0, cplx q1) const;

  /// Wirtinger derivatives d Z_row / d v, v in (q0, conj q0, q1, conj q1).
  std::array<std::array<cplx, 4>, 2> wirtinger(cplx q0, cplx q1) const;

  ReducedField as_function() const;

  // Linear coefficients lin[row] = (coef of q0, coef of q1).
  std::array<std::array<cplx, 2>, 2> lin{};
  // Cubic coefficients on the monomials of u^2 conj(u), u = q0 f - i q1 d_l f.
  std::array<std::array<cplx, 6>, 2> cub{};
  static const std::array<Monomial, 6> cubic_monomials;
};

std::array<cplx, 2> compute_Z1(const JordanData& J, const BlochPoint& point, const PeriodicCoefficient& r,
                               double gamma, double omega_tilde, const ReducedState& state);

/// (d q1/d xi, d q0/d xi - q1) of the N = 1 truncation: eps^2 Z1.
std::array<cplx, 2> truncated_rhs(const Z1Field& Z, const ReducedState& state, double epsilon);

struct HomoclinicOptions {
  double half_length = 0.0;  // 0 selects 30 / (eps gamma2)
  double spacing = 0.5;
  int max_iterations = 25;
  int max_halvings = 6;
  double tolerance = 1e-11;
};

struct HomoclinicOrbit {
  std::vector<double> xi;
  std::vector<cplx> q0, q1;
  double epsilon = 0.0;
  double proximity_q0 = 0.0;  // sup |q0 - A(eps xi)|
  double proximity_q1 = 0.0;  // sup |q1 - eps A'(eps xi)|
  double decay_rate = 0.0;    // alpha in |q0| <= C exp(-eps alpha |xi|)
  double decay_constant = 0.0;
  double reversibility_residual = 0.0;
  double derivative_jump = 0.0;
  int iterations = 0;
  std::vector<double> newton_history;
};

/// Reversible homoclinic orbit of the truncated system on [-L, L].
HomoclinicOrbit refine_homoclinic(const Z1Field& Z, const EnvelopeParams& params, double epsilon,
                                  const HomoclinicOptions& opts = {});

/// sup over a grid of |residual| / eps^2 of the soliton pair (A, eps A') in the truncated system.
double soliton_truncation_residual(const Z1Field& Z, const EnvelopeParams& params, double epsilon,
                                   double half_length = 0.0, double spacing = 0.5);

}  // namespace modpulse
