#pragma once

#include "modpulse/bloch.hpp"

#include <optional>
#include <vector>

namespace modpulse {

struct NondegeneracyMargins {
  double nd1 = 0.0;          // min over n != n0 of |omega_n - omega_n0|
  int nd1_nearest = -1;      // attaining band index
  double nd2_speed = 0.0;    // |1 - |cg||
  double nd2_curvature = 0.0;  // |omega''|
  bool nd2_evaluated = false;
};

struct ResonanceRow {
  int m = 0;
  double l_reduced = 0.0;  // m l0 mapped into (-1/2, 1/2]
  int n_min = -1;          // band attaining the margin
  int n_max = -1;          // cutoff: all bands above exceed m^2 omega0^2 + 1
  double margin = 0.0;
};

struct ZeroEvRow {
  int m = 0;
  int kappa = 0;
  double distance = 0.0;
};

struct DmRow {
  int m = 0;
  double value = 0.0;
  int kappa = 0;
  int kappa_max = 0;  // enumeration limit set by the tail bound
};

struct ConditionReport {
  int n0 = 0;
  double l0 = 0.0;
  int N = 0;
  double omega0 = 0.0;
  double s = 0.0;  // n0 + l0 with n0 the dominant Fourier exponent of the mode
  NondegeneracyMargins nd;
  std::vector<ResonanceRow> nr;
  std::vector<ZeroEvRow> zero_ev;
  ZeroEvRow zero_ev_min;
  std::vector<DmRow> Dm;
  bool pass = false;
};

inline constexpr double kMarginTol = 1e-8;

/// Non-degeneracy margins from the band values at l0; cg and omega'' only when available.
NondegeneracyMargins check_nondegeneracy(const std::vector<double>& omegas, int n0,
                                         std::optional<double> cg = std::nullopt,
                                         std::optional<double> omega_pp = std::nullopt);

/// Margins min_n |omega_n^2(m l0) - m^2 omega0^2| for odd m in 3..2N+1.
std::vector<ResonanceRow> check_nonresonance(const PeriodicCoefficient& rho, double omega0, double l0, int N,
                                             int K);

/// |s - (m^2 - 1 - kappa^2) / (2 m kappa)| for odd m in 3..2N+1. By default
/// kappa runs over 1..kappa_max; `signed_kappa` also includes negative kappa.
std::vector<ZeroEvRow> check_zero_ev_cond2(double s, int N, bool signed_kappa = false, double window = 10.0);

/// Gap constant |omega0| inf_kappa |sqrt((m - kappa s)^2 - 1) - kappa omega0| over admissible kappa >= 1.
DmRow compute_Dm(double s, double omega0, int m, int kappa_limit = 100000);

/// Dominant Fourier exponent of a mode (index of its largest coefficient).
int dominant_exponent(const cvec& f_hat);

ConditionReport check_conditions(const PeriodicCoefficient& rho, int n0, double l0, int N, int K,
                                 bool signed_kappa = false);

}  // namespace modpulse
