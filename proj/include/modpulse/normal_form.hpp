#pragma once

#include "modpulse/spatial_spectrum.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace modpulse {

// q0^e0 conj(q0)^e1 q1^e2 conj(q1)^e3
struct Monomial {
  std::array<int, 4> e{};

  cplx value(cplx q0, cplx q1) const;
  /// d/dxi along (q0', q1'), conjugates following by conjugation.
  cplx derivative(cplx q0, cplx q1, cplx dq0, cplx dq1) const;
  std::string label() const;
};

/// Polynomial source sum_j q0^{M-j} q1^j (a_j; b_j).
struct PolySource {
  int m = 3;
  int M = 0;
  std::vector<cvec> a, b;
};

struct TransformStep {
  int m = 0;
  std::vector<Monomial> monomials;
  std::vector<cvec> sources;  // two-block coefficient of each monomial in H^(q)
  std::vector<cvec> shifts;   // two-block coefficient of each monomial in the transformation
  std::vector<std::string> labels;
  std::vector<double> residuals;  // one per chain equation, relative to 1 + norm of its right side
  // Scalar chains (m >= 3): h_j, g_j with shifts[j] = (h_j; g_j).
  std::vector<cvec> h, g;

  double max_residual() const;
};

// Inverts L_m after a conditioning check.
class LmSolver {
 public:
  explicit LmSolver(const SpatialOperator& op, double sigma_tol = 1e-10);
  cvec solve(const cvec& rhs) const;
  double sigma_min() const { return sigma_min_; }

 private:
  Eigen::PartialPivLU<cmat> lu_;
  double sigma_min_ = 0.0;
};

cvec solve_Lm(const SpatialOperator& op, const cvec& rhs);

/// Recurrence g_j = -a_j + (M+1-j) h_{j-1}, L_m h_j = -b_j - M_m g_j + (M+1-j) g_{j-1}.
TransformStep general_step(const SpatialOperator& op, const PolySource& source);

/// Cubic source of the m-th harmonic, -gamma (1-c^2)^{-1} (0; r (q0 f - i q1 d_l f)^3).
PolySource cubic_source(const SpatialOperator& op, const BlochPoint& point, const PeriodicCoefficient& r,
                        double gamma);

/// First elimination step for m = 3, with the explicit four-equation chain.
TransformStep m3_first_step(const SpatialOperator& A3, const BlochPoint& point, const PeriodicCoefficient& r,
                            double gamma);

/// Sources H^(0..7) of the m = 1 equation and the eight S-chains.
std::vector<cvec> m1_sources(const SpatialOperator& A1, const BlochPoint& point, const PeriodicCoefficient& r,
                             double gamma, double omega_tilde);

enum class ChainOrder { standard, s5_before_s3_s4 };

TransformStep m1_first_step(const SpatialOperator& A1, const JordanData& J, const BlochPoint& point,
                            const PeriodicCoefficient& r, double gamma, double omega_tilde,
                            ChainOrder order = ChainOrder::standard);

/// Reduced field Z(q0, q1) = (q1-row, q0-row) of the truncated system.
using ReducedField = std::function<std::array<cplx, 2>(cplx, cplx)>;

struct EliminationFit {
  std::vector<double> epsilons;
  std::vector<double> residuals;          // max over samples of the relative residual
  std::vector<double> control_residuals;  // same with the transformation switched off
  double slope = 0.0;
  double control_slope = 0.0;
  // The projected source vanishes at every sample, so there is nothing to eliminate.
  bool trivial = false;
};

struct EliminationInputs {
  const PeriodicCoefficient* rho = nullptr;
  const JordanData* jordan = nullptr;  // required for m = 1
  double omega0 = 0.0;
  double cg = 0.0;
  double l0 = 0.0;
  double omega_tilde = 0.0;
  int K = 0;
  double amplitude = 1.0;  // random (q0, q1) drawn with modulus <= amplitude
  int samples = 8;
  std::uint64_t seed = 1;
};

/// Residual of the transformed equation at zero transformed variables, relative to
/// the eliminated source, and its least-squares order in epsilon.
EliminationFit verify_elimination(const TransformStep& step, const EliminationInputs& in, const ReducedField& Z,
                                  const std::vector<double>& epsilons);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Pointwise product helper: coefficients of r * prod(factors) on |k| <= K.
cvec product_coeffs(const PeriodicCoefficient& r, const std::vector<cvec>& factors, int K);

}  // namespace modpulse
