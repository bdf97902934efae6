#pragma once

#include "modpulse/bloch.hpp"

#include <Eigen/LU>

#include <string>
#include <vector>

namespace modpulse {

// Two-block vectors (V, W) on |k| <= K are stored as one vector of length 2(2K+1).

/// <<a, b>> = <a1, b1> + <a2, b2>.
inline cplx inner2(const cvec& a, const cvec& b) { return two_pi * a.dot(b); }

struct SpatialOperator {
  int m = 1;
  double omega = 0.0;
  double omega0 = 0.0;
  double c = 0.0;
  double l0 = 0.0;
  int K = 0;
  cmat L;       // L_m block
  cmat M;       // M_m block (diagonal)
  cmat matrix;  // [[0, I], [L, M]]
  cmat Bm;      // [[0, 0], [-m^2 (omega + omega0), 2 i m c]]

  int block() const { return basis_size(K); }
  cvec apply(const cvec& y) const { return matrix * y; }
};

/// Assembles A_m(omega, c); omega0 enters only B_m and defaults to omega.
SpatialOperator assemble_Am(const PeriodicCoefficient& rho, int m, double omega, double c, double l0, int K,
                            double omega0 = -1.0);

enum class SpectralClass { center, stable, unstable };
std::string to_string(SpectralClass c);
SpectralClass classify(cplx lambda, double tol = 1e-8);

struct SpectralPoint {
  cplx lambda;
  SpectralClass cls = SpectralClass::center;
  double residual = 0.0;             // ||A y - lambda y|| / ||y||
  double dispersion_residual = 0.0;  // scalar-form residual on the V block
  double edge_mass = 0.0;            // fraction of V-block mass with |k| > edge
};

struct SpectrumOptions {
  // Modes whose V block carries more than `edge_tol` of its mass above
  // |k| > edge_fraction * K are treated as truncation artefacts.
  double edge_fraction = 0.75;
  double edge_tol = 1e-6;
  double class_tol = 1e-8;
};

/// Eigenvalues of the truncated operator with boundary-polluted modes removed.
std::vector<SpectralPoint> spectrum(const SpatialOperator& op, const PeriodicCoefficient& rho,
                                    const SpectrumOptions& opts = {});

/// Residual of the scalar dispersion relation for eigenvalue lambda and V block.
double dispersion_residual(const SpatialOperator& op, const PeriodicCoefficient& rho, cplx lambda, const cvec& V);

struct ClosedFormEigenvalue {
  int kappa = 0;
  cplx lambda;
  SpectralClass cls = SpectralClass::center;
};

/// Constant-medium eigenvalues -i kappa omega0^2 +- i omega0 sqrt((m - kappa s)^2 - 1), s = n0 + l0.
std::vector<ClosedFormEigenvalue> closed_form_eigenvalues(int m, int n0, double l0, int kappa_min, int kappa_max);

struct EigenCluster {
  cplx mean;
  int multiplicity = 0;
};

/// Groups eigenvalues closer than tol (defective eigenvalues split by ~sqrt(eps)).
std::vector<EigenCluster> cluster_eigenvalues(const std::vector<cplx>& values, double tol = 1e-6);

/// max over reference points of the distance to the nearest candidate.
double one_sided_hausdorff(const std::vector<cplx>& reference, const std::vector<cplx>& candidates);

struct JordanData {
  cvec F0, F1, G0, G1;
  cplx nu;
  cplx nu_closed_form;
  Eigen::Matrix2cd duality;  // entry (i, j) = <G_i, F_j>
  double res_F0 = 0.0;       // ||A1 F0||
  double res_F1 = 0.0;       // ||A1 F1 - F0||
  double res_G0 = 0.0;       // ||A1^* G0||
  double res_G1 = 0.0;       // ||A1^* G1 - G0||
  double duality_error = 0.0;

  double max_chain_residual() const;
};

/// Jordan chain of A1(omega0, cg) at the double zero and of its adjoint.
JordanData jordan_chain_m1(const SpatialOperator& A1, const BlochPoint& point);

/// Pi psi = psi - <G0, psi> F1 - <G1, psi> F0.
cvec projector_Pi(const JordanData& J, const cvec& psi);
cmat projector_matrix(const JordanData& J);

// Solves Pi A1 S = rhs for S in the range of Pi through the bordered system
// [[A1, F0, F1], [G0^*, 0, 0], [G1^*, 0, 0]].
class DeflatedSolver {
 public:
  DeflatedSolver(const SpatialOperator& A1, const JordanData& J);
  cvec solve(const cvec& rhs) const;

 private:
  Eigen::Index n_;
  cmat bordered_;
  Eigen::PartialPivLU<cmat> lu_;
  JordanData J_;
};

struct ResolventRow {
  int m = 0;
  double sigma_min = 0.0;
  double inverse_norm = 0.0;
  int near_zero_count = -1;  // for m = 1: near-zero singular values of Pi A1 Pi
};

struct ResolventReport {
  std::vector<ResolventRow> rows;
  double C0 = 0.0;      // max of inverse norms
  double C0_sum = 0.0;  // sum of inverse norms
  bool healthy = false;
};

/// Smallest singular values of A_m (m >= 3) and of Pi A1 Pi on the range of Pi.
ResolventReport resolvent_health(const PeriodicCoefficient& rho, const BlochPoint& point, int N, int K,
                                 double threshold = 1e-10);

/// Smallest singular value of a dense matrix.
double sigma_min(const cmat& a);

}  // namespace modpulse
