#include "modpulse/spatial_spectrum.hpp"

#include "modpulse/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace modpulse {

SpatialOperator assemble_Am(const PeriodicCoefficient& rho, int m, double omega, double c, double l0, int K,
                            double omega0) {
  if (std::abs(c) >= 1.0 - 1e-10) throw ConfigError("spatial operator requires |c| < 1");
  if (K < 1) throw ConfigError("truncation K must be >= 1");
  if (rho.highest_harmonic() > 2 * K) throw ConfigError("truncation K too small for the coefficient (aliasing)");
  SpatialOperator op;
  op.m = m;
  op.omega = omega;
  op.omega0 = omega0 < 0.0 ? omega : omega0;
  op.c = c;
  op.l0 = l0;
  op.K = K;
  const int n = basis_size(K);
  const double scale = 1.0 / (1.0 - c * c);
  const cvec rh = rho.exponential_coeffs(2 * K);
  op.L.resize(n, n);
  for (int j = -K; j <= K; ++j)
    for (int k = -K; k <= K; ++k) op.L(j + K, k + K) = scale * rh(j - k + 2 * K);
  op.M = cmat::Zero(n, n);
  for (int k = -K; k <= K; ++k) {
    const double q = k + m * l0;
    op.L(k + K, k + K) += scale * (q * q - m * m * omega * omega);
    op.M(k + K, k + K) = 2.0 * scale * (I * (m * c * omega) - I * q);
  }
  op.matrix = cmat::Zero(2 * n, 2 * n);
  op.matrix.topRightCorner(n, n).setIdentity();
  op.matrix.bottomLeftCorner(n, n) = op.L;
  op.matrix.bottomRightCorner(n, n) = op.M;
  op.Bm = cmat::Zero(2 * n, 2 * n);
  op.Bm.bottomLeftCorner(n, n).diagonal().setConstant(-double(m * m) * (op.omega + op.omega0));
  op.Bm.bottomRightCorner(n, n).diagonal().setConstant(2.0 * I * double(m) * c);
  return op;
}

std::string to_string(SpectralClass c) {
  switch (c) {
    case SpectralClass::center: return "center";
    case SpectralClass::stable: return "stable";
    case SpectralClass::unstable: return "unstable";
  }
  return "?";
}

SpectralClass classify(cplx lambda, double tol) {
  if (std::abs(lambda.real()) <= tol) return SpectralClass::center;
  return lambda.real() < 0 ? SpectralClass::stable : SpectralClass::unstable;
}

double dispersion_residual(const SpatialOperator& op, const PeriodicCoefficient& rho, cplx lambda, const cvec& V) {
  const int K = op.K;
  const int n = op.block();
  const cvec rh = rho.exponential_coeffs(2 * K);
  cvec out(n);
  const double c = op.c, w = op.omega;
  const int m = op.m;
  for (int j = -K; j <= K; ++j) {
    const double q = j + m * op.l0;
    cplx conv = 0.0;
    for (int k = -K; k <= K; ++k) conv += rh(j - k + 2 * K) * V(k + K);
    const cplx sym = q * q - 2.0 * I * q * lambda - (1.0 - c * c) * lambda * lambda - double(m * m) * w * w +
                     2.0 * I * double(m) * c * w * lambda;
    out(j + K) = sym * V(j + K) + conv;
  }
  return out.norm() / V.norm();
}

std::vector<SpectralPoint> spectrum(const SpatialOperator& op, const PeriodicCoefficient& rho,
                                    const SpectrumOptions& opts) {
  Eigen::ComplexEigenSolver<cmat> es(op.matrix, true);
  if (es.info() != Eigen::Success) throw ConvergenceError("spatial spectrum eigensolver did not converge");
  const int K = op.K;
  const int n = op.block();
  const int edge = static_cast<int>(std::floor(opts.edge_fraction * K));
  std::vector<SpectralPoint> out;
  for (int i = 0; i < 2 * n; ++i) {
    const cplx lam = es.eigenvalues()(i);
    const cvec y = es.eigenvectors().col(i);
    const cvec V = y.head(n);
    double high = 0.0;
    for (int k = -K; k <= K; ++k)
      if (std::abs(k) > edge) high += std::norm(V(k + K));
    SpectralPoint p;
    p.lambda = lam;
    p.edge_mass = high / V.squaredNorm();
    if (p.edge_mass > opts.edge_tol) continue;
    p.cls = classify(lam, opts.class_tol);
    p.residual = (op.matrix * y - lam * y).norm() / y.norm();
    p.dispersion_residual = dispersion_residual(op, rho, lam, V);
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const SpectralPoint& a, const SpectralPoint& b) {
    if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
    return a.lambda.real() < b.lambda.real();
  });
  return out;
}

std::vector<ClosedFormEigenvalue> closed_form_eigenvalues(int m, int n0, double l0, int kappa_min, int kappa_max) {
  const double s = n0 + l0;
  const double w2 = 1.0 + s * s;
  const double w = std::sqrt(w2);
  std::vector<ClosedFormEigenvalue> out;
  for (int k = kappa_min; k <= kappa_max; ++k) {
    const double a = (m - k * s) * (m - k * s) - 1.0;
    const cplx base = -I * (k * w2);
    if (a >= 0.0) {
      const double r = w * std::sqrt(a);
      out.push_back({k, base + I * r, SpectralClass::center});
      out.push_back({k, base - I * r, SpectralClass::center});
    } else {
      const double r = w * std::sqrt(-a);
      out.push_back({k, base + r, SpectralClass::unstable});
      out.push_back({k, base - r, SpectralClass::stable});
    }
  }
  return out;
}

std::vector<EigenCluster> cluster_eigenvalues(const std::vector<cplx>& values, double tol) {
  std::vector<int> owner(values.size(), -1);
  std::vector<EigenCluster> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (owner[i] >= 0) continue;
    owner[i] = static_cast<int>(out.size());
    std::vector<std::size_t> members{i};
    // Grow the cluster transitively.
    for (std::size_t q = 0; q < members.size(); ++q)
      for (std::size_t j = 0; j < values.size(); ++j)
        if (owner[j] < 0 && std::abs(values[j] - values[members[q]]) < tol) {
          owner[j] = owner[i];
          members.push_back(j);
        }
    cplx sum = 0.0;
    for (auto j : members) sum += values[j];
    out.push_back({sum / double(members.size()), static_cast<int>(members.size())});
  }
  return out;
}

double one_sided_hausdorff(const std::vector<cplx>& reference, const std::vector<cplx>& candidates) {
  double worst = 0.0;
  for (const auto& r : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) best = std::min(best, std::abs(r - c));
    worst = std::max(worst, best);
  }
  return worst;
}

double JordanData::max_chain_residual() const { return std::max({res_F0, res_F1, res_G0, res_G1}); }

JordanData jordan_chain_m1(const SpatialOperator& A1, const BlochPoint& point) {
  if (A1.m != 1) throw ConfigError("Jordan chain requires the m = 1 operator");
  if (point.omega_pp == 0.0) throw DegeneracyError("omega'' vanishes; Jordan normalization is singular");
  const int n = A1.block();
  const cvec f = resize(point.f_hat, A1.K);
  const cvec g = resize(point.dlf_hat, A1.K);
  const double c = A1.c, w0 = A1.omega, l0 = A1.l0;
  const double pref = 1.0 / (w0 * point.omega_pp);
  auto P = [&](const cvec& v) { return cvec(I * (c * w0) * v - I * times_wavenumber(v, l0)); };

  JordanData J;
  J.F0 = cvec::Zero(2 * n);
  J.F0.head(n) = f;
  J.F1.resize(2 * n);
  J.F1.head(n) = -I * g;
  J.F1.tail(n) = f;
  J.G0.resize(2 * n);
  J.G0.head(n) = pref * 2.0 * P(f);
  J.G0.tail(n) = pref * (1.0 - c * c) * f;
  cvec G1p(2 * n);
  G1p.head(n) = pref * (1.0 - c * c) * (f + 2.0 * I / (1.0 - c * c) * P(g));
  G1p.tail(n) = pref * (1.0 - c * c) * (I * g);
  J.nu = -std::conj(inner2(G1p, J.F1));
  J.G1 = G1p + J.nu * J.G0;

  // Im <g', g> = -2 pi sum k |g_k|^2
  const double im_dg_g = -two_pi * times_wavenumber(g).dot(g).real();
  J.nu_closed_form = -2.0 * I * pref *
                     ((1.0 - c * c) * inner(f, g).real() - (c * w0 - l0) * two_pi * g.squaredNorm() - im_dg_g);

  const cvec* Fs[2] = {&J.F0, &J.F1};
  const cvec* Gs[2] = {&J.G0, &J.G1};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) J.duality(i, j) = inner2(*Gs[i], *Fs[j]);
  Eigen::Matrix2cd expected;
  expected << 0, 1, 1, 0;
  J.duality_error = (J.duality - expected).cwiseAbs().maxCoeff();

  const cmat& A = A1.matrix;
  const cmat Ah = A.adjoint();
  J.res_F0 = (A * J.F0).norm();
  J.res_F1 = (A * J.F1 - J.F0).norm();
  J.res_G0 = (Ah * J.G0).norm();
  J.res_G1 = (Ah * J.G1 - J.G0).norm();
  return J;
}

cvec projector_Pi(const JordanData& J, const cvec& psi) {
  return psi - inner2(J.G0, psi) * J.F1 - inner2(J.G1, psi) * J.F0;
}

cmat projector_matrix(const JordanData& J) {
  const auto n = J.F0.size();
  return cmat::Identity(n, n) - two_pi * (J.F1 * J.G0.adjoint() + J.F0 * J.G1.adjoint());
}

DeflatedSolver::DeflatedSolver(const SpatialOperator& A1, const JordanData& J) : n_(A1.matrix.rows()) {
  cmat B = cmat::Zero(n_ + 2, n_ + 2);
  B.topLeftCorner(n_, n_) = A1.matrix;
  B.block(0, n_, n_, 1) = J.F0;
  B.block(0, n_ + 1, n_, 1) = J.F1;
  B.block(n_, 0, 1, n_) = two_pi * J.G0.adjoint();
  B.block(n_ + 1, 0, 1, n_) = two_pi * J.G1.adjoint();
  lu_.compute(B);
  bordered_ = std::move(B);
  J_ = J;
}

cvec DeflatedSolver::solve(const cvec& rhs) const {
  cvec full = cvec::Zero(n_ + 2);
  full.head(n_) = rhs;
  cvec sol = lu_.solve(full);
  sol += lu_.solve(full - bordered_ * sol);
  return projector_Pi(J_, sol.head(n_));
}

double sigma_min(const cmat& a) {
  Eigen::JacobiSVD<cmat> svd(a);
  return svd.singularValues().minCoeff();
}

ResolventReport resolvent_health(const PeriodicCoefficient& rho, const BlochPoint& point, int N, int K,
                                 double threshold) {
  ResolventReport rep;
  const double w0 = point.omega, c = point.cg, l0 = point.l;
  {
    const auto A1 = assemble_Am(rho, 1, w0, c, l0, K);
    const auto J = jordan_chain_m1(A1, point);
    const cmat P = projector_matrix(J);
    const cmat PAP = P * A1.matrix * P;
    Eigen::JacobiSVD<cmat> svd(PAP);
    const auto& sv = svd.singularValues();
    ResolventRow row;
    row.m = 1;
    row.near_zero_count = static_cast<int>((sv.array() < 1e-9 * sv(0)).count());
    cmat G(J.G0.size(), 2);
    G.col(0) = J.G0;
    G.col(1) = J.G1;
    Eigen::HouseholderQR<cmat> qr(G);
    const cmat Qfull = qr.householderQ();
    const cmat Q = Qfull.rightCols(Qfull.cols() - 2);
    row.sigma_min = sigma_min(Q.adjoint() * A1.matrix * Q);
    row.inverse_norm = 1.0 / row.sigma_min;
    rep.rows.push_back(row);
  }
  for (int m = 3; m <= 2 * N + 1; m += 2) {
    const auto Am = assemble_Am(rho, m, w0, c, l0, K);
    ResolventRow row;
    row.m = m;
    row.sigma_min = sigma_min(Am.matrix);
    row.inverse_norm = 1.0 / row.sigma_min;
    rep.rows.push_back(row);
  }
  rep.healthy = true;
  for (const auto& r : rep.rows) {
    rep.C0 = std::max(rep.C0, r.inverse_norm);
    rep.C0_sum += r.inverse_norm;
    rep.healthy = rep.healthy && r.sigma_min > threshold;
    if (r.m == 1) rep.healthy = rep.healthy && r.near_zero_count == 2;
  }
  return rep;
}

}  // namespace modpulse
