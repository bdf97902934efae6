#include "modpulse/normal_form.hpp"

#include "modpulse/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace modpulse {

cplx Monomial::value(cplx q0, cplx q1) const {
  const cplx v[4] = {q0, std::conj(q0), q1, std::conj(q1)};
  cplx out = 1.0;
  for (int i = 0; i < 4; ++i)
    for (int p = 0; p < e[i]; ++p) out *= v[i];
  return out;
}

cplx Monomial::derivative(cplx q0, cplx q1, cplx dq0, cplx dq1) const {
  const cplx v[4] = {q0, std::conj(q0), q1, std::conj(q1)};
  const cplx dv[4] = {dq0, std::conj(dq0), dq1, std::conj(dq1)};
  cplx out = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (e[i] == 0) continue;
    cplx term = double(e[i]) * dv[i];
    for (int j = 0; j < 4; ++j)
      for (int p = 0; p < e[j] - (j == i ? 1 : 0); ++p) term *= v[j];
    out += term;
  }
  return out;
}

std::string Monomial::label() const {
  static const char* names[4] = {"q0", "conj(q0)", "q1", "conj(q1)"};
  std::string out;
  for (int i = 0; i < 4; ++i) {
    if (e[i] == 0) continue;
    if (!out.empty()) out += " ";
    out += names[i];
    if (e[i] > 1) out += "^" + std::to_string(e[i]);
  }
  return out.empty() ? "1" : out;
}

double TransformStep::max_residual() const {
  return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

LmSolver::LmSolver(const SpatialOperator& op, double sigma_tol) {
  if (op.m < 3 || op.m % 2 == 0) throw ConfigError("L_m solver needs odd m >= 3");
  sigma_min_ = modpulse::sigma_min(op.L);
  if (sigma_min_ < sigma_tol)
    throw ResonanceError("L_" + std::to_string(op.m) + " is numerically singular (sigma_min " +
                         std::to_string(sigma_min_) + ")");
  lu_.compute(op.L);
}

cvec LmSolver::solve(const cvec& rhs) const { return lu_.solve(rhs); }

cvec solve_Lm(const SpatialOperator& op, const cvec& rhs) { return LmSolver(op).solve(rhs); }

cvec product_coeffs(const PeriodicCoefficient& r, const std::vector<cvec>& factors, int K) {
  const int deg = static_cast<int>(factors.size());
  int Kf = 0;
  for (const auto& f : factors) Kf = std::max(Kf, truncation_of(f));
  const int P = product_grid_size(deg, std::max(Kf, K), 0) + r.highest_harmonic();
  const FourierGrid grid(Kf, P + (P % 2));
  cvec vals = cvec::Ones(grid.points());
  for (const auto& f : factors) vals = vals.cwiseProduct(grid.to_grid(resize(f, Kf)));
  for (int j = 0; j < grid.points(); ++j) vals(j) *= r(grid.node(j));
  const FourierGrid out(K, grid.points());
  return out.from_grid(vals);
}

namespace {

cvec stack(const cvec& top, const cvec& bottom) {
  cvec out(top.size() + bottom.size());
  out << top, bottom;
  return out;
}

double binomial3(int j) { return j == 0 || j == 3 ? 1.0 : 3.0; }

}  // namespace

TransformStep general_step(const SpatialOperator& op, const PolySource& src) {
  const int M = src.M;
  if (static_cast<int>(src.a.size()) != M + 1 || static_cast<int>(src.b.size()) != M + 1)
    throw ConfigError("polynomial source must have M+1 coefficient pairs");
  const LmSolver solver(op);
  const int n = op.block();
  TransformStep st;
  st.m = op.m;
  st.h.assign(M + 1, cvec::Zero(n));
  st.g.assign(M + 1, cvec::Zero(n));
  for (int j = 0; j <= M; ++j) {
    const cvec hprev = j > 0 ? st.h[j - 1] : cvec::Zero(n);
    const cvec gprev = j > 0 ? st.g[j - 1] : cvec::Zero(n);
    const double w = M + 1 - j;
    st.g[j] = -src.a[j] + w * hprev;
    const cvec rhs = -src.b[j] - op.M * st.g[j] + w * gprev;
    st.h[j] = solver.solve(rhs);
    st.residuals.push_back((st.g[j] + src.a[j] - w * hprev).norm());
    st.labels.push_back("g_" + std::to_string(j));
    st.residuals.push_back((op.L * st.h[j] - rhs).norm());
    st.labels.push_back("L h_" + std::to_string(j));
  }
  for (int j = 0; j <= M; ++j) {
    st.monomials.push_back(Monomial{{M - j, 0, j, 0}});
    st.sources.push_back(stack(src.a[j], src.b[j]));
    st.shifts.push_back(stack(st.h[j], st.g[j]));
  }
  return st;
}

PolySource cubic_source(const SpatialOperator& op, const BlochPoint& point, const PeriodicCoefficient& r,
                        double gamma) {
  const int K = op.K;
  const cvec f = resize(point.f_hat, K);
  const cvec p = -I * resize(point.dlf_hat, K);
  const double pref = -gamma / (1.0 - op.c * op.c);
  PolySource src;
  src.m = op.m;
  src.M = 3;
  for (int j = 0; j <= 3; ++j) {
    std::vector<cvec> fac;
    for (int i = 0; i < 3 - j; ++i) fac.push_back(f);
    for (int i = 0; i < j; ++i) fac.push_back(p);
    src.a.push_back(cvec::Zero(op.block()));
    src.b.push_back(pref * binomial3(j) * product_coeffs(r, fac, K));
  }
  return src;
}

TransformStep m3_first_step(const SpatialOperator& A3, const BlochPoint& point, const PeriodicCoefficient& r,
                            double gamma) {
  if (A3.m != 3) throw ConfigError("m3_first_step requires the m = 3 operator");
  const int K = A3.K;
  const cvec f = resize(point.f_hat, K);
  const cvec g = resize(point.dlf_hat, K);
  const double pref = gamma / (1.0 - A3.c * A3.c);
  const cmat& Mm = A3.M;
  const LmSolver solver(A3);
  TransformStep st;
  st.m = 3;
  st.h.resize(4);
  std::vector<cvec> rhs(4);
  rhs[0] = pref * product_coeffs(r, {f, f, f}, K);
  st.h[0] = solver.solve(rhs[0]);
  rhs[1] = -3.0 * I * pref * product_coeffs(r, {f, f, g}, K) - 3.0 * Mm * st.h[0];
  st.h[1] = solver.solve(rhs[1]);
  rhs[2] = -3.0 * pref * product_coeffs(r, {f, g, g}, K) - 2.0 * Mm * st.h[1] + 6.0 * st.h[0];
  st.h[2] = solver.solve(rhs[2]);
  rhs[3] = I * pref * product_coeffs(r, {g, g, g}, K) - Mm * st.h[2] + 2.0 * st.h[1];
  st.h[3] = solver.solve(rhs[3]);
  st.g = {cvec::Zero(A3.block()), 3.0 * st.h[0], 2.0 * st.h[1], st.h[2]};
  for (int j = 0; j < 4; ++j) {
    st.residuals.push_back((A3.L * st.h[j] - rhs[j]).norm());
    st.labels.push_back("L3 h_" + std::to_string(j));
  }
  const auto src = cubic_source(A3, point, r, gamma);
  for (int j = 0; j < 4; ++j) {
    st.monomials.push_back(Monomial{{3 - j, 0, j, 0}});
    st.sources.push_back(stack(src.a[j], src.b[j]));
    st.shifts.push_back(stack(st.h[j], st.g[j]));
  }
  return st;
}

std::vector<cvec> m1_sources(const SpatialOperator& A1, const BlochPoint& point, const PeriodicCoefficient& r,
                             double gamma, double omega_tilde) {
  const int K = A1.K;
  const int n = A1.block();
  const cvec f = resize(point.f_hat, K);
  const cvec p = -I * resize(point.dlf_hat, K);
  const cvec fb = conj_function(f);
  const cvec pb = conj_function(p);
  const double sc = 1.0 / (1.0 - A1.c * A1.c);
  const cvec F0 = stack(f, cvec::Zero(n));
  const cvec F1 = stack(p, f);
  std::vector<cvec> H;
  H.push_back(omega_tilde * sc * (A1.Bm * F0));
  H.push_back(omega_tilde * sc * (A1.Bm * F1));
  const double nl = -3.0 * gamma * sc;
  const cvec zero = cvec::Zero(n);
  H.push_back(stack(zero, nl * product_coeffs(r, {f, f, fb}, K)));
  H.push_back(stack(zero, nl * product_coeffs(r, {f, f, pb}, K)));
  H.push_back(stack(zero, 2.0 * nl * product_coeffs(r, {f, fb, p}, K)));
  H.push_back(stack(zero, 2.0 * nl * product_coeffs(r, {f, p, pb}, K)));
  H.push_back(stack(zero, nl * product_coeffs(r, {p, p, fb}, K)));
  H.push_back(stack(zero, nl * product_coeffs(r, {p, p, pb}, K)));
  return H;
}

TransformStep m1_first_step(const SpatialOperator& A1, const JordanData& J, const BlochPoint& point,
                            const PeriodicCoefficient& r, double gamma, double omega_tilde, ChainOrder order) {
  const auto H = m1_sources(A1, point, r, gamma, omega_tilde);
  const DeflatedSolver solver(A1, J);
  const auto n2 = J.F0.size();
  std::vector<cvec> S(8, cvec::Zero(n2));
  // Chain couplings: S^(j) receives sum coef * S^(i).
  const std::vector<std::vector<std::pair<int, double>>> feed = {
      {}, {{0, 1.0}}, {}, {{2, 1.0}}, {{2, 2.0}}, {{3, 2.0}, {4, 1.0}}, {{4, 1.0}}, {{5, 1.0}, {6, 1.0}}};
  auto rhs_of = [&](int j) {
    cvec rhs = -projector_Pi(J, H[j]);
    for (auto [i, w] : feed[j]) rhs += w * S[i];
    return rhs;
  };
  std::vector<int> sequence = {0, 1, 2, 3, 4, 5, 6, 7};
  if (order == ChainOrder::s5_before_s3_s4) sequence = {0, 1, 2, 5, 3, 4, 6, 7};
  for (int j : sequence) S[j] = solver.solve(rhs_of(j));

  TransformStep st;
  st.m = 1;
  st.monomials = {Monomial{{1, 0, 0, 0}}, Monomial{{0, 0, 1, 0}}, Monomial{{2, 1, 0, 0}}, Monomial{{2, 0, 0, 1}},
                  Monomial{{1, 1, 1, 0}}, Monomial{{1, 0, 1, 1}}, Monomial{{0, 1, 2, 0}}, Monomial{{0, 0, 2, 1}}};
  st.sources = H;
  st.shifts = S;
  for (int j = 0; j < 8; ++j) {
    const cvec lhs = projector_Pi(J, A1.apply(S[j]));
    const cvec rhs = rhs_of(j);
    st.residuals.push_back((lhs - rhs).norm() / (1.0 + rhs.norm()));
    st.labels.push_back("Pi A1 S^(" + std::to_string(j) + ") [" + st.monomials[j].label() + "]");
    st.residuals.push_back((projector_Pi(J, S[j]) - S[j]).norm() / (1.0 + S[j].norm()));
    st.labels.push_back("Pi S^(" + std::to_string(j) + ") = S^(" + std::to_string(j) + ")");
  }
  return st;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

EliminationFit verify_elimination(const TransformStep& st, const EliminationInputs& in, const ReducedField& Z,
                                  const std::vector<double>& epsilons) {
  if (!in.rho) throw ConfigError("verify_elimination needs the medium");
  if (st.m == 1 && !in.jordan) throw ConfigError("verify_elimination for m = 1 needs Jordan data");
  const auto A = assemble_Am(*in.rho, st.m, in.omega0, in.cg, in.l0, in.K);
  const auto n2 = A.matrix.rows();
  const auto n = A.block();
  const double sc = in.omega_tilde / (1.0 - in.cg * in.cg);
  auto project = [&](const cvec& v) { return st.m == 1 ? projector_Pi(*in.jordan, v) : v; };

  std::mt19937_64 gen(in.seed);
  std::uniform_real_distribution<double> rad(0.0, 1.0), ang(0.0, two_pi);
  auto draw = [&] { return in.amplitude * std::sqrt(rad(gen)) * std::exp(I * ang(gen)); };
  std::vector<std::pair<cplx, cplx>> pts;
  for (int s = 0; s < in.samples; ++s) {
    const cplx a = draw();
    const cplx b = draw();
    pts.emplace_back(a, b);
  }

  EliminationFit fit;
  fit.epsilons = epsilons;
  for (double eps : epsilons) {
    const auto Aeps = assemble_Am(*in.rho, st.m, in.omega0 + eps * eps * in.omega_tilde, in.cg, in.l0, in.K,
                                  in.omega0);
    double worst = 0.0, worst_control = 0.0;
    int informative = 0;
    for (auto [q0, q1] : pts) {
      const auto z = Z(q0, q1);
      const cplx dq0 = q1 + eps * eps * z[1];
      const cplx dq1 = eps * eps * z[0];
      cvec Hq = cvec::Zero(n2), Y = cvec::Zero(n2), Ydot = cvec::Zero(n2);
      for (std::size_t j = 0; j < st.monomials.size(); ++j) {
        const cplx mu = st.monomials[j].value(q0, q1);
        Hq += mu * st.sources[j];
        Y += mu * st.shifts[j];
        Ydot += st.monomials[j].derivative(q0, q1, dq0, dq1) * st.shifts[j];
      }
      // Omega-correction of B_1 acting on the kernel part q0 F0 + q1 F1.
      cvec kernel_shift = cvec::Zero(n2);
      if (st.m == 1) {
        const cvec core = q0 * in.jordan->F0 + q1 * in.jordan->F1;
        kernel_shift.tail(n) = -in.omega_tilde * core.head(n);
      }
      const cvec extra = sc * (Aeps.Bm * Y + kernel_shift);
      const cvec R = project(Hq + A.matrix * Y - Ydot + eps * eps * extra);
      const cvec R0 = project(Hq + eps * eps * sc * kernel_shift);
      const double denom = project(Hq).norm();
      if (denom <= 1e-12 * Hq.norm()) continue;
      ++informative;
      worst = std::max(worst, R.norm() / denom);
      worst_control = std::max(worst_control, R0.norm() / denom);
    }
    fit.residuals.push_back(worst);
    fit.control_residuals.push_back(worst_control);
    if (informative == 0) fit.trivial = true;
  }
  if (fit.trivial) {
    fit.slope = fit.control_slope = std::nan("");
    return fit;
  }
  fit.slope = loglog_slope(fit.epsilons, fit.residuals);
  fit.control_slope = loglog_slope(fit.epsilons, fit.control_residuals);
  return fit;
}

}  // namespace modpulse
