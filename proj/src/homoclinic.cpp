#include "modpulse/homoclinic.hpp"

#include "modpulse/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>

namespace modpulse {

const std::array<Monomial, 6> Z1Field::cubic_monomials = {
    Monomial{{2, 1, 0, 0}}, Monomial{{2, 0, 0, 1}}, Monomial{{1, 1, 1, 0}},
    Monomial{{1, 0, 1, 1}}, Monomial{{0, 1, 2, 0}}, Monomial{{0, 0, 2, 1}}};

Z1Field::Z1Field(const JordanData& J, const BlochPoint& point, const PeriodicCoefficient& r, double gamma,
                 double omega_tilde, int min_points) {
  const int K = point.truncation();
  const cvec f = point.f_hat;
  const cvec g = point.dlf_hat;
  const cvec gt = g - I * J.nu * f;
  const double w0 = point.omega, c = point.cg, wpp = point.omega_pp;
  if (wpp == 0.0) throw DegeneracyError("omega'' vanishes; reduced field is singular");

  const double lp = 2.0 * omega_tilde / (w0 * wpp);
  lin[0] = {lp * (-w0), lp * I * (w0 * inner(f, g) + c)};
  const cplx gf = inner(gt, f);
  lin[1] = {lp * gf * I * w0, lp * (gf * c + w0 * inner(gt, g))};

  const FourierGrid grid(K, std::max(min_points, product_grid_size(4, K, 0) + r.highest_harmonic()));
  const cvec fx = grid.to_grid(f);
  const cvec px = grid.to_grid(cvec(-I * g));
  const cvec w1 = fx;
  const cvec w2 = grid.to_grid(cvec(I * gt));
  const double cp = -3.0 * gamma / (w0 * wpp);
  for (int t = 0; t < 6; ++t) {
    cplx a = 0.0, b = 0.0;
    for (int j = 0; j < grid.points(); ++j) {
      const cplx F = fx(j), P = px(j);
      cplx phi;
      switch (t) {
        case 0: phi = F * F * std::conj(F); break;
        case 1: phi = F * F * std::conj(P); break;
        case 2: phi = 2.0 * F * P * std::conj(F); break;
        case 3: phi = 2.0 * F * P * std::conj(P); break;
        case 4: phi = P * P * std::conj(F); break;
        default: phi = P * P * std::conj(P); break;
      }
      phi *= r(grid.node(j));
      a += std::conj(w1(j)) * phi;
      b += std::conj(w2(j)) * phi;
    }
    cub[0][t] = cp * two_pi * a / double(grid.points());
    cub[1][t] = cp * two_pi * b / double(grid.points());
  }
}

std::array<cplx, 2> Z1Field::linear_part(cplx q0, cplx q1) const {
  return {lin[0][0] * q0 + lin[0][1] * q1, lin[1][0] * q0 + lin[1][1] * q1};
}

std::array<cplx, 2> Z1Field::cubic_part(cplx q0, cplx q1) const {
  std::array<cplx, 2> out{0.0, 0.0};
  for (int t = 0; t < 6; ++t) {
    const cplx mu = cubic_monomials[t].value(q0, q1);
    out[0] += cub[0][t] * mu;
    out[1] += cub[1][t] * mu;
  }
  return out;
}

std::array<cplx, 2> Z1Field::operator()(cplx q0, cplx q1) const {
  const auto a = linear_part(q0, q1);
  const auto b = cubic_part(q0, q1);
  return {a[0] + b[0], a[1] + b[1]};
}

std::array<std::array<cplx, 4>, 2> Z1Field::wirtinger(cplx q0, cplx q1) const {
  const cplx v[4] = {q0, std::conj(q0), q1, std::conj(q1)};
  std::array<std::array<cplx, 4>, 2> d{};
  for (int row = 0; row < 2; ++row) {
    d[row][0] = lin[row][0];
    d[row][2] = lin[row][1];
  }
  for (int t = 0; t < 6; ++t) {
    const auto& e = cubic_monomials[t].e;
    for (int i = 0; i < 4; ++i) {
      if (e[i] == 0) continue;
      cplx term = double(e[i]);
      for (int j = 0; j < 4; ++j)
        for (int p = 0; p < e[j] - (j == i ? 1 : 0); ++p) term *= v[j];
      d[0][i] += cub[0][t] * term;
      d[1][i] += cub[1][t] * term;
    }
  }
  return d;
}

ReducedField Z1Field::as_function() const {
  return [self = *this](cplx q0, cplx q1) { return self(q0, q1); };
}

std::array<cplx, 2> compute_Z1(const JordanData& J, const BlochPoint& point, const PeriodicCoefficient& r,
                               double gamma, double omega_tilde, const ReducedState& state) {
  return Z1Field(J, point, r, gamma, omega_tilde)(state.q0, state.q1);
}

std::array<cplx, 2> truncated_rhs(const Z1Field& Z, const ReducedState& state, double epsilon) {
  const auto z = Z(state.q0, state.q1);
  const double e2 = epsilon * epsilon;
  return {e2 * z[0], e2 * z[1]};
}

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// y = (Re q0, Im q0, Re q1, Im q1); y' = (q1 + eps^2 Z[1], eps^2 Z[0]).
Vec4 field(const Z1Field& Z, double e2, const Vec4& y) {
  const cplx q0(y(0), y(1)), q1(y(2), y(3));
  const auto z = Z(q0, q1);
  const cplx d0 = q1 + e2 * z[1];
  const cplx d1 = e2 * z[0];
  return Vec4(d0.real(), d0.imag(), d1.real(), d1.imag());
}

Mat4 jacobian(const Z1Field& Z, double e2, const Vec4& y) {
  const cplx q0(y(0), y(1)), q1(y(2), y(3));
  const auto d = Z.wirtinger(q0, q1);
  Mat4 Jm = Mat4::Zero();
  // Output rows 0,1 from Z[1] plus q1; rows 2,3 from Z[0].
  const int zrow[2] = {1, 0};
  for (int out = 0; out < 2; ++out) {
    const auto& w = d[zrow[out]];
    for (int var = 0; var < 2; ++var) {
      const cplx dre = e2 * (w[2 * var] + w[2 * var + 1]);
      const cplx dim = e2 * I * (w[2 * var] - w[2 * var + 1]);
      Jm(2 * out, 2 * var) = dre.real();
      Jm(2 * out + 1, 2 * var) = dre.imag();
      Jm(2 * out, 2 * var + 1) = dim.real();
      Jm(2 * out + 1, 2 * var + 1) = dim.imag();
    }
  }
  Jm(0, 2) += 1.0;
  Jm(1, 3) += 1.0;
  return Jm;
}

struct Collocation {
  const Z1Field& Z;
  double e2;
  double h;
  int n;  // intervals

  Eigen::VectorXd residual(const Eigen::VectorXd& y, const Eigen::Matrix<double, 2, 4>& right) const {
    Eigen::VectorXd R(4 * (n + 1));
    const Vec4 y0 = y.segment<4>(0);
    R(0) = y0(1);
    R(1) = y0(2);
    for (int i = 0; i < n; ++i) {
      const Vec4 a = y.segment<4>(4 * i), b = y.segment<4>(4 * i + 4);
      const Vec4 fa = field(Z, e2, a), fb = field(Z, e2, b);
      const Vec4 ym = 0.5 * (a + b) + h / 8.0 * (fa - fb);
      const Vec4 fm = field(Z, e2, ym);
      R.segment<4>(2 + 4 * i) = b - a - h / 6.0 * (fa + 4.0 * fm + fb);
    }
    R.segment<2>(4 * n + 2) = right * y.segment<4>(4 * n);
    return R;
  }

  Eigen::SparseMatrix<double> jacobian_matrix(const Eigen::VectorXd& y,
                                              const Eigen::Matrix<double, 2, 4>& right) const {
    std::vector<Eigen::Triplet<double>> T;
    T.reserve(32 * n + 16);
    T.emplace_back(0, 1, 1.0);
    T.emplace_back(1, 2, 1.0);
    const Mat4 Id = Mat4::Identity();
    for (int i = 0; i < n; ++i) {
      const Vec4 a = y.segment<4>(4 * i), b = y.segment<4>(4 * i + 4);
      const Vec4 fa = field(Z, e2, a), fb = field(Z, e2, b);
      const Vec4 ym = 0.5 * (a + b) + h / 8.0 * (fa - fb);
      const Mat4 Ja = jacobian(Z, e2, a), Jb = jacobian(Z, e2, b), Jmid = jacobian(Z, e2, ym);
      const Mat4 da = -Id - h / 6.0 * (Ja + 4.0 * Jmid * (0.5 * Id + h / 8.0 * Ja));
      const Mat4 db = Id - h / 6.0 * (Jb + 4.0 * Jmid * (0.5 * Id - h / 8.0 * Jb));
      for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
          if (da(r, c) != 0.0) T.emplace_back(2 + 4 * i + r, 4 * i + c, da(r, c));
          if (db(r, c) != 0.0) T.emplace_back(2 + 4 * i + r, 4 * i + 4 + c, db(r, c));
        }
    }
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 4; ++c) T.emplace_back(4 * n + 2 + r, 4 * n + c, right(r, c));
    Eigen::SparseMatrix<double> Jm(4 * (n + 1), 4 * (n + 1));
    Jm.setFromTriplets(T.begin(), T.end());
    return Jm;
  }
};

// Rows annihilating the unstable subspace of the linearization at the origin.
Eigen::Matrix<double, 2, 4> unstable_rows(const Z1Field& Z, double e2) {
  const Mat4 M = jacobian(Z, e2, Vec4::Zero());
  Eigen::EigenSolver<Mat4> es(M.transpose());
  Eigen::Matrix<double, 2, 4> rows;
  int count = 0;
  for (int i = 0; i < 4 && count < 2; ++i) {
    const cplx lam = es.eigenvalues()(i);
    if (lam.real() <= 0.0) continue;
    const Eigen::Vector4cd w = es.eigenvectors().col(i);
    if (std::abs(lam.imag()) < 1e-14 * std::abs(lam)) {
      rows.row(count++) = w.real().transpose() / w.real().norm();
    } else if (lam.imag() > 0.0) {
      if (count > 0) throw NumericalError("unstable subspace of the limit matrix is not two-dimensional");
      rows.row(0) = w.real().transpose() / w.real().norm();
      rows.row(1) = w.imag().transpose() / w.imag().norm();
      count = 2;
    }
  }
  if (count != 2) throw NumericalError("limit matrix is not hyperbolic with a two-dimensional unstable subspace");
  return rows;
}

}  // namespace

HomoclinicOrbit refine_homoclinic(const Z1Field& Z, const EnvelopeParams& params, double epsilon,
                                  const HomoclinicOptions& opts) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const double Lmin = 30.0 / (epsilon * params.gamma2);
  const double L = opts.half_length > 0.0 ? opts.half_length : Lmin;
  if (L < Lmin * (1.0 - 1e-12)) throw ConfigError("half length below 30 / (eps gamma2)");
  const int n = static_cast<int>(std::ceil(L / opts.spacing));
  const double h = L / n;
  const double e2 = epsilon * epsilon;
  const Collocation col{Z, e2, h, n};
  const auto right = unstable_rows(Z, e2);

  Eigen::VectorXd y(4 * (n + 1));
  for (int i = 0; i <= n; ++i) {
    const double X = epsilon * i * h;
    y.segment<4>(4 * i) << soliton(params, X), 0.0, epsilon * soliton_dX(params, X), 0.0;
  }

  HomoclinicOrbit orbit;
  orbit.epsilon = epsilon;
  Eigen::VectorXd R = col.residual(y, right);
  double rn = R.norm();
  orbit.newton_history.push_back(rn);
  const double scale = params.gamma1 * e2;
  bool converged = false;
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (rn <= opts.tolerance * scale) {
      converged = true;
      break;
    }
    const auto Jm = col.jacobian_matrix(y, right);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Jm);
    if (lu.info() != Eigen::Success) throw NumericalError("collocation Jacobian is singular");
    const Eigen::VectorXd dy = lu.solve(-R);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opts.max_halvings; ++k, t *= 0.5) {
      const Eigen::VectorXd trial = y + t * dy;
      const Eigen::VectorXd Rt = col.residual(trial, right);
      if (Rt.norm() < rn || k == opts.max_halvings) {
        y = trial;
        R = Rt;
        rn = Rt.norm();
        accepted = true;
        break;
      }
    }
    orbit.iterations = it + 1;
    orbit.newton_history.push_back(rn);
    if (!accepted) break;
    if (t * dy.lpNorm<Eigen::Infinity>() < 1e-14 * params.gamma1 && rn <= 1e3 * opts.tolerance * scale) {
      converged = true;
      break;
    }
  }
  if (!converged && rn <= opts.tolerance * scale) converged = true;
  if (!converged)
    throw ConvergenceError("homoclinic Newton iteration did not converge in " +
                           std::to_string(opts.max_iterations) + " iterations");

  // Reflect onto [-L, L]: q0(-xi) = conj q0(xi), q1(-xi) = -conj q1(xi).
  const int total = 2 * n + 1;
  orbit.xi.resize(total);
  orbit.q0.resize(total);
  orbit.q1.resize(total);
  for (int i = 0; i <= n; ++i) {
    const cplx q0(y(4 * i), y(4 * i + 1)), q1(y(4 * i + 2), y(4 * i + 3));
    orbit.xi[n + i] = i * h;
    orbit.q0[n + i] = q0;
    orbit.q1[n + i] = q1;
    orbit.xi[n - i] = -i * h;
    orbit.q0[n - i] = std::conj(q0);
    orbit.q1[n - i] = -std::conj(q1);
  }
  const Vec4 y0 = y.segment<4>(0);
  orbit.reversibility_residual = std::max(std::abs(y0(1)), std::abs(y0(2)));
  const Vec4 d0 = field(Z, e2, y0);
  // Right derivative (d0) against the derivative of the reflected branch.
  const Vec4 left(-d0(0), d0(1), d0(2), -d0(3));
  orbit.derivative_jump = (d0 - left).lpNorm<Eigen::Infinity>();

  for (int i = 0; i < total; ++i) {
    const double X = epsilon * orbit.xi[i];
    orbit.proximity_q0 = std::max(orbit.proximity_q0, std::abs(orbit.q0[i] - soliton(params, X)));
    orbit.proximity_q1 = std::max(orbit.proximity_q1, std::abs(orbit.q1[i] - epsilon * soliton_dX(params, X)));
  }

  // Tail fit of log|q0| on the decaying part of the half orbit.
  std::vector<double> xs, ls;
  const double peak = std::abs(orbit.q0[n]);
  for (int i = 0; i <= n; ++i) {
    const double a = std::abs(orbit.q0[n + i]);
    if (a < 1e-2 * peak && a > 1e-9 * peak) {
      xs.push_back(i * h);
      ls.push_back(std::log(a));
    }
  }
  if (xs.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ls[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ls[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    orbit.decay_rate = -slope / epsilon;
    double C = 0.0;
    for (int i = 0; i <= n; ++i)
      C = std::max(C, std::abs(orbit.q0[n + i]) * std::exp(epsilon * orbit.decay_rate * i * h));
    orbit.decay_constant = C;
  }
  return orbit;
}

double soliton_truncation_residual(const Z1Field& Z, const EnvelopeParams& params, double epsilon,
                                   double half_length, double spacing) {
  const double L = half_length > 0.0 ? half_length : 30.0 / (epsilon * params.gamma2);
  const int n = static_cast<int>(std::ceil(L / spacing));
  const double h = L / n, e2 = epsilon * epsilon;
  double worst = 0.0;
  for (int i = -n; i <= n; ++i) {
    const double X = epsilon * i * h;
    const cplx q0 = soliton(params, X), q1 = epsilon * soliton_dX(params, X);
    const auto z = Z(q0, q1);
    const cplx r1 = e2 * soliton_dXX(params, X) - e2 * z[0];
    const cplx r0 = epsilon * soliton_dX(params, X) - q1 - e2 * z[1];
    worst = std::max({worst, std::abs(r1), std::abs(r0)});
  }
  return worst / e2;
}

}  // namespace modpulse
