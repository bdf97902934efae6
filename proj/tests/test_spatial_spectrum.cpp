#include "doctest.h"

#include "modpulse/errors.hpp"
#include "modpulse/spatial_spectrum.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace modpulse;

namespace {

const PeriodicCoefficient unit = PeriodicCoefficient::constant(1.0);
const PeriodicCoefficient bumpy({1.0, 0.3, 0.05});

cvec random_vector(std::mt19937& gen, Eigen::Index n) {
  std::normal_distribution<double> d;
  cvec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(d(gen), d(gen));
  return v;
}

std::vector<cplx> lambdas(const std::vector<SpectralPoint>& s) {
  std::vector<cplx> out;
  for (const auto& p : s) out.push_back(p.lambda);
  return out;
}

}  // namespace

TEST_CASE("operator blocks") {
  const auto p = compute_bloch_point(unit, 0.35, 0, 16);
  const auto op = assemble_Am(unit, 3, p.omega, p.cg, 0.35, 8);
  const double sc = 1.0 - p.cg * p.cg;
  for (int k = -8; k <= 8; ++k) {
    const double q = k + 3 * 0.35;
    CHECK(std::abs(op.L(k + 8, k + 8) * sc - (q * q + 1.0 - 9 * p.omega * p.omega)) < 1e-12);
    CHECK(std::abs(op.M(k + 8, k + 8) - 2.0 / sc * (I * 3.0 * p.cg * p.omega - I * q)) < 1e-12);
  }
  cmat offdiag = op.L;
  offdiag.diagonal().setZero();
  CHECK(offdiag.norm() == 0.0);
  CHECK((op.matrix - op.matrix.adjoint()).norm() > 1.0);
  CHECK_THROWS_AS(assemble_Am(unit, 1, 1.0, 1.0, 0.35, 8), ConfigError);
}

TEST_CASE("B_m is the derivative of A_m in omega") {
  const auto p = compute_bloch_point(bumpy, 0.3, 0, 16);
  const double eps2 = 1e-3, wt = -1.0;
  const double w = p.omega + wt * eps2;
  const auto A0 = assemble_Am(bumpy, 3, p.omega, p.cg, 0.3, 8);
  const auto Aw = assemble_Am(bumpy, 3, w, p.cg, 0.3, 8, p.omega);
  const cmat diff = Aw.matrix - A0.matrix - eps2 * wt / (1 - p.cg * p.cg) * Aw.Bm;
  CHECK(diff.norm() < 1e-12);
}

TEST_CASE("constant medium spectrum matches the closed form") {
  const auto p = compute_bloch_point(unit, 0.35, 0, 16);
  for (int m : {1, 3, 5}) {
    const auto op = assemble_Am(unit, m, p.omega, p.cg, 0.35, 32);
    const auto spec = spectrum(op, unit);
    std::vector<cplx> ref;
    for (const auto& e : closed_form_eigenvalues(m, 0, 0.35, -60, 60))
      if (std::abs(e.lambda.imag()) <= 10.0) ref.push_back(e.lambda);
    std::vector<cplx> means;
    int zero_mult = 0;
    for (const auto& c : cluster_eigenvalues(lambdas(spec))) {
      means.push_back(c.mean);
      if (std::abs(c.mean) < 1e-6) zero_mult += c.multiplicity;
    }
    CHECK(one_sided_hausdorff(ref, means) <= 1e-8);
    CHECK(zero_mult == (m == 1 ? 2 : 0));
    for (const auto& s : spec) {
      CHECK(s.residual < 1e-8);
      CHECK(s.dispersion_residual < 1e-6);
    }
  }
}

TEST_CASE("closed form special values") {
  const double w = std::sqrt(1.0 + 0.35 * 0.35);
  const auto m1 = closed_form_eigenvalues(1, 0, 0.35, 0, 1);
  CHECK(std::abs(m1[0].lambda) == 0.0);
  CHECK(std::abs(m1[1].lambda) == 0.0);
  CHECK(m1[2].cls == SpectralClass::unstable);
  CHECK(m1[2].lambda.imag() == doctest::Approx(-w * w));
  CHECK(m1[2].lambda.imag() == doctest::Approx(-1.1225));
  const auto m3 = closed_form_eigenvalues(3, 0, 0.35, 0, 0);
  CHECK(m3[0].lambda.imag() == doctest::Approx(w * std::sqrt(8.0)));
  CHECK(m3[0].lambda.imag() == doctest::Approx(2.99666).epsilon(1e-5));
}

TEST_CASE("reversible symmetry of the spectrum") {
  const auto p = compute_bloch_point(bumpy, 0.3, 0, 32);
  for (int m : {1, 3}) {
    const auto op = assemble_Am(bumpy, m, p.omega, p.cg, 0.3, 32);
    const auto spec = spectrum(op, bumpy);
    std::vector<cplx> mirrored;
    for (const auto& s : spec) mirrored.push_back(-std::conj(s.lambda));
    std::vector<cplx> a, b;
    for (const auto& c : cluster_eigenvalues(lambdas(spec))) a.push_back(c.mean);
    for (const auto& c : cluster_eigenvalues(mirrored)) b.push_back(c.mean);
    // Restrict to modes well inside the filtered window.
    std::vector<cplx> inner_a;
    for (auto z : a)
      if (std::abs(z) < 8.0) inner_a.push_back(z);
    CHECK(one_sided_hausdorff(inner_a, b) < 1e-8);
    for (const auto& s : spec) CHECK(s.dispersion_residual < 1e-6);
  }
}

TEST_CASE("Jordan chain in a periodic medium") {
  const auto p = compute_bloch_point(bumpy, 0.3, 0, 32);
  const auto A1 = assemble_Am(bumpy, 1, p.omega, p.cg, 0.3, 32);
  const auto J = jordan_chain_m1(A1, p);
  CHECK(J.max_chain_residual() <= 1e-8);
  CHECK(J.duality_error <= 1e-8);
  CHECK(std::abs(J.nu - J.nu_closed_form) < 1e-10);
  CHECK(std::abs(J.nu.real()) < 1e-12);
}

TEST_CASE("Jordan chain in the constant medium") {
  const auto p = compute_bloch_point(unit, 0.35, 0, 16);
  const auto A1 = assemble_Am(unit, 1, p.omega, p.cg, 0.35, 16);
  const auto J = jordan_chain_m1(A1, p);
  CHECK(std::abs(J.nu) < 1e-14);
  CHECK(J.F1.head(A1.block()).norm() < 1e-14);
  CHECK(std::abs(J.duality(1, 0) - 1.0) < 1e-12);
  CHECK(J.max_chain_residual() <= 1e-12);
}

TEST_CASE("projector properties") {
  const auto p = compute_bloch_point(bumpy, 0.3, 0, 24);
  const auto A1 = assemble_Am(bumpy, 1, p.omega, p.cg, 0.3, 24);
  const auto J = jordan_chain_m1(A1, p);
  std::mt19937 gen(7);
  CHECK(projector_Pi(J, J.F0).norm() < 1e-12);
  CHECK(projector_Pi(J, J.F1).norm() < 1e-12);
  const cmat P = projector_matrix(J);
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
  for (int t = 0; t < 20; ++t) {
    const cvec psi = random_vector(gen, J.F0.size());
    const cvec pp = projector_Pi(J, psi);
    CHECK(std::abs(inner2(J.G0, pp)) < 1e-10);
    CHECK(std::abs(inner2(J.G1, pp)) < 1e-10);
    CHECK((projector_Pi(J, pp) - pp).norm() < 1e-10 * psi.norm());
    CHECK((projector_Pi(J, A1.apply(psi)) - A1.apply(pp)).norm() < 1e-8 * psi.norm());
    CHECK((P * psi - pp).norm() < 1e-12 * psi.norm());
  }
  // A vector orthogonal to G0 and G1 is fixed.
  cvec psi = random_vector(gen, J.F0.size());
  cmat G(psi.size(), 2);
  G << J.G0, J.G1;
  psi -= G * (G.adjoint() * G).inverse() * (G.adjoint() * psi);
  CHECK((projector_Pi(J, psi) - psi).norm() < 1e-12 * psi.norm());
}

TEST_CASE("deflated solver") {
  const auto p = compute_bloch_point(bumpy, 0.3, 0, 24);
  const auto A1 = assemble_Am(bumpy, 1, p.omega, p.cg, 0.3, 24);
  const auto J = jordan_chain_m1(A1, p);
  const DeflatedSolver solver(A1, J);
  std::mt19937 gen(3);
  const cvec rhs = projector_Pi(J, random_vector(gen, J.F0.size()));
  const cvec S = solver.solve(rhs);
  CHECK((projector_Pi(J, S) - S).norm() < 1e-10 * S.norm());
  CHECK((projector_Pi(J, A1.apply(S)) - rhs).norm() < 1e-9 * rhs.norm());
}

TEST_CASE("resolvent health") {
  const auto p = compute_bloch_point(unit, 0.35, 0, 32);
  const auto rep = resolvent_health(unit, p, 2, 32);
  CHECK(rep.healthy);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].near_zero_count == 2);
  // Constant medium: A_m is block diagonal, so sigma_min is the smallest 2x2 block value.
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const int m = rep.rows[i].m;
    const auto op = assemble_Am(unit, m, p.omega, p.cg, 0.35, 32);
    double best = 1e300;
    const int K = 32, n = op.block();
    for (int k = 0; k < n; ++k) {
      Eigen::Matrix2cd b;
      b << 0, 1, op.L(k, k), op.M(k, k);
      best = std::min(best, Eigen::JacobiSVD<Eigen::Matrix2cd>(b).singularValues()(1));
    }
    CHECK(rep.rows[i].sigma_min == doctest::Approx(best).epsilon(1e-10));
    double min_abs = 1e300;
    for (const auto& e : closed_form_eigenvalues(m, 0, 0.35, -K, K)) min_abs = std::min(min_abs, std::abs(e.lambda));
    CHECK(rep.rows[i].sigma_min <= min_abs + 1e-12);
    CHECK(rep.rows[i].sigma_min > 0.0);
  }
  const auto q = compute_bloch_point(bumpy, 0.3, 0, 48);
  const auto a = resolvent_health(bumpy, q, 2, 24);
  const auto b = resolvent_health(bumpy, q, 2, 48);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(std::abs(a.rows[i].sigma_min - b.rows[i].sigma_min) < 1e-6);
}
