#include "doctest.h"

#include "modpulse/envelope.hpp"
#include "modpulse/errors.hpp"
#include "modpulse/wave_sim.hpp"

#include <cmath>

using namespace modpulse;

namespace {

const PeriodicCoefficient unit = PeriodicCoefficient::constant(1.0);
const PeriodicCoefficient bumpy({1.0, 0.3, 0.05});

std::vector<double> sample(const LatticeGrid& g, const std::function<double(double)>& f) {
  std::vector<double> out(g.size());
  for (int j = 0; j < g.size(); ++j) out[j] = f(g.x(j));
  return out;
}

double bump(double x, double c, double w) {
  const double s = (x - c) / w;
  return std::abs(s) < 1.0 ? std::pow(1.0 - s * s, 4) : 0.0;
}

struct Pulse {
  BlochPoint point;
  EnvelopeParams params;
  LatticeGrid grid{40, 40 * 128};
  double xc;
  InitialData data;

  explicit Pulse(double eps) {
    point = compute_bloch_point(unit, 0.35, 0, 16);
    params = make_envelope_params(point, unit, 1.0, eps);
    xc = grid.length() / 2 - 16.0;
    const double w = 1.0 / (eps * params.gamma2);
    data = build_initial_data(params, point, soliton_profile(params), grid, xc,
                              TaperSpec{std::min(10 * w, 0.45 * grid.length() - w), w});
  }

  PulseTracking tracking() const {
    PulseTracking tr;
    tr.point = &point;
    tr.l0 = 0.35;
    tr.omega = params.omega();
    tr.epsilon = params.epsilon;
    tr.gamma2 = params.gamma2;
    tr.reference = [this](double x, double t) {
      return h_app(params, point, x - xc - params.cg * t, 0.35 * x - params.omega() * t, x);
    };
    return tr;
  }
};

}  // namespace

TEST_CASE("discrete plane wave") {
  const LatticeGrid g(2, 128);
  const double dx = g.dx(), k = 1.5;
  const double dt = 0.5 * dx;
  const double s = std::sin(k * dx / 2) / (dx / 2);
  const double wd = 2.0 / dt * std::asin(0.5 * dt * std::sqrt(s * s + 1.0));
  auto exact = [&](double t) { return sample(g, [&](double x) { return std::cos(k * x) * std::cos(wd * t); }); };
  WaveSolver solver(g, unit, unit, 0.0, dt);
  solver.start_pair(exact(-dt), exact(0.0), 0.0);
  double worst = 0.0;
  for (int n = 1; n <= 200; ++n) {
    solver.step();
    const auto e = exact(n * dt);
    for (int j = 0; j < g.size(); ++j) worst = std::max(worst, std::abs(solver.field().u_curr[j] - e[j]));
  }
  CHECK(worst <= 1e-10 * 200);
}

TEST_CASE("zero field and argument checks") {
  const LatticeGrid g(4, 256);
  WaveSolver solver(g, bumpy, unit, 1.0, 0.5 * g.dx());
  solver.start(std::vector<double>(256, 0.0), std::vector<double>(256, 0.0));
  for (int n = 0; n < 50; ++n) solver.step();
  for (double v : solver.field().u_curr) CHECK(v == 0.0);
  CHECK_THROWS_AS(WaveSolver(g, unit, unit, 0.0, 0.95 * g.dx()), ConfigError);
  CHECK_THROWS_AS(LatticeGrid(4, 250), ConfigError);
  CHECK_THROWS_AS(solver.start(std::vector<double>(10, 0.0), std::vector<double>(10, 0.0)), ConfigError);
}

TEST_CASE("discrete energy is conserved for the linear equation") {
  const LatticeGrid g(4, 4 * 64);
  const double c = g.length() / 2;
  const auto u0 = sample(g, [&](double x) { return bump(x, c, 6.0) * std::cos(1.3 * x); });
  const auto u1 = sample(g, [&](double x) { return 0.3 * bump(x, c - 1.0, 4.0); });
  SimConfig cfg;
  cfg.dt_factor = 0.5;
  cfg.T = 10000 * 0.5 * g.dx();
  cfg.stride = 1000;
  const auto d = simulate(g, bumpy, unit, 0.0, u0, u1, cfg);
  double drift = 0.0;
  for (double e : d.energy) drift = std::max(drift, std::abs(e - d.energy.front()) / d.energy.front());
  CHECK(drift <= 1e-6);
}

TEST_CASE("blow-up is reported with the last valid time") {
  const LatticeGrid g(1, 64);
  WaveSolver solver(g, unit, unit, 1.0, 0.5 * g.dx());
  solver.start(std::vector<double>(64, 3.0), std::vector<double>(64, 0.0));
  bool thrown = false;
  try {
    for (int n = 0; n < 100000; ++n) solver.step();
  } catch (const BlowUpError& e) {
    thrown = true;
    CHECK(e.last_valid_time() > 0.0);
  }
  CHECK(thrown);
}

TEST_CASE("demodulation") {
  const Pulse p(0.1);
  const auto& g = p.grid;
  const double t = 0.0;
  const auto u = sample(g, [&](double x) {
    return h_app(p.params, p.point, x - p.xc, 0.35 * x - p.params.omega() * t, x);
  });
  const double dz = 1e-6;
  const auto up = sample(g, [&](double x) {
    return h_app(p.params, p.point, x - p.xc, 0.35 * x - p.params.omega() * dz, x);
  });
  std::vector<double> ut(g.size());
  for (int j = 0; j < g.size(); ++j) ut[j] = (up[j] - u[j]) / dz;
  const auto env = demodulate(g, u, ut, p.point, 0.35, p.params.omega(), t);
  const double amp = p.params.epsilon * p.params.gamma1;
  double worst = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    const double expect = amp / std::cosh(p.params.epsilon * p.params.gamma2 * (g.x(j) - p.xc));
    worst = std::max(worst, std::abs(std::abs(env[j]) - expect));
  }
  CHECK(worst <= 0.02 * amp);

  const std::vector<double> zero(g.size(), 0.0);
  for (const auto& z : demodulate(g, zero, zero, p.point, 0.35, 1.0, 0.0)) CHECK(std::abs(z) == 0.0);

  // Flat carrier on a 20-cell domain where l0 = 0.35 fits the period.
  const LatticeGrid g20(20, 20 * 64);
  const double w = p.point.omega;
  const auto carrier = sample(g20, [&](double x) { return 2.0 * std::real(evaluate(p.point.f_hat, x) * std::exp(I * 0.35 * x)); });
  const auto carrier_t = sample(g20, [&](double x) {
    return 2.0 * std::real(-I * w * evaluate(p.point.f_hat, x) * std::exp(I * 0.35 * x));
  });
  double spread = 0.0;
  for (const auto& z : demodulate(g20, carrier, carrier_t, p.point, 0.35, w, 0.0)) spread = std::max(spread, std::abs(z - 1.0));
  CHECK(spread <= 1e-10);
}

TEST_CASE("light cone energy") {
  const LatticeGrid g(8, 8 * 64);
  const std::vector<double> zero(g.size(), 0.0), rho(g.size(), 1.0);
  CHECK(cone_energy(g, zero, zero, rho, 20.0, 5.0) == 0.0);
  CHECK_THROWS_AS(cone_energy(g, zero, zero, rho, 20.0, 30.0), ConfigError);

  const double x0 = g.length() / 2;
  const auto u0 = sample(g, [&](double x) { return bump(x, x0 + 2.0, 5.0); });
  const std::vector<double> u1(g.size(), 0.0);
  const double dt = 0.25 * g.dx();
  WaveSolver solver(g, bumpy, unit, 0.0, dt);
  solver.start(u0, u1);
  const double t0 = 12.0;
  double prev = cone_energy(g, solver.field().u_curr, solver.velocity(), solver.rho_samples(), x0, t0 - dt);
  double worst = 0.0;
  while (solver.field().t < t0 - 1.0) {
    solver.step();
    const auto& f = solver.field();
    const double e = cone_energy(g, f.u_curr, solver.velocity(), solver.rho_samples(), x0, t0 - f.t);
    worst = std::max(worst, (e - prev) / prev);
    prev = e;
  }
  CHECK(worst <= 1e-4);

  SimConfig cfg;
  cfg.dt_factor = 0.25;
  cfg.T = t0;
  cfg.stride = 20;
  cfg.cone = ConeSpec{x0, t0};
  const auto lin = simulate(g, bumpy, unit, 0.0, u0, u1, cfg);
  CHECK(lin.cone_violation <= 1e-6);
  for (std::size_t i = 1; i < lin.cone_energy.size(); ++i)
    CHECK(lin.cone_energy[i] <= lin.cone_energy[i - 1] * (1 + 1e-6) + 1e-12);
  const auto u0n = sample(g, [&](double x) { return 0.6 * bump(x, x0 + 2.0, 5.0); });
  const auto nl = simulate(g, bumpy, unit, 1.0, u0n, u1, cfg);
  CHECK(nl.cone_violation <= 1e-6);
}

TEST_CASE("finite propagation speed") {
  const LatticeGrid g(16, 16 * 64);
  const double x0 = g.length() / 2, t0 = 20.0;
  const auto u0a = sample(g, [&](double x) { return 0.5 * bump(x, x0, 6.0) * std::cos(0.35 * x); });
  const std::vector<double> u1(g.size(), 0.0);
  auto u0b = u0a;
  for (int j = 0; j < g.size(); ++j) u0b[j] += bump(g.x(j), x0 + t0 + 8.0, 3.0);
  const double diff = twin_run_difference(g, bumpy, unit, 1.0, u0a, u1, u0b, u1, 0.2 * g.dx(), ConeSpec{x0, t0});
  CHECK(diff <= 1e-6);
  auto u0c = u0a;
  for (int j = 0; j < g.size(); ++j) u0c[j] += bump(g.x(j), x0 + t0 - 4.0, 3.0);
  CHECK(twin_run_difference(g, bumpy, unit, 1.0, u0a, u1, u0c, u1, 0.2 * g.dx(), ConeSpec{x0, t0}) > 1e-3);
}

TEST_CASE("pulse propagation in the constant medium") {
  const Pulse p1(0.1);
  const auto tr1 = p1.tracking();
  SimConfig cfg;
  cfg.T = 100.0;
  cfg.stride = 100;
  const auto d1 = simulate(p1.grid, unit, unit, 1.0, p1.data.u0, p1.data.u1, cfg, &tr1);
  CHECK(std::abs(d1.speed_fit / p1.params.cg - 1.0) <= 0.02);
  CHECK(d1.final_time == doctest::Approx(100.0));

  const Pulse p2(0.2);
  const auto tr2 = p2.tracking();
  const auto d2 = simulate(p2.grid, unit, unit, 1.0, p2.data.u0, p2.data.u1, cfg, &tr2);
  CHECK(d2.final_time == doctest::Approx(25.0));
  const double order = std::log(d2.max_approx_err / d1.max_approx_err) / std::log(2.0);
  CHECK(order >= 1.4);

  const auto lin = simulate(p1.grid, unit, unit, 0.0, p1.data.u0, p1.data.u1, cfg, &tr1);
  CHECK(lin.tail_amp.back() > 1.5 * lin.tail_amp.front());
  CHECK(d1.tail_amp.back() < lin.tail_amp.back());
}
