#include "modpulse/wave_sim.hpp"

#include "modpulse/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

namespace modpulse {

namespace {

// Raised-cosine low-pass for demodulation: flat to kPass, zero from kStop.
constexpr double kPass = 0.25;
constexpr double kStop = 0.75;

double periodic_distance(double a, double b, double length) {
  double d = std::fmod(std::abs(a - b), length);
  return std::min(d, length - d);
}

}  // namespace

WaveSolver::WaveSolver(const LatticeGrid& grid, const PeriodicCoefficient& rho, const PeriodicCoefficient& r,
                       double gamma, double dt)
    : gamma_(gamma) {
  if (!(dt > 0.0) || dt > 0.9 * grid.dx() * (1.0 + 1e-12))
    throw ConfigError("time step violates the CFL bound dt <= 0.9 dx");
  field_.grid = grid;
  field_.dt = dt;
  const int N = grid.size();
  rho_.resize(N);
  r_.resize(N);
  for (int j = 0; j < N; ++j) {
    rho_[j] = rho(grid.x(j));
    r_[j] = r(grid.x(j));
  }
  scratch_.resize(N);
}

void WaveSolver::acceleration(const std::vector<double>& u, std::vector<double>& out) const {
  const int N = static_cast<int>(u.size());
  const double inv = 1.0 / (field_.grid.dx() * field_.grid.dx());
  out.resize(N);
  for (int j = 0; j < N; ++j) {
    const double l = u[j == 0 ? N - 1 : j - 1], rr = u[j == N - 1 ? 0 : j + 1];
    out[j] = (l - 2.0 * u[j] + rr) * inv - rho_[j] * u[j] + gamma_ * r_[j] * u[j] * u[j] * u[j];
  }
}

double WaveSolver::force(int j) const {
  const double u = field_.u_curr[j];
  return gamma_ * r_[j] * u * u * u;
}

void WaveSolver::start(const std::vector<double>& u0, const std::vector<double>& u1) {
  const int N = field_.grid.size();
  if (static_cast<int>(u0.size()) != N || static_cast<int>(u1.size()) != N)
    throw ConfigError("initial data does not match the grid");
  const double dt = field_.dt;
  acceleration(u0, scratch_);
  field_.u_prev = u0;
  field_.u_curr.resize(N);
  for (int j = 0; j < N; ++j) field_.u_curr[j] = u0[j] + dt * u1[j] + 0.5 * dt * dt * scratch_[j];
  field_.t = dt;
}

void WaveSolver::start_pair(const std::vector<double>& u_prev, const std::vector<double>& u_curr, double t) {
  field_.u_prev = u_prev;
  field_.u_curr = u_curr;
  field_.t = t;
}

void WaveSolver::step() {
  const double dt2 = field_.dt * field_.dt;
  acceleration(field_.u_curr, scratch_);
  auto& up = field_.u_prev;
  const auto& uc = field_.u_curr;
  for (std::size_t j = 0; j < up.size(); ++j) {
    const double next = 2.0 * uc[j] - up[j] + dt2 * scratch_[j];
    if (!std::isfinite(next) || std::abs(next) > 1e8)
      throw BlowUpError("wave field blew up", field_.t);
    up[j] = next;
  }
  std::swap(field_.u_prev, field_.u_curr);
  field_.t += field_.dt;
}

std::vector<double> WaveSolver::velocity() const {
  std::vector<double> acc;
  acceleration(field_.u_curr, acc);
  std::vector<double> v(acc.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    v[j] = (field_.u_curr[j] - field_.u_prev[j]) / field_.dt + 0.5 * field_.dt * acc[j];
  return v;
}

double staggered_energy(const LatticeGrid& grid, const std::vector<double>& rho, const std::vector<double>& un,
                        const std::vector<double>& un1, double dt, double x0, double radius) {
  const int N = grid.size();
  const double dx = grid.dx(), L = grid.length();
  auto inside = [&](int j) { return radius < 0.0 || periodic_distance(grid.x(j), x0, L) <= radius; };
  double e = 0.0;
  for (int j = 0; j < N; ++j) {
    if (!inside(j)) continue;
    const double v = (un1[j] - un[j]) / dt;
    e += v * v + rho[j] * un[j] * un1[j];
    const int k = j == N - 1 ? 0 : j + 1;
    if (inside(k)) e += (un[k] - un[j]) * (un1[k] - un1[j]) / (dx * dx);
  }
  return 0.5 * e * dx;
}

double cone_energy(const LatticeGrid& grid, const std::vector<double>& w, const std::vector<double>& wt,
                   const std::vector<double>& rho, double x0, double radius) {
  if (radius < 0.0) throw ConfigError("cone time exceeds its apex");
  if (2.0 * radius >= grid.length()) throw ConfigError("light cone exceeds the domain");
  const int N = grid.size();
  const double dx = grid.dx();
  auto density = [&](int j) {
    const int jj = ((j % N) + N) % N;
    const double wx = (w[(jj + 1) % N] - w[(jj + N - 1) % N]) / (2.0 * dx);
    return wt[jj] * wt[jj] + wx * wx + rho[jj] * w[jj] * w[jj];
  };
  // Trapezoid over nodes inside, with linear end pieces to the exact cone edges.
  const double a = x0 - radius, b = x0 + radius;
  const int ja = static_cast<int>(std::ceil(a / dx)), jb = static_cast<int>(std::floor(b / dx));
  if (jb < ja) return 0.0;
  double e = 0.0;
  for (int j = ja; j < jb; ++j) e += 0.5 * (density(j) + density(j + 1)) * dx;
  const double la = ja * dx - a, lb = b - jb * dx;
  if (la > 0.0) e += la * density(ja);
  if (lb > 0.0) e += lb * density(jb);
  return 0.5 * e;
}

std::vector<cplx> demodulate(const LatticeGrid& grid, const std::vector<double>& u, const std::vector<double>& ut,
                             const BlochPoint& point, double l0, double omega, double t) {
  const int N = grid.size();
  const int per = grid.points_per_cell();
  std::vector<cplx> fcell(per);
  for (int j = 0; j < per; ++j) fcell[j] = evaluate(point.f_hat, grid.x(j));
  fftw_complex* buf = fftw_alloc_complex(N);
  fftw_plan fwd = fftw_plan_dft_1d(N, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd = fftw_plan_dft_1d(N, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  for (int j = 0; j < N; ++j) {
    const double x = grid.x(j);
    const cplx a = 0.5 * (u[j] + I * ut[j] / omega) * std::exp(-I * (l0 * x - omega * t)) * two_pi *
                   std::conj(fcell[j % per]);
    buf[j][0] = a.real();
    buf[j][1] = a.imag();
  }
  fftw_execute(fwd);
  const double L = grid.length();
  for (int j = 0; j < N; ++j) {
    const int m = j <= N / 2 ? j : j - N;
    const double kappa = std::abs(two_pi * m / L);
    double h = 1.0;
    if (kappa >= kStop)
      h = 0.0;
    else if (kappa > kPass)
      h = std::pow(std::cos(0.5 * M_PI * (kappa - kPass) / (kStop - kPass)), 2);
    buf[j][0] *= h / N;
    buf[j][1] *= h / N;
  }
  fftw_execute(bwd);
  std::vector<cplx> out(N);
  for (int j = 0; j < N; ++j) out[j] = cplx(buf[j][0], buf[j][1]);
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  fftw_free(buf);
  return out;
}

double linear_fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = t.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

Diagnostics simulate(const LatticeGrid& grid, const PeriodicCoefficient& rho, const PeriodicCoefficient& r,
                     double gamma, const std::vector<double>& u0, const std::vector<double>& u1,
                     const SimConfig& config, const PulseTracking* tracking) {
  if (config.dt_factor <= 0.0 || config.dt_factor > 0.9) throw ConfigError("dt_factor must lie in (0, 0.9]");
  if (config.stride < 1) throw ConfigError("stride must be >= 1");
  double T = config.T;
  if (tracking) T = std::min(T, 1.0 / (tracking->epsilon * tracking->epsilon));
  if (!(T > 0.0)) throw ConfigError("final time must be positive");
  const int steps = static_cast<int>(std::ceil(T / (config.dt_factor * grid.dx())));
  const double dt = T / steps;
  WaveSolver solver(grid, rho, r, gamma, dt);
  solver.start(u0, u1);
  const auto& rs = solver.rho_samples();
  const int N = grid.size();
  const double L = grid.length(), dx = grid.dx();
  if (config.cone && 2.0 * config.cone->t0 >= L) throw ConfigError("light cone exceeds the domain");

  Diagnostics d;
  double unwrap_ref = 0.0;
  bool have_centroid = false;
  double source = 0.0;
  auto cone_radius = [&](double t) { return config.cone->t0 - t; };

  auto record = [&](double t, const std::vector<double>& u, const std::vector<double>& ut,
                    const std::vector<double>& ua, const std::vector<double>& ub, double t_half) {
    d.t.push_back(t);
    d.energy.push_back(staggered_energy(grid, rs, ua, ub, dt, 0.0, -1.0));
    if (config.cone) {
      const double rad = cone_radius(t_half);
      d.cone_energy.push_back(rad >= 0.0 ? staggered_energy(grid, rs, ua, ub, dt, config.cone->x0, rad) : 0.0);
      d.cone_source.push_back(source);
    }
    if (tracking && tracking->point) {
      const auto env = demodulate(grid, u, ut, *tracking->point, tracking->l0, tracking->omega, t);
      double c = 0.0, s = 0.0;
      for (int j = 0; j < N; ++j) {
        const double w = std::norm(env[j]), th = two_pi * grid.x(j) / L;
        c += w * std::cos(th);
        s += w * std::sin(th);
      }
      double x = std::atan2(s, c) / two_pi * L;
      if (have_centroid) x += L * std::round((unwrap_ref - x) / L);
      unwrap_ref = x;
      have_centroid = true;
      d.centroid.push_back(x);
      const double window = 3.0 / (tracking->epsilon * tracking->gamma2);
      double tail = 0.0;
      for (int j = 0; j < N; ++j)
        if (periodic_distance(grid.x(j), x, L) > window) tail = std::max(tail, std::abs(u[j]));
      d.tail_amp.push_back(tail);
    }
    if (tracking && tracking->reference) {
      double err = 0.0;
      for (int j = 0; j < N; ++j) err = std::max(err, std::abs(u[j] - tracking->reference(grid.x(j), t)));
      d.approx_err.push_back(err);
      d.max_approx_err = std::max(d.max_approx_err, err);
    }
    if (config.snapshot_stride > 0 && (d.t.size() - 1) % config.snapshot_stride == 0)
      d.snapshots.push_back({t, u});
  };

  record(0.0, u0, u1, solver.field().u_prev, solver.field().u_curr, 0.5 * dt);
  std::vector<double> before;
  for (int n = 1; n < steps; ++n) {
    const double tn = solver.field().t;
    if (config.cone) {
      before = solver.field().u_prev;
      const double rad = cone_radius(tn);
      if (rad >= 0.0) {
        std::vector<double> F(N);
        for (int j = 0; j < N; ++j) F[j] = solver.force(j);
        solver.step();
        const auto& un1 = solver.field().u_curr;
        double s = 0.0;
        for (int j = 0; j < N; ++j)
          if (periodic_distance(grid.x(j), config.cone->x0, L) <= rad) s += F[j] * 0.5 * (un1[j] - before[j]);
        source += s * dx;
      } else {
        solver.step();
      }
    } else {
      solver.step();
    }
    if (n % config.stride == 0 || n == steps - 1) {
      const auto& f = solver.field();
      record(f.t, f.u_curr, solver.velocity(), f.u_prev, f.u_curr, f.t - 0.5 * dt);
    }
  }
  d.final_time = solver.field().t;
  if (d.centroid.size() >= 2) d.speed_fit = linear_fit_slope(d.t, d.centroid);
  if (config.cone) {
    // E(t2) - E(t1) - int_{t1}^{t2} source, over recorded pairs inside the cone lifetime.
    const std::size_t n = d.cone_energy.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (config.cone->t0 - d.t[i] < 0.0) break;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (config.cone->t0 - d.t[j] < 0.0) break;
        const double excess = d.cone_energy[j] - d.cone_energy[i] - (d.cone_source[j] - d.cone_source[i]);
        d.cone_violation = std::max(d.cone_violation, (excess - 1e-12) / std::max(d.cone_energy[i], 1e-300));
      }
    }
  }
  return d;
}

double twin_run_difference(const LatticeGrid& grid, const PeriodicCoefficient& rho, const PeriodicCoefficient& r,
                           double gamma, const std::vector<double>& u0a, const std::vector<double>& u1a,
                           const std::vector<double>& u0b, const std::vector<double>& u1b, double dt,
                           const ConeSpec& cone) {
  if (2.0 * cone.t0 >= grid.length()) throw ConfigError("light cone exceeds the domain");
  WaveSolver a(grid, rho, r, gamma, dt), b(grid, rho, r, gamma, dt);
  a.start(u0a, u1a);
  b.start(u0b, u1b);
  const int N = grid.size();
  const double L = grid.length();
  double worst = 0.0;
  auto compare = [&](const std::vector<double>& ua, const std::vector<double>& ub, double t) {
    const double rad = cone.t0 - t;
    for (int j = 0; j < N; ++j)
      if (periodic_distance(grid.x(j), cone.x0, L) <= rad) worst = std::max(worst, std::abs(ua[j] - ub[j]));
  };
  compare(u0a, u0b, 0.0);
  while (a.field().t <= cone.t0 + 1e-12) {
    compare(a.field().u_curr, b.field().u_curr, a.field().t);
    a.step();
    b.step();
  }
  return worst;
}

}  // namespace modpulse
