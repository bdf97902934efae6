#pragma once

#include "modpulse/bloch.hpp"
#include "modpulse/grid.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace modpulse {

// Leapfrog pair u^{n-1}, u^n on a periodic lattice grid.
struct WaveField {
  LatticeGrid grid{1, 1};
  std::vector<double> u_prev, u_curr;
  double t = 0.0;
  double dt = 0.0;
};

class WaveSolver {
 public:
  WaveSolver(const LatticeGrid& grid, const PeriodicCoefficient& rho, const PeriodicCoefficient& r, double gamma,
             double dt);

  /// Taylor start: u^1 = u0 + dt u1 + dt^2/2 (D2 u0 - rho u0 + gamma r u0^3).
  void start(const std::vector<double>& u0, const std::vector<double>& u1);
  /// Start from an explicit pair at times t - dt and t.
  void start_pair(const std::vector<double>& u_prev, const std::vector<double>& u_curr, double t);

  void step();

  const WaveField& field() const { return field_; }
  const std::vector<double>& rho_samples() const { return rho_; }
  double gamma() const { return gamma_; }

  /// Right-hand side D2 u - rho u + gamma r u^3.
  void acceleration(const std::vector<double>& u, std::vector<double>& out) const;
  /// Second-order estimate of u_t at the current time level.
  std::vector<double> velocity() const;
  /// Nonlinear force gamma r u^3 at node j of the current level.
  double force(int j) const;

 private:
  WaveField field_;
  std::vector<double> rho_, r_, scratch_;
  double gamma_;
};

/// Staggered energy 1/2 sum over nodes in C of v^2 + D+u^n D+u^{n+1} + rho u^n u^{n+1}, times dx,
/// with C the nodes whose periodic distance to x0 is at most radius. Negative radius selects the torus.
double staggered_energy(const LatticeGrid& grid, const std::vector<double>& rho, const std::vector<double>& un,
                        const std::vector<double>& un1, double dt, double x0, double radius);

/// Trapezoidal light-cone energy 1/2 int_{|x-x0|<=t0-t} w_t^2 + w_x^2 + rho w^2.
double cone_energy(const LatticeGrid& grid, const std::vector<double>& w, const std::vector<double>& wt,
                   const std::vector<double>& rho, double x0, double radius);

/// Complex envelope eps A from the field and its time derivative.
std::vector<cplx> demodulate(const LatticeGrid& grid, const std::vector<double>& u, const std::vector<double>& ut,
                             const BlochPoint& point, double l0, double omega, double t);

struct ConeSpec {
  double x0 = 0.0;
  double t0 = 0.0;
};

struct SimConfig {
  double dt_factor = 0.2;  // dt = dt_factor * dx
  double T = 100.0;
  int stride = 50;
  int snapshot_stride = 0;  // 0 disables snapshots
  std::optional<ConeSpec> cone;
};

// Carrier and reference data for envelope diagnostics.
struct PulseTracking {
  const BlochPoint* point = nullptr;
  double l0 = 0.0;
  double omega = 0.0;
  double epsilon = 0.1;
  double gamma2 = 1.0;
  std::function<double(double x, double t)> reference;  // u_app, optional
};

struct Snapshot {
  double t;
  std::vector<double> u;
};

struct Diagnostics {
  std::vector<double> t;
  std::vector<double> centroid;
  std::vector<double> tail_amp;
  std::vector<double> approx_err;
  std::vector<double> energy;       // staggered energy on the torus
  std::vector<double> cone_energy;  // staggered energy inside the cone
  std::vector<double> cone_source;  // accumulated int F w_t inside the cone since t = 0
  std::vector<Snapshot> snapshots;
  double speed_fit = 0.0;
  double max_approx_err = 0.0;
  double cone_violation = 0.0;  // max over pairs of E(t2) - E(t1) - source, relative to E(t1)
  double final_time = 0.0;
};

/// Runs to min(T, eps^-2) when tracking is given, else to T.
Diagnostics simulate(const LatticeGrid& grid, const PeriodicCoefficient& rho, const PeriodicCoefficient& r,
                     double gamma, const std::vector<double>& u0, const std::vector<double>& u1,
                     const SimConfig& config, const PulseTracking* tracking = nullptr);

/// Max difference inside the backward cone of (x0, t0) between two runs.
double twin_run_difference(const LatticeGrid& grid, const PeriodicCoefficient& rho, const PeriodicCoefficient& r,
                           double gamma, const std::vector<double>& u0a, const std::vector<double>& u1a,
                           const std::vector<double>& u0b, const std::vector<double>& u1b, double dt,
                           const ConeSpec& cone);

/// Least-squares slope of y against t.
double linear_fit_slope(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace modpulse
