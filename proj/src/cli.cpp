#include "modpulse/cli.hpp"

#include "modpulse/conditions.hpp"
#include "modpulse/envelope.hpp"
#include "modpulse/errors.hpp"
#include "modpulse/homoclinic.hpp"
#include "modpulse/normal_form.hpp"
#include "modpulse/spatial_spectrum.hpp"
#include "modpulse/wave_sim.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace modpulse {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
T field(const json& obj, const std::string& section, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(section + "." + key + ": wrong type");
  }
}

const json& section(const json& j, const std::string& name) {
  static const json empty = json::object();
  if (!j.contains(name)) return empty;
  if (!j.at(name).is_object()) throw ConfigError(name + ": must be an object");
  return j.at(name);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c;
  c.version = field(j, "config", "version", 1);
  require(c.version == 1, "version: only version 1 is supported");
  c.seed = field<std::uint64_t>(j, "config", "seed", 1);

  const auto& med = section(j, "medium");
  require(med.contains("rho"), "medium.rho: required");
  c.rho = field(med, "medium", "rho", c.rho);
  c.r = field(med, "medium", "r", c.r);
  c.gamma = field(med, "medium", "gamma", c.gamma);
  require(!c.rho.empty(), "medium.rho: needs at least the mean coefficient");
  require(!c.r.empty(), "medium.r: needs at least the mean coefficient");
  require(std::isfinite(c.gamma) && c.gamma != 0.0, "medium.gamma: must be finite and nonzero");
  try {
    PeriodicCoefficient(c.rho, "rho");
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("medium.rho: ") + e.what());
  }
  try {
    PeriodicCoefficient(c.r, "r");
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("medium.r: ") + e.what());
  }

  const auto& sel = section(j, "selection");
  c.n0 = field(sel, "selection", "n0", c.n0);
  c.l0 = field(sel, "selection", "l0", c.l0);
  c.N = field(sel, "selection", "N", c.N);
  c.epsilon = field(sel, "selection", "epsilon", c.epsilon);
  require(c.n0 >= 0, "selection.n0: must be >= 0");
  require(c.l0 > -0.5 && c.l0 <= 0.5, "selection.l0: must lie in (-1/2, 1/2]");
  require(c.N >= 0 && c.N <= 50, "selection.N: must lie in 0..50");
  require(c.epsilon > 0.0 && c.epsilon < 1.0, "selection.epsilon: must lie in (0, 1)");

  const auto& disc = section(j, "discretization");
  c.K = field(disc, "discretization", "K", c.K);
  c.x_points = field(disc, "discretization", "x_points", c.x_points);
  c.domain_cells = field(disc, "discretization", "domain_cells", c.domain_cells);
  c.dt_factor = field(disc, "discretization", "dt_factor", c.dt_factor);
  c.T = field(disc, "discretization", "T", c.T);
  c.l_points = field(disc, "discretization", "l_points", c.l_points);
  require(c.K >= 1 && c.K <= 512, "discretization.K: must lie in 1..512");
  require(static_cast<int>(std::max(c.rho.size(), c.r.size())) - 1 <= 2 * c.K,
          "discretization.K: too small for the coefficient harmonics");
  require(c.n0 < 2 * c.K + 1, "selection.n0: exceeds the number of computed bands");
  require(c.domain_cells >= 1, "discretization.domain_cells: must be >= 1");
  require(c.x_points >= c.domain_cells && c.x_points % c.domain_cells == 0,
          "discretization.x_points: must be a positive multiple of domain_cells");
  require(c.dt_factor > 0.0 && c.dt_factor <= 0.9, "discretization.dt_factor: must lie in (0, 0.9]");
  require(c.T > 0.0, "discretization.T: must be positive");
  require(c.l_points >= 1, "discretization.l_points: must be >= 1");

  const auto& out = section(j, "outputs");
  c.directory = field(out, "outputs", "directory", c.directory);
  c.stride = field(out, "outputs", "stride", c.stride);
  c.formats = field(out, "outputs", "formats", c.formats);
  require(!c.directory.empty(), "outputs.directory: must be nonempty");
  require(c.stride >= 1, "outputs.stride: must be >= 1");
  for (const auto& f : c.formats) require(f == "csv" || f == "json", "outputs.formats: unknown format '" + f + "'");
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return hex.str();
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

double finite_or_null(double v) { return std::isfinite(v) ? v : std::nan(""); }

// Collects output files; every file is written to a temporary name and renamed.
class Outputs {
 public:
  Outputs(fs::path dir, const RunConfig& c) : dir_(std::move(dir)), config_(c) {}

  bool csv() const { return wants("csv"); }
  bool json_enabled() const { return wants("json"); }

  void write_text(const std::string& name, const std::string& body) {
    fs::create_directories(dir_);
    const fs::path final_path = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      out << body;
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, final_path);
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  }

  void write_json(const std::string& name, const json& j) {
    if (json_enabled()) write_text(name, j.dump(2) + "\n");
  }

  void write_csv(const std::string& name, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
    if (!csv()) return;
    std::string body;
    for (std::size_t i = 0; i < header.size(); ++i) body += (i ? "," : "") + header[i];
    body += "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) body += (i ? "," : "") + num(row[i]);
      body += "\n";
    }
    write_text(name, body);
  }

  void write_manifest(const json& extra) {
    json m = extra;
    json list = json::array();
    for (const auto& f : files_)
      list.push_back({{"file", f}, {"sha256", sha256_file(dir_ / f)}, {"bytes", fs::file_size(dir_ / f)}});
    m["files"] = list;
    fs::create_directories(dir_);
    const fs::path tmp = dir_ / "manifest.json.tmp";
    {
      std::ofstream out(tmp);
      out << m.dump(2) << "\n";
    }
    fs::rename(tmp, dir_ / "manifest.json");
  }

 private:
  bool wants(const std::string& f) const {
    return std::find(config_.formats.begin(), config_.formats.end(), f) != config_.formats.end();
  }
  fs::path dir_;
  const RunConfig& config_;
  std::vector<std::string> files_;
};

struct Context {
  const RunConfig& c;
  std::uint64_t seed;
  PeriodicCoefficient rho;
  PeriodicCoefficient r;
  Outputs& out;
  std::ostream& log;

  BlochPoint point() const { return compute_bloch_point(rho, c.l0, c.n0, c.K); }
  EnvelopeParams params(const BlochPoint& p) const { return make_envelope_params(p, r, c.gamma, c.epsilon); }
};

json params_json(const EnvelopeParams& p) {
  return {{"n0", p.n0},           {"l0", p.l0},         {"omega0", p.omega0},   {"cg", p.cg},
          {"omega_pp", p.omega_pp}, {"gamma_nl", p.gamma_nl}, {"gamma1", p.gamma1}, {"gamma2", p.gamma2},
          {"omega_tilde", p.omega_tilde}, {"epsilon", p.epsilon}};
}

void cmd_bands(Context& ctx) {
  const auto& c = ctx.c;
  const int count = c.n0 + 3;
  std::vector<std::string> header{"l"};
  for (int n = 0; n < count; ++n) header.push_back("omega_" + std::to_string(n));
  for (int n = 0; n < count; ++n) header.push_back("cg_" + std::to_string(n));
  for (int n = 0; n < count; ++n) header.push_back("omega_pp_" + std::to_string(n));
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < c.l_points; ++i) {
    const double l = c.l_points == 1 ? c.l0 : -0.5 + (i + 1.0) / c.l_points;
    const auto om = band_omegas(ctx.rho, l, c.K, count);
    std::vector<double> row{l};
    std::vector<double> cg(count, std::nan("")), wpp(count, std::nan(""));
    for (int n = 0; n < count; ++n) {
      row.push_back(om[n]);
      try {
        const auto p = compute_bloch_point(ctx.rho, l, n, c.K);
        cg[n] = p.cg;
        wpp[n] = p.omega_pp;
      } catch (const DegeneracyError&) {
        // derivatives are undefined at band crossings
      }
    }
    row.insert(row.end(), cg.begin(), cg.end());
    row.insert(row.end(), wpp.begin(), wpp.end());
    rows.push_back(std::move(row));
  }
  ctx.out.write_csv("bands.csv", header, rows);
  json selected = {{"n0", c.n0}, {"l0", c.l0}};
  try {
    const auto p = compute_bloch_point(ctx.rho, c.l0, c.n0, c.K);
    selected.update({{"omega0", p.omega}, {"cg", p.cg}, {"omega_pp", p.omega_pp}, {"gap", p.gap}, {"simple", true}});
    ctx.log << "bands: " << rows.size() << " rows, omega0 = " << num(p.omega) << "\n";
  } catch (const DegeneracyError& e) {
    selected.update({{"simple", false}, {"degeneracy", e.what()}});
    ctx.log << "bands: " << rows.size() << " rows, selected band is not simple\n";
  }
  ctx.out.write_json("bands.json", {{"l_points", c.l_points}, {"bands", count}, {"K", c.K}, {"selected", selected}});
}

bool cmd_check(Context& ctx) {
  const auto rep = check_conditions(ctx.rho, ctx.c.n0, ctx.c.l0, ctx.c.N, ctx.c.K);
  json nr = json::array(), ze = json::array(), dm = json::array();
  for (const auto& row : rep.nr)
    nr.push_back({{"m", row.m}, {"l_reduced", row.l_reduced}, {"n_min", row.n_min}, {"n_max", row.n_max},
                  {"margin", row.margin}});
  for (const auto& row : rep.zero_ev) ze.push_back({{"m", row.m}, {"kappa", row.kappa}, {"distance", row.distance}});
  for (const auto& row : rep.Dm)
    dm.push_back({{"m", row.m}, {"value", row.value}, {"kappa", row.kappa}, {"kappa_max", row.kappa_max}});
  json nd = {{"nd1", rep.nd.nd1}, {"nd1_nearest", rep.nd.nd1_nearest}, {"nd2_evaluated", rep.nd.nd2_evaluated}};
  if (rep.nd.nd2_evaluated) {
    nd["nd2_speed"] = rep.nd.nd2_speed;
    nd["nd2_curvature"] = rep.nd.nd2_curvature;
  }
  json j = {{"n0", rep.n0}, {"l0", rep.l0},     {"N", rep.N},          {"omega0", rep.omega0},
            {"s", rep.s},   {"nondegeneracy", nd}, {"nonresonance", nr}, {"zero_ev_cond2", ze},
            {"Dm", dm},     {"pass", rep.pass}};
  if (!rep.zero_ev.empty())
    j["zero_ev_min"] = {{"m", rep.zero_ev_min.m}, {"kappa", rep.zero_ev_min.kappa},
                        {"distance", rep.zero_ev_min.distance}};
  ctx.out.write_json("conditions.json", j);
  ctx.log << "check: " << (rep.pass ? "pass" : "fail") << " (nd1 = " << num(rep.nd.nd1) << ")\n";
  return rep.pass;
}

struct PulseSetup {
  LatticeGrid grid;
  double x_center;
  double width;
  InitialData data;
};

PulseSetup pulse_setup(const Context& ctx, const BlochPoint& p, const EnvelopeParams& par) {
  const auto& c = ctx.c;
  LatticeGrid grid(c.domain_cells, c.x_points);
  const double T = std::min(c.T, 1.0 / (c.epsilon * c.epsilon));
  const double width = 1.0 / (c.epsilon * par.gamma2);
  const double xc = grid.length() / 2 - par.cg * T / 2;
  const double xi_max = std::max(width, std::min(10.0 * width, 0.45 * grid.length() - width));
  auto data = build_initial_data(par, p, soliton_profile(par), grid, xc, TaperSpec{xi_max, width});
  return {grid, xc, width, std::move(data)};
}

void cmd_envelope(Context& ctx) {
  const auto p = ctx.point();
  const auto par = ctx.params(p);
  ctx.out.write_json("envelope.json", params_json(par));
  const auto s = pulse_setup(ctx, p, par);
  std::vector<std::vector<double>> rows;
  for (int j = 0; j < s.grid.size(); ++j) rows.push_back({s.grid.x(j), s.data.u0[j], s.data.u1[j]});
  ctx.out.write_csv("initial_data.csv", {"x", "u0", "u1"}, rows);
  ctx.log << "envelope: gamma1 = " << num(par.gamma1) << ", gamma2 = " << num(par.gamma2) << "\n";
}

void cmd_spectrum(Context& ctx) {
  const auto p = ctx.point();
  json summary = json::array();
  for (int m = 1; m <= 2 * ctx.c.N + 1; m += 2) {
    const auto op = assemble_Am(ctx.rho, m, p.omega, p.cg, ctx.c.l0, ctx.c.K);
    const auto sp = spectrum(op, ctx.rho);
    std::vector<std::vector<double>> rows;
    int counts[3] = {0, 0, 0};
    for (const auto& s : sp) {
      rows.push_back({s.lambda.real(), s.lambda.imag(), double(static_cast<int>(s.cls)), s.residual,
                      s.dispersion_residual});
      counts[static_cast<int>(s.cls)]++;
    }
    ctx.out.write_csv("spectrum_m" + std::to_string(m) + ".csv",
                      {"re_lambda", "im_lambda", "class", "residual", "dispersion_residual"}, rows);
    summary.push_back({{"m", m},
                       {"eigenvalues", sp.size()},
                       {to_string(SpectralClass::center), counts[static_cast<int>(SpectralClass::center)]},
                       {to_string(SpectralClass::stable), counts[static_cast<int>(SpectralClass::stable)]},
                       {to_string(SpectralClass::unstable), counts[static_cast<int>(SpectralClass::unstable)]}});
  }
  const auto health = resolvent_health(ctx.rho, p, ctx.c.N, ctx.c.K);
  json rows = json::array();
  for (const auto& row : health.rows)
    rows.push_back({{"m", row.m}, {"sigma_min", row.sigma_min}, {"inverse_norm", finite_or_null(row.inverse_norm)},
                    {"near_zero_count", row.near_zero_count}});
  ctx.out.write_json("spectrum.json", {{"class_codes", {{"center", 0}, {"stable", 1}, {"unstable", 2}}},
                                       {"operators", summary},
                                       {"resolvent", {{"rows", rows}, {"C0", health.C0}, {"C0_sum", health.C0_sum},
                                                      {"healthy", health.healthy}}}});
  ctx.log << "spectrum: resolvent " << (health.healthy ? "healthy" : "unhealthy") << ", C0 = " << num(health.C0)
          << "\n";
}

struct M1Data {
  BlochPoint point;
  SpatialOperator A1;
  JordanData J;
};

M1Data m1_data(const Context& ctx) {
  M1Data d;
  d.point = ctx.point();
  d.A1 = assemble_Am(ctx.rho, 1, d.point.omega, d.point.cg, ctx.c.l0, ctx.c.K);
  d.J = jordan_chain_m1(d.A1, d.point);
  return d;
}

void cmd_jordan(Context& ctx) {
  const auto d = m1_data(ctx);
  const cmat P = projector_matrix(d.J);
  std::mt19937_64 gen(ctx.seed);
  std::normal_distribution<double> nd;
  double comm = 0.0;
  for (int i = 0; i < 20; ++i) {
    cvec v(d.J.F0.size());
    for (auto& z : v) z = cplx(nd(gen), nd(gen));
    comm = std::max(comm, (P * d.A1.apply(v) - d.A1.apply(P * v)).norm() / v.norm());
  }
  json dual = json::array();
  for (int i = 0; i < 2; ++i) dual.push_back({cjson(d.J.duality(i, 0)), cjson(d.J.duality(i, 1))});
  ctx.out.write_json("jordan.json", {{"nu", cjson(d.J.nu)},
                                     {"nu_closed_form", cjson(d.J.nu_closed_form)},
                                     {"chain_residuals",
                                      {{"F0", d.J.res_F0}, {"F1", d.J.res_F1}, {"G0", d.J.res_G0}, {"G1", d.J.res_G1}}},
                                     {"duality", dual},
                                     {"duality_error", d.J.duality_error},
                                     {"projector_idempotence", (P * P - P).norm()},
                                     {"commutation_max", comm},
                                     {"seed", ctx.seed}});
  ctx.log << "jordan: max chain residual " << num(d.J.max_chain_residual()) << "\n";
}

json step_json(const TransformStep& st) {
  json eq = json::array();
  for (std::size_t i = 0; i < st.residuals.size(); ++i)
    eq.push_back({{"equation", st.labels[i]}, {"residual", st.residuals[i]}});
  return {{"m", st.m}, {"equations", eq}, {"max_residual", st.max_residual()}};
}

json fit_json(const EliminationFit& f) {
  return {{"epsilons", f.epsilons},
          {"residuals", f.residuals},
          {"control_residuals", f.control_residuals},
          {"trivial", f.trivial},
          {"slope", f.trivial ? json(nullptr) : json(f.slope)},
          {"control_slope", f.trivial ? json(nullptr) : json(f.control_slope)}};
}

void dump_shifts(Context& ctx, const TransformStep& st, const std::string& name) {
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < st.shifts.size(); ++j)
    for (Eigen::Index i = 0; i < st.shifts[j].size(); ++i)
      rows.push_back({double(j), double(i), st.shifts[j](i).real(), st.shifts[j](i).imag()});
  ctx.out.write_csv(name, {"term", "index", "re", "im"}, rows);
}

void cmd_normalform(Context& ctx) {
  const auto d = m1_data(ctx);
  const auto par = ctx.params(d.point);
  const Z1Field Z(d.J, d.point, ctx.r, ctx.c.gamma, par.omega_tilde);
  const std::vector<double> eps = {1e-2, 1e-3, 1e-4};
  EliminationInputs in;
  in.rho = &ctx.rho;
  in.jordan = &d.J;
  in.omega0 = d.point.omega;
  in.cg = d.point.cg;
  in.l0 = ctx.c.l0;
  in.omega_tilde = par.omega_tilde;
  in.K = ctx.c.K;
  in.amplitude = par.gamma1;
  in.seed = ctx.seed;

  json chains = json::array();
  const auto s1 = m1_first_step(d.A1, d.J, d.point, ctx.r, ctx.c.gamma, par.omega_tilde);
  json j1 = step_json(s1);
  j1["elimination"] = fit_json(verify_elimination(s1, in, Z.as_function(), eps));
  chains.push_back(j1);
  dump_shifts(ctx, s1, "normalform_m1.csv");
  double worst = s1.max_residual();
  for (int m = 3; m <= 2 * ctx.c.N + 1; m += 2) {
    const auto Am = assemble_Am(ctx.rho, m, d.point.omega, d.point.cg, ctx.c.l0, ctx.c.K);
    const auto st = m == 3 ? m3_first_step(Am, d.point, ctx.r, ctx.c.gamma)
                           : general_step(Am, cubic_source(Am, d.point, ctx.r, ctx.c.gamma));
    json jm = step_json(st);
    jm["elimination"] = fit_json(verify_elimination(st, in, Z.as_function(), eps));
    chains.push_back(jm);
    dump_shifts(ctx, st, "normalform_m" + std::to_string(m) + ".csv");
    worst = std::max(worst, st.max_residual());
  }
  ctx.out.write_json("normalform.json", {{"chains", chains}, {"max_residual", worst}, {"seed", ctx.seed}});
  ctx.log << "normalform: max residual " << num(worst) << "\n";
}

void cmd_homoclinic(Context& ctx) {
  const auto d = m1_data(ctx);
  const auto par = ctx.params(d.point);
  const Z1Field Z(d.J, d.point, ctx.r, ctx.c.gamma, par.omega_tilde);
  const auto orbit = refine_homoclinic(Z, par, ctx.c.epsilon);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < orbit.xi.size(); ++i)
    rows.push_back({orbit.xi[i], orbit.q0[i].real(), orbit.q0[i].imag(), orbit.q1[i].real(), orbit.q1[i].imag()});
  ctx.out.write_csv("homoclinic.csv", {"xi", "re_q0", "im_q0", "re_q1", "im_q1"}, rows);
  ctx.out.write_json("homoclinic.json", {{"epsilon", orbit.epsilon},
                                         {"iterations", orbit.iterations},
                                         {"newton_history", orbit.newton_history},
                                         {"proximity_q0", orbit.proximity_q0},
                                         {"proximity_q1", orbit.proximity_q1},
                                         {"decay_rate", orbit.decay_rate},
                                         {"decay_constant", orbit.decay_constant},
                                         {"reversibility_residual", orbit.reversibility_residual},
                                         {"derivative_jump", orbit.derivative_jump},
                                         {"soliton_truncation_residual",
                                          soliton_truncation_residual(Z, par, ctx.c.epsilon)}});
  ctx.log << "homoclinic: " << orbit.iterations << " Newton iterations, |q0 - A| = " << num(orbit.proximity_q0)
          << "\n";
}

void cmd_simulate(Context& ctx) {
  const auto p = ctx.point();
  const auto par = ctx.params(p);
  const auto s = pulse_setup(ctx, p, par);
  SimConfig cfg;
  cfg.dt_factor = ctx.c.dt_factor;
  cfg.T = ctx.c.T;
  cfg.stride = ctx.c.stride;
  const double T = std::min(ctx.c.T, 1.0 / (ctx.c.epsilon * ctx.c.epsilon));
  const double t0 = std::min(T + 3.0 * s.width, 0.49 * s.grid.length());
  cfg.cone = ConeSpec{s.x_center + par.cg * T / 2, t0};
  PulseTracking tr;
  tr.point = &p;
  tr.l0 = ctx.c.l0;
  tr.omega = par.omega();
  tr.epsilon = ctx.c.epsilon;
  tr.gamma2 = par.gamma2;
  const double xc = s.x_center;
  tr.reference = [&](double x, double t) {
    return h_app(par, p, x - xc - par.cg * t, ctx.c.l0 * x - par.omega() * t, x);
  };
  const auto d = simulate(s.grid, ctx.rho, ctx.r, ctx.c.gamma, s.data.u0, s.data.u1, cfg, &tr);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.t.size(); ++i)
    rows.push_back({d.t[i], d.centroid[i], d.tail_amp[i], d.approx_err[i], d.cone_energy[i], d.energy[i]});
  ctx.out.write_csv("diagnostics.csv", {"t", "centroid", "tail_amp", "approx_err", "cone_energy", "energy"}, rows);
  ctx.out.write_json("simulate.json", {{"final_time", d.final_time},
                                       {"speed_fit", d.speed_fit},
                                       {"cg", par.cg},
                                       {"speed_relative_error", d.speed_fit / par.cg - 1.0},
                                       {"max_approx_err", d.max_approx_err},
                                       {"cone_violation", d.cone_violation},
                                       {"cone", {{"x0", cfg.cone->x0}, {"t0", cfg.cone->t0}}},
                                       {"grid", {{"cells", s.grid.cells()}, {"points", s.grid.size()}}},
                                       {"dt_factor", cfg.dt_factor},
                                       {"stride", cfg.stride}});
  ctx.log << "simulate: speed " << num(d.speed_fit) << " (cg " << num(par.cg) << "), max error "
          << num(d.max_approx_err) << "\n";
}

int dispatch(const std::string& name, Context& ctx, bool force) {
  if (name == "bands") {
    cmd_bands(ctx);
  } else if (name == "check") {
    return cmd_check(ctx) ? 0 : 1;
  } else if (name == "envelope") {
    cmd_envelope(ctx);
  } else if (name == "spectrum") {
    cmd_spectrum(ctx);
  } else if (name == "jordan") {
    cmd_jordan(ctx);
  } else if (name == "normalform") {
    cmd_normalform(ctx);
  } else if (name == "homoclinic") {
    cmd_homoclinic(ctx);
  } else if (name == "simulate") {
    cmd_simulate(ctx);
  } else if (name == "pipeline") {
    json meta = {{"seed", ctx.seed}, {"forced", false}};
    std::vector<std::string> done;
    try {
      cmd_bands(ctx);
      done.push_back("bands");
      const bool pass = cmd_check(ctx);
      done.push_back("check");
      meta["check_passed"] = pass;
      if (!pass && !force) {
        meta["stages"] = done;
        meta["stopped_at"] = "check";
        ctx.out.write_manifest(meta);
        return 1;
      }
      if (!pass) meta["forced"] = true;
      const std::pair<const char*, void (*)(Context&)> stages[] = {
          {"envelope", cmd_envelope}, {"spectrum", cmd_spectrum},     {"jordan", cmd_jordan},
          {"normalform", cmd_normalform}, {"homoclinic", cmd_homoclinic}, {"simulate", cmd_simulate}};
      for (const auto& [stage, run] : stages) {
        run(ctx);
        done.push_back(stage);
      }
    } catch (const std::exception& e) {
      meta["stages"] = done;
      meta["error"] = e.what();
      ctx.out.write_manifest(meta);
      throw;
    }
    meta["stages"] = done;
    ctx.out.write_manifest(meta);
  } else {
    throw ConfigError("unknown command '" + name + "'");
  }
  return 0;
}

}  // namespace

int run_command(const std::string& name, const RunConfig& config, const CommandOptions& options, std::ostream& log) {
  try {
    if (std::find(command_names().begin(), command_names().end(), name) == command_names().end())
      throw ConfigError("unknown command '" + name + "'");
    const fs::path dir = options.out.empty() ? fs::path(config.directory) : options.out;
    Outputs out(dir, config);
    Context ctx{config, options.has_seed ? options.seed : config.seed, PeriodicCoefficient(config.rho, "rho"),
                PeriodicCoefficient(config.r, "r"), out, log};
    return dispatch(name, ctx, options.force);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    log << "failure: " << e.what() << "\n";
    return 1;
  }
}

int run_command_file(const std::string& name, const fs::path& config_path, const CommandOptions& options,
                     std::ostream& log) {
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "configuration error: " << e.what() << "\n";
    return 2;
  }
  return run_command(name, config, options, log);
}

}  // namespace modpulse
