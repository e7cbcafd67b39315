#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mgcool/dynamics.hpp"
#include "mgcool/errors.hpp"
#include "mgcool/experiments.hpp"
#include "mgcool/io.hpp"
#include "mgcool/model.hpp"
#include "mgcool/rates.hpp"

using namespace mgcool;
using io::format_double;

namespace {

void emit(const io::CsvTable& table, const std::string& out) {
  if (out.empty() || out == "-") {
    table.write(std::cout);
  } else {
    table.save(out);
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(io::parse_double(cell));
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ':')) parts.push_back(io::parse_double(cell));
  if (parts.size() != 3 || parts[2] < 2 || parts[2] != std::floor(parts[2])) {
    throw ConfigError("range must be lo:hi:points with at least 2 points");
  }
  const int n = static_cast<int>(parts[2]);
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = parts[0] + (parts[1] - parts[0]) * k / (n - 1);
  return out;
}

struct SimulateArgs {
  std::string config, out, svg;
};

int cmd_simulate(const SimulateArgs& a) {
  const io::RunConfig cfg = io::load_config(a.config);
  model::LindbladModel m;
  if (cfg.ions == 1 && cfg.mode_truncation.empty()) {
    m = model::build_model(cfg.params, cfg.picture);
  } else {
    model::ModeSpec modes = model::modes_for_chain(cfg.ions);
    modes.per_mode_truncation =
        cfg.mode_truncation.empty() ? std::vector<int>(cfg.ions, cfg.params.n_max) : cfg.mode_truncation;
    m = model::build_multimode_model(cfg.params, modes, cfg.picture);
  }
  std::vector<double> n0(m.layout.num_modes(), 0.0);
  n0[0] = cfg.n_initial;
  const Matrix rho0 = model::initial_state(m.layout, model::default_internal_state(), n0, cfg.initial);
  const dynamics::CoolingTrace trace = dynamics::evolve(m, rho0, cfg.integrator);

  io::CsvTable t;
  t.comments = cfg.provenance();
  t.columns = {"t", "n_mean"};
  const int modes = m.layout.num_modes();
  if (modes > 1) {
    for (int k = 0; k < modes; ++k) t.columns.push_back("n_mean_mode_" + std::to_string(k + 1));
  }
  for (const char* c : {"pop_e", "pop_D", "tail", "trace_defect"}) t.columns.emplace_back(c);
  for (std::size_t s = 0; s < trace.size(); ++s) {
    std::vector<double> row{trace.times[s], trace.n_mean[s]};
    if (modes > 1) {
      for (int k = 0; k < modes; ++k) row.push_back(trace.n_mean_modes[k][s]);
    }
    row.insert(row.end(), {trace.pop_e[s], trace.pop_D[s], trace.tail[s], trace.trace_defect[s]});
    t.add_row(std::move(row));
  }
  emit(t, a.out);
  if (!a.svg.empty()) {
    std::vector<io::Series> series;
    for (int k = 0; k < modes; ++k) {
      series.push_back({modes > 1 ? "mode " + std::to_string(k + 1) : "<n>", trace.times, trace.n_mean_modes[k]});
    }
    io::save_svg(a.svg, {"Average population vs time", "t nu", "<n>", true}, series);
  }
  if (!trace.valid) throw IntegratorError(trace.invalid_reason);
  return 0;
}

struct ScanArgs {
  std::string config, parameter, values, range, out, svg;
  bool keep_delta = false;
  int jobs = 1;
};

int cmd_scan(const ScanArgs& a) {
  const io::RunConfig cfg = io::load_config(a.config);
  if (cfg.ions != 1) throw ConfigError("scan supports single-ion configs only");
  experiments::SweepPlan plan;
  plan.parameter = a.parameter;
  plan.grid = a.values.empty() ? parse_range(a.range) : parse_list(a.values);
  plan.base = cfg.params;
  plan.delta_at_resonance = !a.keep_delta;
  plan.settings.picture = cfg.picture;
  plan.settings.initial = cfg.initial;
  plan.settings.n_initial = cfg.n_initial;
  plan.settings.tail_tol = cfg.integrator.tail_tol;
  plan.settings.rel_tol = cfg.integrator.rel_tol;
  const auto points = experiments::run_sweep(plan, a.jobs);

  io::CsvTable t;
  t.comments = cfg.provenance();
  t.comments.push_back("scan parameter=" + a.parameter + (plan.delta_at_resonance ? " delta=resonance" : ""));
  t.columns = {a.parameter, "omega", "delta", "W_fit", "W_formula", "n_final", "omega_eff", "residual", "t_end", "ok"};
  io::Series fit{"W_fit", {}, {}}, formula{"W_formula", {}, {}};
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& q = points[k];
    if (!q.error.empty()) t.comments.push_back("point " + std::to_string(k) + " failed: " + q.error);
    t.add_row({plan.grid[k], q.params.omega, q.params.delta, q.W_fit, rates::rate_formula(q.params), q.n_final,
               rates::dressed_info(q.params).omega_eff, q.residual, q.t_end, q.ok ? 1.0 : 0.0});
    fit.x.push_back(plan.grid[k]);
    fit.y.push_back(q.W_fit);
    formula.x.push_back(plan.grid[k]);
    formula.y.push_back(rates::rate_formula(q.params));
  }
  emit(t, a.out);
  if (!a.svg.empty()) io::save_svg(a.svg, {"Cooling rate scan", a.parameter, "W / nu", false}, {fit, formula});
  return 0;
}

struct PresetArgs {
  std::string id, out, svg;
  int jobs = 1;
  double t_end = 150.0;
  bool left_panel = false;
};

int cmd_preset(const PresetArgs& a) {
  const experiments::PresetId id = experiments::parse_preset(a.id);
  experiments::PresetOptions o;
  o.jobs = a.jobs;
  o.multimode_t_end = a.t_end;
  o.multimode_left_panel = a.left_panel;
  const auto r = experiments::run_preset(id, o);
  emit(r.table, a.out);
  if (!a.svg.empty()) io::save_svg(a.svg, r.plot, r.series);
  return 0;
}

struct RatesArgs {
  double nu = 1.0, omega = 1.0, gamma = 1.0, eta = 0.1, phi = std::numbers::pi / 2.0;
  std::optional<double> delta;
  std::string mode;
  bool resonance = false;
};

int cmd_rates(const RatesArgs& a) {
  if (!a.mode.empty() && a.mode != "resonance") throw ConfigError("unexpected argument '" + a.mode + "'");
  const bool resonant = a.resonance || a.mode == "resonance" || !a.delta;
  if (resonant && a.delta) throw ConfigError("--delta conflicts with resonance");
  model::SystemParams p;
  p.nu = a.nu;
  p.omega = a.omega;
  p.set_gamma(a.gamma);
  p.eta = p.eta_eff = a.eta;
  p.phi = a.phi;
  p.delta = resonant ? rates::resonance_detuning(a.omega, a.nu) : *a.delta;
  p.n_max = 4;
  p.validate();
  const double w = rates::rate_formula(p);
  const auto d = rates::dressed_info(p);
  const auto s = rates::adiabatic_rates(p);
  std::cout << "W_formula=" << format_double(w) << " delta=" << format_double(p.delta)
            << " omega_eff=" << format_double(d.omega_eff) << " A_plus=" << format_double(s.A_plus)
            << " A_minus=" << format_double(s.A_minus) << " n_ss=" << format_double(s.n_ss) << '\n';
  std::cout << "Cooling rate W = " << w << " nu at delta = " << p.delta << " nu"
            << (resonant ? " (resonance)" : "") << "; dressed level omega_u = " << d.omega_u
            << " nu, effective coupling Omega_eff = " << d.omega_eff << " nu; adiabatic estimate W = "
            << s.W() << " nu, stationary <n> = " << s.n_ss << '\n';
  return 0;
}

struct GradientArgs {
  double mass_u = 0.0, wavelength_nm = 0.0, trap_hz = 0.0, theta = 0.0;
  bool table = false;
  std::string out;
};

int cmd_gradient(const GradientArgs& a) {
  if (a.table) {
    emit(experiments::run_preset(experiments::PresetId::table1_gradients).table, a.out);
    return 0;
  }
  model::GradientSpec g;
  g.ion_mass = a.mass_u * model::constants::atomic_mass;
  g.wavelength = a.wavelength_nm * 1e-9;
  g.trap_freq = 2.0 * std::numbers::pi * a.trap_hz;
  g.angle_theta = a.theta;
  std::cout << "gradient_T_per_m=" << format_double(model::gradient_from_eta(g))
            << " eta=" << format_double(model::laser_lamb_dicke(g)) << '\n';
  return 0;
}

int cmd_modes(int ions, const std::string& out) {
  const model::ModeSpec m = model::modes_for_chain(ions);
  io::CsvTable t;
  t.comments.push_back("ions=" + std::to_string(ions) + " driven_ion=" + std::to_string(m.driven_ion + 1));
  t.comments.push_back("frequencies in nu; M_i is the mode-matrix entry of ion i");
  t.columns = {"mode", "frequency"};
  for (int i = 0; i < ions; ++i) t.columns.push_back("M_" + std::to_string(i + 1));
  t.columns.push_back("local_coupling");
  for (int k = 0; k < m.num_modes(); ++k) {
    std::vector<double> row{static_cast<double>(k + 1), m.mode_freqs[k]};
    for (int i = 0; i < ions; ++i) row.push_back(m.mode_matrix(i, k));
    row.push_back(m.local_coupling(k));
    t.add_row(std::move(row));
  }
  emit(t, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic-gradient laser cooling simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Integrate the master equation for a config file");
  s->add_option("config", sim.config, "key=value run configuration")->required();
  s->add_option("--out,-o", sim.out, "CSV output (default stdout)");
  s->add_option("--svg", sim.svg, "SVG plot of <n>(t)");

  ScanArgs scan;
  auto* sc = app.add_subcommand("scan", "Fitted cooling rate over a parameter grid");
  sc->add_option("config", scan.config, "base configuration")->required();
  sc->add_option("--param,-p", scan.parameter, "omega, gamma, eta, phi or delta")->required();
  auto* values = sc->add_option("--values", scan.values, "comma separated grid");
  auto* range = sc->add_option("--range", scan.range, "lo:hi:points");
  values->excludes(range);
  sc->add_flag("--keep-delta", scan.keep_delta, "do not slave delta to the resonance condition");
  sc->add_option("--jobs,-j", scan.jobs, "worker threads")->check(CLI::PositiveNumber);
  sc->add_option("--out,-o", scan.out, "CSV output (default stdout)");
  sc->add_option("--svg", scan.svg, "SVG plot");

  PresetArgs pre;
  auto* pr = app.add_subcommand("preset", "Regenerate a figure or table");
  pr->add_option("id", pre.id, "preset name")->required();
  pr->add_option("--out,-o", pre.out, "CSV output (default stdout)");
  pr->add_option("--svg", pre.svg, "SVG plot");
  pr->add_option("--jobs,-j", pre.jobs, "worker threads")->check(CLI::PositiveNumber);
  pr->add_option("--t-end", pre.t_end, "end time of the three-ion trace");
  pr->add_flag("--left-panel", pre.left_panel, "also run the all-modes-hot three-ion traces");

  RatesArgs ra;
  auto* rt = app.add_subcommand("rates", "Analytic rate, detuning and dressed coupling");
  rt->add_option("--nu", ra.nu);
  rt->add_option("--omega", ra.omega);
  rt->add_option("--gamma", ra.gamma, "per-channel decay rate");
  rt->add_option("--eta", ra.eta);
  rt->add_option("--phi", ra.phi);
  rt->add_option("--delta", ra.delta);
  rt->add_flag("--resonance", ra.resonance);
  rt->add_option("mode", ra.mode, "'resonance'");

  GradientArgs gr;
  auto* gd = app.add_subcommand("gradient", "Magnetic gradient that makes eta_eff equal eta");
  gd->add_option("--mass-u", gr.mass_u, "ion mass in atomic mass units");
  gd->add_option("--wavelength-nm", gr.wavelength_nm);
  gd->add_option("--trap-hz", gr.trap_hz, "trap frequency nu / 2 pi");
  gd->add_option("--theta", gr.theta, "beam angle to the trap axis (rad)");
  gd->add_flag("--table", gr.table, "print the gradient table for Yb-172 and Ca-40");
  gd->add_option("--out,-o", gr.out);

  int ions = 1;
  std::string modes_out;
  auto* md = app.add_subcommand("modes", "Axial normal modes of an N-ion chain");
  md->add_option("--ions,-n", ions)->required()->check(CLI::PositiveNumber);
  md->add_option("--out,-o", modes_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*sc) return cmd_scan(scan);
    if (*pr) return cmd_preset(pre);
    if (*rt) return cmd_rates(ra);
    if (*gd) return cmd_gradient(gr);
    if (*md) return cmd_modes(ions, modes_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: RuntimeError: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
