#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "mgcool/dynamics.hpp"
#include "mgcool/errors.hpp"
#include "mgcool/experiments.hpp"

namespace mgcool::experiments {

namespace {

using io::format_double;

struct PresetName {
  PresetId id;
  const char* name;
};

constexpr PresetName kPresetNames[] = {
    {PresetId::fig3_rate_vs_omega, "fig3_rate_vs_omega"},
    {PresetId::fig4_optimal_runs, "fig4_optimal_runs"},
    {PresetId::fig5_rate_vs_gamma, "fig5_rate_vs_gamma"},
    {PresetId::fig5_inset_opt_omega, "fig5_inset_opt_omega"},
    {PresetId::figA_rate_vs_eta, "figA_rate_vs_eta"},
    {PresetId::fig6_phase_robustness, "fig6_phase_robustness"},
    {PresetId::fig7_multimode, "fig7_multimode"},
    {PresetId::table1_gradients, "table1_gradients"},
};

std::string describe(const model::SystemParams& p) {
  std::ostringstream s;
  s << "nu=" << format_double(p.nu) << " omega=" << format_double(p.omega) << " delta=" << format_double(p.delta)
    << " gamma_plus=" << format_double(p.gamma_plus) << " gamma_minus=" << format_double(p.gamma_minus)
    << " eta=" << format_double(p.eta) << " eta_eff=" << format_double(p.eta_eff) << " phi=" << format_double(p.phi)
    << " order=" << model::to_string(p.order) << " n_max=" << p.n_max;
  return s.str();
}

std::string describe(const RateSettings& s) {
  std::ostringstream o;
  o << "picture=" << model::to_string(s.picture)
    << " initial=" << (s.initial == model::PhononState::fock ? "fock" : "thermal")
    << " n_initial=" << format_double(s.n_initial) << " samples=" << s.samples
    << " min_decays=" << format_double(s.min_decays) << " tail_tol=" << format_double(s.tail_tol)
    << " rel_tol=" << format_double(s.rel_tol);
  return o.str();
}

void header(io::CsvTable& t, PresetId id) {
  t.comments.push_back("preset=" + to_string(id));
  t.comments.push_back("units=frequencies in nu, time in 1/nu");
}

void finish_header(io::CsvTable& t) {
  std::ostringstream body;
  for (const auto& c : t.comments) body << c << '\n';
  std::ostringstream h;
  h << "config_hash=" << std::hex << std::setw(16) << std::setfill('0') << io::fnv1a(body.str());
  t.comments.push_back(h.str());
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
  return out;
}

std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = a * std::pow(b / a, static_cast<double>(k) / (n - 1));
  return out;
}

RateSettings rate_settings() { return RateSettings{}; }

model::SystemParams rate_base(double gamma) {
  model::SystemParams p;
  p.set_gamma(gamma);
  p.eta = p.eta_eff = 0.1;
  p.order = model::ExpansionOrder::second;
  p.n_max = 12;
  return p;
}

PresetResult fig3(int jobs) {
  PresetResult r;
  auto& t = r.table;
  header(t, PresetId::fig3_rate_vs_omega);
  const RateSettings s = rate_settings();
  t.comments.push_back("settings: " + describe(s));
  t.comments.push_back("delta at resonance for every omega; simulated=0 rows carry the formula only");
  t.columns = {"gamma", "omega", "delta", "W_formula", "W_fit", "n_final", "omega_eff", "simulated"};
  const std::pair<double, std::vector<double>> grids[] = {
      {5.0, {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2, 1.6, 2.0, 2.4, 2.8, 3.2, 4.0, 5.0}},
      {0.5, {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.85, 1.0, 1.2, 1.5, 2.0, 3.0}},
  };
  for (const auto& [gamma, grid] : grids) {
    SweepPlan plan;
    plan.parameter = "omega";
    plan.grid = grid;
    plan.base = rate_base(gamma);
    plan.settings = s;
    t.comments.push_back("gamma=" + format_double(gamma) + ": " + describe(plan.base));
    const auto points = run_sweep(plan, jobs);
    io::Series sim{"simulation gamma=" + format_double(gamma), {}, {}};
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto& q = points[k];
      if (!q.error.empty()) t.comments.push_back("error at omega=" + format_double(grid[k]) + ": " + q.error);
      t.add_row({gamma, q.params.omega, q.params.delta, rates::rate_formula(q.params), q.W_fit, q.n_final,
                 rates::dressed_info(q.params).omega_eff, 1.0});
      sim.x.push_back(q.params.omega);
      sim.y.push_back(q.W_fit);
    }
    io::Series formula{"formula gamma=" + format_double(gamma), {}, {}};
    for (double omega : linspace(0.02, 6.0, 150)) {
      model::SystemParams p = rate_base(gamma);
      p.omega = omega;
      p.delta = rates::resonance_detuning(omega);
      const double w = rates::rate_formula(p);
      t.add_row({gamma, omega, p.delta, w, kNaN, kNaN, rates::dressed_info(p).omega_eff, 0.0});
      formula.x.push_back(omega);
      formula.y.push_back(w);
    }
    r.series.push_back(sim);
    r.series.push_back(formula);
  }
  r.plot = {"Cooling rate vs Rabi frequency", "Omega / nu", "W / nu", false};
  return r;
}

PresetResult fig4() {
  PresetResult r;
  auto& t = r.table;
  header(t, PresetId::fig4_optimal_runs);
  t.comments.push_back("initial state: internal (|+1><+1| + |-1><-1|)/2, phonon Fock |2>");
  t.columns = {"t"};
  std::vector<dynamics::CoolingTrace> traces;
  for (double gamma : {0.5, 5.0}) {
    const model::SystemParams p = optimal_run_params(gamma);
    t.comments.push_back("gamma=" + format_double(gamma) + ": " + describe(p) + " picture=original");
    const auto m = model::build_model(p, model::Picture::original);
    dynamics::IntegratorConfig cfg;
    cfg.t_end = 150.0;
    cfg.sample_every = 0.5;
    const auto trace =
        dynamics::evolve(m, model::initial_state(m.layout, model::default_internal_state(), {2.0}, model::PhononState::fock), cfg);
    const auto fit = rates::extract_rate(trace);
    t.comments.push_back("gamma=" + format_double(gamma) + ": W_fit=" + format_double(fit.W) +
                         " n_final=" + format_double(fit.n_final) + " residual=" + format_double(fit.residual));

    RateSettings thermal;
    thermal.initial = model::PhononState::thermal;
    model::SystemParams pt = p;
    pt.n_max = 20;
    try {
      const RatePoint q = simulate_rate(pt, thermal);
      t.comments.push_back("gamma=" + format_double(gamma) + ": thermal <n>=2 start, n_max=20: W_fit=" +
                           format_double(q.W_fit) + " n_final=" + format_double(q.n_final));
    } catch (const Error& e) {
      t.comments.push_back("gamma=" + format_double(gamma) + ": thermal start failed: " + e.what());
    }
    t.columns.push_back("n_mean_gamma" + format_double(gamma));
    r.series.push_back({"gamma=" + format_double(gamma), trace.times, trace.n_mean});
    traces.push_back(trace);
  }
  for (std::size_t k = 0; k < traces[0].size(); ++k) {
    t.add_row({traces[0].times[k], traces[0].n_mean[k], traces[1].n_mean[k]});
  }
  r.plot = {"Average population vs time", "t nu", "<n>", true};
  return r;
}

struct GammaOptimum {
  double gamma;
  OmegaOptimum opt;
  std::string error;
};

std::vector<GammaOptimum> optimise_over_gamma(io::CsvTable& t) {
  const RateSettings s = rate_settings();
  t.comments.push_back("settings: " + describe(s));
  t.comments.push_back("per point: golden-section search of Omega in [0.1, 12], tolerance 0.02, delta at resonance");
  t.comments.push_back("base: " + describe(rate_base(1.0)) + " (gamma varies)");
  std::vector<GammaOptimum> out;
  for (double gamma : logspace(0.25, 20.0, 10)) {
    GammaOptimum g{gamma, {}, {}};
    try {
      g.opt = optimize_omega(rate_base(gamma), s, 0.1, 12.0);
    } catch (const Error& e) {
      g.error = e.what();
      t.comments.push_back("error at gamma=" + format_double(gamma) + ": " + g.error);
    }
    out.push_back(g);
  }
  return out;
}

PresetResult fig5(bool inset) {
  PresetResult r;
  auto& t = r.table;
  header(t, inset ? PresetId::fig5_inset_opt_omega : PresetId::fig5_rate_vs_gamma);
  const auto points = optimise_over_gamma(t);
  if (inset) {
    t.columns = {"gamma", "omega_opt", "omega_eff_opt"};
  } else {
    t.columns = {"gamma", "W_opt", "omega_opt", "delta", "n_final", "evaluations"};
  }
  io::Series a{inset ? "Omega_opt" : "W_opt", {}, {}}, b{"Omega_eff_opt", {}, {}};
  for (const auto& g : points) {
    const auto& q = g.opt.best;
    const double omega_eff = g.error.empty() ? q.omega_eff : kNaN;
    if (inset) {
      t.add_row({g.gamma, g.opt.omega, omega_eff});
      a.x.push_back(g.gamma);
      a.y.push_back(g.opt.omega);
      b.x.push_back(g.gamma);
      b.y.push_back(omega_eff);
    } else {
      t.add_row({g.gamma, g.opt.W, g.opt.omega, g.error.empty() ? q.params.delta : kNaN, q.n_final,
                 static_cast<double>(g.opt.evaluations)});
      a.x.push_back(g.gamma);
      a.y.push_back(g.opt.W);
    }
  }
  r.series.push_back(a);
  if (inset) r.series.push_back(b);
  r.plot = inset ? io::PlotSpec{"Optimal Rabi frequencies vs decay rate", "gamma / nu", "Omega / nu", false}
                 : io::PlotSpec{"Optimal cooling rate vs decay rate", "gamma / nu", "W / nu", false};
  return r;
}

PresetResult figA() {
  PresetResult r;
  auto& t = r.table;
  header(t, PresetId::figA_rate_vs_eta);
  const RateSettings s = rate_settings();
  t.comments.push_back("settings: " + describe(s));
  t.comments.push_back("per point: golden-section search of Omega in [0.1, 12], tolerance 0.02, delta at resonance");
  t.comments.push_back("base: " + describe(rate_base(5.0)) + " (eta = eta_eff varies; n_max=16 above eta=0.1)");
  t.columns = {"eta", "W_opt", "omega_opt", "n_final", "evaluations"};
  std::vector<double> xs, ws, os;
  io::Series a{"W_opt", {}, {}};
  for (double eta : {0.02, 0.03, 0.04, 0.05, 0.07, 0.1, 0.15, 0.2}) {
    model::SystemParams p = rate_base(5.0);
    p.eta = p.eta_eff = eta;
    if (eta > 0.1) p.n_max = 16;
    try {
      const OmegaOptimum o = optimize_omega(p, s, 0.1, 12.0);
      t.add_row({eta, o.W, o.omega, o.best.n_final, static_cast<double>(o.evaluations)});
      a.x.push_back(eta);
      a.y.push_back(o.W);
      if (eta <= 0.1 + 1e-12) {
        xs.push_back(eta);
        ws.push_back(o.W);
        os.push_back(o.omega);
      }
    } catch (const Error& e) {
      t.comments.push_back("error at eta=" + format_double(eta) + ": " + e.what());
      t.add_row({eta, kNaN, kNaN, kNaN, kNaN});
    }
  }
  try {
    t.comments.push_back("power law over eta in [0.02, 0.1]: W exponent=" + format_double(fit_power_law(xs, ws).exponent) +
                         " Omega_opt exponent=" + format_double(fit_power_law(xs, os).exponent));
  } catch (const Error& e) {
    t.comments.push_back(std::string("power law fit failed: ") + e.what());
  }
  r.series.push_back(a);
  r.plot = {"Optimal cooling rate vs Lamb-Dicke parameter", "eta", "W / nu", false};
  return r;
}

PresetResult fig6() {
  PresetResult r;
  auto& t = r.table;
  header(t, PresetId::fig6_phase_robustness);
  model::SystemParams p = optimal_run_params(5.0);
  t.comments.push_back("base: " + describe(p) + " (phi varies)");
  RateSettings s;
  s.picture = model::Picture::schrieffer_wolff;
  t.comments.push_back("settings: " + describe(s));
  t.comments.push_back("n_final is the stationary <n> in the transformed picture");
  t.columns = {"phi", "deviation", "W", "n_final"};
  io::Series w{"W", {}, {}}, n{"n_final", {}, {}};
  for (double d : linspace(-0.4, 0.4, 9)) {
    const double phi = std::numbers::pi / 2.0 * (1.0 + d);
    try {
      const PhasePoint q = phase_point(phi);
      t.add_row({phi, d, q.W, q.n_final});
      w.x.push_back(phi);
      w.y.push_back(q.W);
      n.x.push_back(phi);
      n.y.push_back(q.n_final);
    } catch (const Error& e) {
      t.comments.push_back("error at phi=" + format_double(phi) + ": " + e.what());
      t.add_row({phi, d, kNaN, kNaN});
    }
  }
  r.series = {w, n};
  r.plot = {"Phase robustness", "phi", "W / nu and <n>_ss", true};
  return r;
}

dynamics::CoolingTrace multimode_trace(int resonant_mode, const std::vector<int>& truncation,
                                       const std::vector<double>& n0, double t_end) {
  model::ModeSpec modes = model::modes_for_chain(3);
  modes.per_mode_truncation = truncation;
  const auto m = model::build_multimode_model(multimode_params(resonant_mode), modes, model::Picture::original);
  dynamics::IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.sample_every = 0.5;
  cfg.rel_tol = 1e-6;
  cfg.abs_tol = 1e-9;
  cfg.tail_tol = 1e-4;
  cfg.positivity_checks = 2;
  cfg.rotating_frame = false;
  return dynamics::evolve(m, model::initial_state(m.layout, model::default_internal_state(), n0, model::PhononState::fock, 2),
                          cfg);
}

PresetResult fig7(const PresetOptions& o) {
  PresetResult r;
  auto& t = r.table;
  header(t, PresetId::fig7_multimode);
  const model::ModeSpec modes = model::modes_for_chain(3);
  std::ostringstream freqs;
  for (double f : modes.mode_freqs) freqs << format_double(f) << ' ';
  t.comments.push_back("three ions, laser on ion 1, mode frequencies " + freqs.str());
  t.comments.push_back("COM resonant: " + describe(multimode_params(0)) + " picture=original");
  t.comments.push_back("trace: COM Fock |2>, other modes |0>, truncation (12,5,5), t_end=" +
                       format_double(o.multimode_t_end) + " rel_tol=1e-6 tail_tol=1e-4");
  const std::vector<int> ss_trunc{4, 5, 5};
  const MultimodeFinal fin = multimode_final_populations(ss_trunc);
  t.comments.push_back("final populations (stationary state, truncation (4,5,5)): n1=" + format_double(fin.n_modes[0]) +
                       " n2=" + format_double(fin.n_modes[1]) + " n3=" + format_double(fin.n_modes[2]) +
                       " tail=" + format_double(fin.tail));
  const auto right = multimode_trace(0, {12, 5, 5}, {2.0, 0.0, 0.0}, o.multimode_t_end);
  t.columns = {"t", "n_mode1", "n_mode2", "n_mode3"};
  std::vector<dynamics::CoolingTrace> left;
  if (o.multimode_left_panel) {
    for (int resonant : {0, 1}) {
      t.comments.push_back("all modes hot, mode " + std::to_string(resonant + 1) +
                           " resonant: truncation (10,8,8), delta=" + format_double(multimode_params(resonant).delta));
      left.push_back(multimode_trace(resonant, {10, 8, 8}, {2.0, 2.0, 2.0}, o.multimode_t_end));
      for (int k = 1; k <= 3; ++k) {
        t.columns.push_back("hot_res" + std::to_string(resonant + 1) + "_n_mode" + std::to_string(k));
      }
    }
  }
  for (std::size_t s = 0; s < right.size(); ++s) {
    std::vector<double> row{right.times[s]};
    for (int k = 0; k < 3; ++k) row.push_back(right.n_mean_modes[k][s]);
    for (const auto& l : left) {
      for (int k = 0; k < 3; ++k) row.push_back(s < l.size() ? l.n_mean_modes[k][s] : kNaN);
    }
    t.add_row(row);
  }
  for (int k = 0; k < 3; ++k) r.series.push_back({"mode " + std::to_string(k + 1), right.times, right.n_mean_modes[k]});
  r.plot = {"Three-ion cooling, COM resonant", "t nu", "<n_k>", true};
  return r;
}

PresetResult table1() {
  PresetResult r;
  auto& t = r.table;
  header(t, PresetId::table1_gradients);
  t.comments.push_back("S1/2-P1/2 lines, theta=0, g=" + format_double(model::constants::electron_g) +
                       ", |m_j|=1/2; trap_freq in Hz (angular 2 pi f)");
  t.columns = {"mass_number", "wavelength_nm", "trap_freq_hz", "gradient_T_per_m", "eta"};
  struct Ion {
    double mass_number, mass_u, wavelength_nm;
  };
  const Ion ions[] = {{172, 171.9363815, 369.0}, {40, 39.962590863, 397.0}};
  for (const auto& ion : ions) {
    for (double f : {5e5, 1e6}) {
      model::GradientSpec g;
      g.ion_mass = ion.mass_u * model::constants::atomic_mass;
      g.wavelength = ion.wavelength_nm * 1e-9;
      g.trap_freq = 2.0 * std::numbers::pi * f;
      const double grad = model::gradient_from_eta(g);
      t.add_row({ion.mass_number, ion.wavelength_nm, f, grad, model::laser_lamb_dicke(g)});
    }
  }
  r.plot = {"Required gradients", "trap frequency / Hz", "dB/dx / (T/m)", false};
  for (std::size_t i = 0; i < 2; ++i) {
    io::Series s{i == 0 ? "Yb-172" : "Ca-40", {}, {}};
    for (std::size_t k = 0; k < 2; ++k) {
      s.x.push_back(t.rows[2 * i + k][2]);
      s.y.push_back(t.rows[2 * i + k][3]);
    }
    r.series.push_back(s);
  }
  return r;
}

}  // namespace

PresetId parse_preset(std::string_view text) {
  for (const auto& p : kPresetNames) {
    if (text == p.name) return p.id;
  }
  throw ConfigError("unknown preset '" + std::string(text) + "'");
}

std::string to_string(PresetId id) {
  for (const auto& p : kPresetNames) {
    if (p.id == id) return p.name;
  }
  return "unknown";
}

std::vector<PresetId> all_presets() {
  std::vector<PresetId> out;
  for (const auto& p : kPresetNames) out.push_back(p.id);
  return out;
}

PresetResult run_preset(PresetId id, const PresetOptions& options) {
  PresetResult r;
  switch (id) {
    case PresetId::fig3_rate_vs_omega: r = fig3(options.jobs); break;
    case PresetId::fig4_optimal_runs: r = fig4(); break;
    case PresetId::fig5_rate_vs_gamma: r = fig5(false); break;
    case PresetId::fig5_inset_opt_omega: r = fig5(true); break;
    case PresetId::figA_rate_vs_eta: r = figA(); break;
    case PresetId::fig6_phase_robustness: r = fig6(); break;
    case PresetId::fig7_multimode: r = fig7(options); break;
    case PresetId::table1_gradients: r = table1(); break;
  }
  finish_header(r.table);
  return r;
}

}  // namespace mgcool::experiments
