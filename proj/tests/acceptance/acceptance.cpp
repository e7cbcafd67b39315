// One PASS/FAIL line per acceptance criterion. Arguments select a subset (e.g. "1 4 8").

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mgcool/dynamics.hpp"
#include "mgcool/errors.hpp"
#include "mgcool/experiments.hpp"
#include "mgcool/hilbert.hpp"
#include "mgcool/model.hpp"
#include "mgcool/rates.hpp"

using namespace mgcool;
using model::ExpansionOrder;
using model::Picture;
using model::SystemParams;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double rel(double a, double b) { return std::abs(a / b - 1.0); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

SystemParams single(double gamma, double omega, int n_max, ExpansionOrder order = ExpansionOrder::second) {
  SystemParams p;
  p.set_gamma(gamma);
  p.omega = omega;
  p.delta = rates::resonance_detuning(omega);
  p.eta = p.eta_eff = 0.1;
  p.order = order;
  p.n_max = n_max;
  return p;
}

// <e, m| H |D, m'> with composite mode indices m, m'
Complex e_dark(const Matrix& h, int mode_dim, int m, int m2) {
  const Vector dark = hilbert::dark_state();
  Complex s = 0.0;
  for (int l = 1; l < 3; ++l) s += h(m, l * mode_dim + m2) * dark(l);
  return s;
}

void cancellation(Outcome& o) {
  SystemParams p = single(5.0, 2.8, 20, ExpansionOrder::first);
  const int d = p.n_max + 1;
  const Matrix h = model::build_sw_hamiltonian(p);
  double carrier = 0.0, blue = 0.0;
  for (int n = 0; n < p.n_max; ++n) {
    carrier = std::max(carrier, std::abs(e_dark(h, d, n, n)));
    blue = std::max(blue, std::abs(e_dark(h, d, n + 1, n)));
  }
  carrier = std::max(carrier, std::abs(e_dark(h, d, p.n_max, p.n_max)));

  // delta|e><e| + nu a^dag a + [Omega/sqrt2 (1+i)|e><B| + sqrt2 eta Omega (1+i)|e><D| a + h.c.]
  const auto f = hilbert::fock_ops(hilbert::FockSpace(p.n_max));
  const Matrix id = Matrix::Identity(d, d);
  const Vector e = hilbert::ket(hilbert::Level::excited);
  const Complex one_i(1.0, 1.0);
  Matrix c = hilbert::kron({Matrix(p.omega / std::sqrt(2.0) * one_i * e * hilbert::bright_state().adjoint()), id});
  c += hilbert::kron({Matrix(std::sqrt(2.0) * p.eta * p.omega * one_i * e * hilbert::dark_state().adjoint()), f.a});
  Matrix expected = hilbert::kron({Matrix(p.delta * e * e.adjoint()), id}) +
                    hilbert::kron({Matrix(Matrix::Identity(3, 3)), Matrix(p.nu * f.n_op)});
  expected += c + c.adjoint();
  const double dev = max_abs(h - expected);
  o.detail << "carrier=" << carrier << " blue=" << blue << " closed-form deviation=" << dev;
  o.require(carrier < 1e-14, "carrier < 1e-14");
  o.require(blue < 1e-14, "blue < 1e-14");
  o.require(dev < 1e-12, "entrywise match < 1e-12");
}

void table_gradients(Outcome& o) {
  const auto t = experiments::run_preset(experiments::PresetId::table1_gradients).table;
  const auto g = t.column("gradient_T_per_m");
  const auto eta = t.column("eta");
  const double g_ref[] = {607.6, 1215.0, 564.7, 1130.0};
  const double eta_ref[] = {0.13, 0.09, 0.25, 0.18};
  for (int k = 0; k < 4; ++k) {
    o.detail << (k ? "; " : "") << "dB/dx=" << g[k] << " (" << 100 * rel(g[k], g_ref[k]) << "%) eta=" << eta[k]
             << " (" << 100 * rel(eta[k], eta_ref[k]) << "%)";
    o.require(rel(g[k], g_ref[k]) <= 5e-3, "gradient " + std::to_string(k + 1) + " within 0.5%");
    o.require(rel(eta[k], eta_ref[k]) <= 5e-3, "eta " + std::to_string(k + 1) + " within 0.5%");
  }
}

void dressed(Outcome& o) {
  const double a = rates::dressed_info(single(0.5, 0.85, 4)).omega_eff;
  const double b = rates::dressed_info(single(5.0, 2.8, 4)).omega_eff;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> om(0.0, 5.0), de(-10.0, 10.0), ph(0.0, 2.0 * kPi);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    SystemParams p;
    p.omega = om(rng);
    p.delta = de(rng);
    p.phi = ph(rng);
    const Complex pair = 1.0 + std::exp(Complex(0.0, p.phi));
    Matrix h = p.delta * hilbert::transition(hilbert::Level::excited, hilbert::Level::excited);
    const Matrix c = p.omega / std::sqrt(2.0) * pair * hilbert::ket(hilbert::Level::excited) *
                     hilbert::bright_state().adjoint();
    h += c + c.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const auto info = rates::dressed_info(p);
    // the dark state stays at zero; u and d are the extreme eigenvalues when the bright coupling is nonzero
    std::vector<double> ev{es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
    double best_u = 1e300, best_d = 1e300;
    for (double v : ev) {
      best_u = std::min(best_u, std::abs(v - info.omega_u));
      best_d = std::min(best_d, std::abs(v - info.omega_d));
    }
    worst = std::max({worst, best_u, best_d});
  }
  o.detail << "Omega_eff(0.85)=" << a << " Omega_eff(2.8)=" << b << " max eigenvalue deviation=" << worst;
  o.require(std::abs(a - 0.65) <= 1e-2, "Omega_eff(0.85) = 0.65 +- 0.01");
  o.require(std::abs(b - 0.94) <= 1e-2, "Omega_eff(2.8) = 0.94 +- 0.01");
  o.require(worst < 1e-10, "eigenvalues within 1e-10");
}

void adiabatic(Outcome& o) {
  double heat = 0.0, cool = 0.0, nss = 0.0;
  for (double gamma : {0.5, 5.0}) {
    for (int k = 0; k < 10; ++k) {
      const SystemParams p = single(gamma, 0.02 + 0.03 * k, 4);
      const auto s = rates::adiabatic_rates(p);
      heat = std::max(heat, std::abs(s.A_plus) / s.A_minus);
      cool = std::max(cool, rel(s.A_minus, rates::rate_formula(p)));
      nss = std::max(nss, std::abs(s.n_ss));
    }
  }
  o.detail << "max |A+|/A-=" << heat << " max |A-/W_formula - 1|=" << cool << " max n_ss=" << nss;
  o.require(heat < 1e-12, "A+ = 0");
  o.require(cool < 1e-6, "A- = formula");
  o.require(nss < 1e-12, "n_ss = 0");
}

experiments::RateSettings rate_settings() {
  experiments::RateSettings s;
  return s;
}

void formula_agreement(Outcome& o) {
  double dev02 = 0.0;
  for (double omega : {0.05, 0.1, 0.2, 0.3}) {
    const auto r = experiments::simulate_rate(single(5.0, omega, 12), rate_settings());
    const double dev = rel(r.W_fit, r.W_formula);
    if (omega == 0.2) dev02 = dev;
    o.detail << "Omega=" << omega << ": W_fit=" << r.W_fit << " W_formula=" << r.W_formula << " ("
             << 100 * dev << "%); ";
    o.require(dev <= 0.2, "Omega=" + std::to_string(omega) + " within 20%");
  }
  const auto r = experiments::simulate_rate(single(5.0, 2.0, 12), rate_settings());
  const double dev2 = rel(r.W_fit, r.W_formula);
  o.detail << "Omega=2: W_fit=" << r.W_fit << " W_formula=" << r.W_formula << " (" << 100 * dev2 << "%)";
  o.require(dev2 > dev02, "deviation at Omega=2 exceeds deviation at Omega=0.2");
}

void optimal_runs(Outcome& o) {
  const double target[] = {0.08, 0.09};
  int k = 0;
  for (double gamma : {0.5, 5.0}) {
    const auto r = experiments::simulate_rate(experiments::optimal_run_params(gamma), rate_settings());
    o.detail << (k ? "; " : "") << "gamma=" << gamma << ": W=" << r.W_fit << " n_final=" << r.n_final;
    o.require(std::abs(r.W_fit / target[k] - 1.0) <= 0.2, "W within 20% at gamma=" + std::to_string(gamma));
    o.require(r.n_final >= 0.005 && r.n_final <= 0.02, "n_final in [0.005, 0.02] at gamma=" + std::to_string(gamma));
    ++k;
  }
}

void phase(Outcome& o) {
  const auto ref = experiments::phase_point(kPi / 2.0);
  o.detail << "phi=pi/2: W=" << ref.W << " n=" << ref.n_final;
  for (double f : {0.8, 1.2}) {
    const auto p = experiments::phase_point(f * kPi / 2.0);
    o.detail << "; phi=" << f << "*pi/2: W=" << p.W << " (" << 100 * p.W / ref.W << "%) n=" << p.n_final;
    o.require(p.n_final < 1e-2, "final population < 1e-2 at factor " + std::to_string(f));
    o.require(p.W >= 0.5 * ref.W, "rate >= 50% at factor " + std::to_string(f));
  }
}

void multimode(Outcome& o) {
  const auto fin = experiments::multimode_final_populations({4, 5, 5});
  const double target[] = {0.005, 0.031, 0.14};
  o.detail << "n=" << fin.n_modes[0] << "/" << fin.n_modes[1] << "/" << fin.n_modes[2] << " (truncation 4,5,5)";
  for (int k = 0; k < 3; ++k) {
    o.require(std::abs(fin.n_modes[k] / target[k] - 1.0) <= 0.3, "mode " + std::to_string(k + 1) + " within 30%");
  }

  model::ModeSpec modes = model::modes_for_chain(3);
  modes.per_mode_truncation = {1, 1, 1};
  SystemParams p = experiments::multimode_params(0);
  p.order = ExpansionOrder::first;
  const Matrix h = model::build_sw_hamiltonian(p, modes, model::SwRoute::closed_form);
  const int mdim = 8;
  const int excite[3] = {4, 2, 1};
  const Complex com_blue = e_dark(h, mdim, excite[0], 0);
  o.detail << "; COM blue=" << std::abs(com_blue);
  o.require(com_blue == Complex(0.0), "COM blue coefficient exactly 0");
  for (int k = 1; k < 3; ++k) {
    const double nu = modes.mode_freqs[k];
    const Complex red = e_dark(h, mdim, 0, excite[k]);
    const Complex blue = e_dark(h, mdim, excite[k], 0);
    const double ratio = std::abs(blue / red);
    const double expected = (1.0 - 1.0 / nu) / (1.0 + 1.0 / nu);
    o.detail << "; mode " << k + 1 << " blue/red=" << ratio << " (dev " << std::abs(ratio - expected) << ")";
    o.require(std::abs(ratio - expected) < 1e-12, "blue/red ratio of mode " + std::to_string(k + 1));
  }
}

void scaling(Outcome& o) {
  std::vector<double> etas{0.02, 0.03, 0.05, 0.07, 0.1}, w, om;
  experiments::RateSettings s = rate_settings();
  for (double eta : etas) {
    SystemParams p = single(5.0, 1.0, 12);
    p.eta = p.eta_eff = eta;
    const auto opt = experiments::optimize_omega(p, s, 0.1, 12.0);
    w.push_back(opt.W);
    om.push_back(opt.omega);
    o.detail << "eta=" << eta << ": Omega*=" << opt.omega << " W*=" << opt.W << "; ";
  }
  const auto fw = experiments::fit_power_law(etas, w);
  const auto fo = experiments::fit_power_law(etas, om);
  o.detail << "W exponent=" << fw.exponent << " Omega exponent=" << fo.exponent;
  o.require(std::abs(fw.exponent - 1.28) <= 0.15, "W exponent 1.28 +- 0.15");
  o.require(std::abs(fo.exponent + 0.45) <= 0.15, "Omega exponent -0.45 +- 0.15");
}

void properties(Outcome& o) {
  // trace and Hermiticity along a cooling run
  const SystemParams p = single(5.0, 2.8, 14);
  const auto m = model::build_model(p, Picture::original);
  const Matrix rho0 =
      model::initial_state(m.layout, model::default_internal_state(), {2.0}, model::PhononState::fock);
  dynamics::IntegratorConfig cfg;
  cfg.t_end = 60.0;
  cfg.sample_every = 0.5;
  const auto tr = dynamics::evolve(m, rho0, cfg);
  double trace = 0.0;
  for (double t : tr.trace_defect) trace = std::max(trace, t);
  o.require(trace < 1e-7, "trace preservation < 1e-7");
  o.require(tr.max_hermiticity_defect < 1e-8, "Hermiticity < 1e-8");

  cfg.rel_tol *= 0.5;
  cfg.abs_tol *= 0.5;
  const double step = std::abs(dynamics::evolve(m, rho0, cfg).n_mean.back() - tr.n_mean.back());
  o.require(step < 1e-6, "step-size convergence < 1e-6");

  // dark vacuum of the transformed picture
  const auto sw = model::build_model(single(5.0, 2.8, 10, ExpansionOrder::first), Picture::schrieffer_wolff);
  const Vector dv = hilbert::dark_state();
  Matrix vac = Matrix::Zero(11, 11);
  vac(0, 0) = 1.0;
  const Matrix dark = hilbert::kron({Matrix(dv * dv.adjoint()), vac});
  const double stationary = max_abs(dynamics::apply_liouvillian(sw, dark));
  o.require(stationary < 1e-12, "dark-state stationarity");

  // trace annihilation of every dissipator on random Hermitian inputs
  std::mt19937 rng(99);
  std::normal_distribution<double> g;
  double annihilation = 0.0;
  for (auto picture : {Picture::original, Picture::schrieffer_wolff, Picture::dressed}) {
    for (auto order : {ExpansionOrder::first, ExpansionOrder::second, ExpansionOrder::exact}) {
      SystemParams q = single(5.0, 2.8, 8, order);
      q.omega = 0.0;
      const auto mm = model::build_model(q, picture);
      Matrix r(mm.dim(), mm.dim());
      for (int i = 0; i < r.rows(); ++i) {
        for (int j = 0; j < r.cols(); ++j) r(i, j) = Complex(g(rng), g(rng));
      }
      r = (r + r.adjoint()).eval();
      annihilation = std::max(annihilation, std::abs(dynamics::apply_liouvillian(mm, r).trace()));
    }
  }
  o.require(annihilation < 1e-10, "dissipator trace annihilation < 1e-10");

  SystemParams e = single(5.0, 2.0, 16, ExpansionOrder::exact);
  e.delta = -3.0;
  const Matrix h = model::build_rwa_hamiltonian(e);
  const Matrix u = model::build_sw_unitary(e);
  Eigen::SelfAdjointEigenSolver<Matrix> s1(h), s2(u * h * u.adjoint());
  const double spectrum = (s1.eigenvalues() - s2.eigenvalues()).cwiseAbs().maxCoeff();
  o.require(spectrum < 1e-8, "picture spectrum equivalence < 1e-8");

  SystemParams w = single(2.0, 1.0, 4);
  double resolvent = 0.0;
  for (double phi : {kPi / 2.0, 0.8 * kPi / 2.0}) {
    w.phi = phi;
    for (auto [i, j, freq] : {std::tuple{2, 1, 1.0}, std::tuple{1, 2, -1.0}}) {
      resolvent = std::max(resolvent, std::abs(rates::spectrum(w, i, j, freq) -
                                               rates::spectrum_by_quadrature(w, i, j, freq, 60.0, 0.005)));
    }
  }
  o.require(resolvent < 1e-6, "resolvent vs quadrature < 1e-6");

  o.detail << "trace=" << trace << " hermiticity=" << tr.max_hermiticity_defect << " step=" << step
           << " dark=" << stationary << " annihilation=" << annihilation << " spectrum=" << spectrum
           << " resolvent=" << resolvent;
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "cancellation identity", cancellation},
      {2, "gradient table", table_gradients},
      {3, "dressed states and effective Rabi frequency", dressed},
      {4, "adiabatic elimination consistency", adiabatic},
      {5, "formula vs simulation", formula_agreement},
      {6, "optimal runs", optimal_runs},
      {7, "phase robustness", phase},
      {8, "multimode cooling", multimode},
      {9, "scaling laws", scaling},
      {10, "property suite", properties},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::stoi(argv[k]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
