#include "mgcool/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mgcool/dynamics.hpp"
#include "mgcool/errors.hpp"

namespace mgcool::experiments {

void RateSettings::validate() const {
  if (samples < 100) throw ConfigError("rate runs need at least 100 samples");
  if (!(min_decays > 0.0)) throw ConfigError("min_decays must be positive");
  if (max_extensions < 0) throw ConfigError("max_extensions must be non-negative");
  if (!(n_initial > 0.0)) throw ConfigError("rate runs need a positive initial <n>");
  if (!(tail_tol > 0.0) || !(rel_tol > 0.0)) throw ConfigError("tolerances must be positive");
}

RatePoint simulate_rate(const model::SystemParams& p, const RateSettings& s) {
  s.validate();
  p.validate();
  RatePoint out;
  out.params = p;
  out.W_formula = rates::rate_formula(p);
  out.omega_eff = rates::dressed_info(p).omega_eff;

  const model::LindbladModel m = model::build_model(p, s.picture);
  const Matrix rho0 = model::initial_state(m.layout, model::default_internal_state(), {s.n_initial}, s.initial);

  const double guess = out.W_formula > 0.0 ? std::min(out.W_formula, 0.1) : 0.01;
  double t_end = std::max(12.0 / guess, 50.0);
  for (int attempt = 0;; ++attempt) {
    dynamics::IntegratorConfig cfg;
    cfg.method = t_end > s.propagator_after ? dynamics::Method::propagator : dynamics::Method::adaptive_rk;
    cfg.t_end = t_end;
    cfg.sample_every = t_end / s.samples;
    cfg.tail_tol = s.tail_tol;
    cfg.rel_tol = s.rel_tol;
    const dynamics::CoolingTrace trace = dynamics::evolve(m, rho0, cfg);
    if (!trace.valid) throw IntegratorError("invalid trace: " + trace.invalid_reason);
    const bool last = attempt >= s.max_extensions;
    rates::RateResult fit;
    try {
      fit = rates::extract_rate(trace);
    } catch (const FitError&) {
      if (last) throw;
      t_end *= 2.0;
      continue;
    }
    if (fit.W * t_end >= s.min_decays || last) {
      if (fit.W * t_end < s.min_decays) {
        throw FitError("W t_end = " + std::to_string(fit.W * t_end) + " after " + std::to_string(attempt) +
                       " extensions");
      }
      out.W_fit = fit.W;
      out.n_final = fit.n_final;
      out.residual = fit.residual;
      out.t_end = t_end;
      out.ok = true;
      return out;
    }
    t_end = std::max(2.0 * t_end, 1.2 * s.min_decays / std::max(fit.W, 1e-12));
  }
}

void SweepPlan::validate() const {
  static const char* known[] = {"omega", "gamma", "eta", "phi", "delta"};
  if (std::find(std::begin(known), std::end(known), parameter) == std::end(known)) {
    throw ConfigError("cannot sweep '" + parameter + "'");
  }
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  const bool up = grid.size() < 2 || grid[1] > grid[0];
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (up ? !(grid[k] > grid[k - 1]) : !(grid[k] < grid[k - 1])) {
      throw ConfigError("sweep grid must be strictly monotone");
    }
  }
  if (parameter == "delta" && delta_at_resonance) {
    throw ConfigError("delta cannot be swept while slaved to the resonance condition");
  }
  settings.validate();
}

model::SystemParams SweepPlan::point(std::size_t k) const {
  model::SystemParams p = base;
  const double v = grid.at(k);
  if (parameter == "omega") p.omega = v;
  else if (parameter == "gamma") p.set_gamma(v);
  else if (parameter == "eta") {
    p.eta = v;
    if (tie_eta_eff) p.eta_eff = v;
  } else if (parameter == "phi") p.phi = v;
  else if (parameter == "delta") p.delta = v;
  if (delta_at_resonance) p.delta = rates::resonance_detuning(p.omega, p.nu);
  return p;
}

std::vector<RatePoint> run_sweep(const SweepPlan& plan, int jobs) {
  plan.validate();
  const std::size_t n = plan.grid.size();
  std::vector<RatePoint> out(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      const model::SystemParams p = plan.point(k);
      try {
        out[k] = simulate_rate(p, plan.settings);
      } catch (const Error& e) {
        out[k] = RatePoint{};
        out[k].params = p;
        out[k].error = e.what();
      }
    }
  };
  const int workers = std::clamp(jobs, 1, static_cast<int>(n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return out;
}

OmegaOptimum optimize_omega(const model::SystemParams& base, const RateSettings& settings, double lo, double hi,
                            double tol) {
  if (!(lo > 0.0) || !(hi > lo) || !(tol > 0.0)) throw ConfigError("optimize_omega needs 0 < lo < hi and tol > 0");
  OmegaOptimum best;
  auto evaluate = [&](double omega) {
    model::SystemParams p = base;
    p.omega = omega;
    p.delta = rates::resonance_detuning(omega, p.nu);
    const RatePoint r = simulate_rate(p, settings);
    ++best.evaluations;
    if (!(r.W_fit <= best.W)) {
      best.W = r.W_fit;
      best.omega = omega;
      best.best = r;
    }
    return r.W_fit;
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = evaluate(x1), f2 = evaluate(x2);
  while (b - a > tol) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = evaluate(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = evaluate(x2);
    }
  }
  if (a == lo || b == hi) {
    throw BracketError("no interior maximum of W in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return best;
}

PowerLaw fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw FitError("power-law fit needs equally long x and y");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) throw FitError("power-law fit needs two positive points");
  const double det = m * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw FitError("power-law fit has degenerate abscissae");
  PowerLaw out;
  out.exponent = (m * sxy - sx * sy) / det;
  out.prefactor = std::exp((sy - out.exponent * sx) / m);
  return out;
}

model::SystemParams optimal_run_params(double gamma) {
  model::SystemParams p;
  p.set_gamma(gamma);
  if (gamma == 0.5) {
    p.omega = 0.85;
    p.delta = 0.28;
  } else if (gamma == 5.0) {
    p.omega = 2.8;
    p.delta = -6.84;
  } else {
    throw ConfigError("optimal runs exist for gamma 0.5 and 5 only");
  }
  p.eta = p.eta_eff = 0.1;
  p.order = model::ExpansionOrder::second;
  p.n_max = 14;
  return p;
}

model::SystemParams multimode_params(int resonant_mode) {
  const model::ModeSpec modes = model::modes_for_chain(3);
  if (resonant_mode < 0 || resonant_mode >= modes.num_modes()) throw ConfigError("resonant mode out of range");
  model::SystemParams p;
  p.set_gamma(5.0);
  p.omega = 2.8;
  p.eta = p.eta_eff = 0.1;
  p.order = model::ExpansionOrder::second;
  p.delta = rates::resonance_detuning(p.omega, modes.mode_freqs[resonant_mode]);
  return p;
}

MultimodeFinal multimode_final_populations(const std::vector<int>& truncation) {
  model::ModeSpec modes = model::modes_for_chain(3);
  modes.per_mode_truncation = truncation;
  const model::LindbladModel m = model::build_multimode_model(multimode_params(0), modes, model::Picture::original);
  const Matrix rho = dynamics::steady_state(m);
  const dynamics::Snapshot snap = dynamics::observe(m, rho);
  return {snap.n_mean_modes, snap.tail, truncation};
}

PhasePoint phase_point(double phi) {
  model::SystemParams p = optimal_run_params(5.0);
  p.phi = phi;
  RateSettings s;
  s.picture = model::Picture::schrieffer_wolff;
  PhasePoint out;
  out.phi = phi;
  out.W = simulate_rate(p, s).W_fit;
  const model::LindbladModel m = model::build_model(p, model::Picture::schrieffer_wolff);
  out.n_final = dynamics::observe(m, dynamics::steady_state(m)).n_mean_modes[0];
  return out;
}

}  // namespace mgcool::experiments
