#pragma once

// Resonance condition, dressed states, the analytic cooling rate, the
// adiabatic-elimination spectra and rate extraction from simulated traces.

#include <span>

#include "mgcool/dynamics.hpp"
#include "mgcool/model.hpp"

namespace mgcool::rates {

/// delta = (nu^2 - Omega^2)/nu places |u> at omega_u = nu.
double resonance_detuning(double omega, double nu = 1.0);

struct DressedInfo {
  double omega_u = 0.0;
  double omega_d = 0.0;
  /// <e|u>, <e|d>; the phases of |u>, |d> make both real and non-negative.
  double a_e_u = 0.0;
  double a_e_d = 0.0;
  /// Omega * a_e_u
  double omega_eff = 0.0;
  /// |u>, |d> in the (e, +1, -1) basis.
  Vector u;
  Vector d;
};

DressedInfo dressed_info(const model::SystemParams& p);

/// nu |Omega| / sqrt(nu^2 + Omega^2)
double omega_eff_at_resonance(double omega, double nu = 1.0);

/// W = 8 eta^2 Omega^2 gamma nu^2 / (gamma^2 nu^2 + [(delta - nu) nu + Omega^2]^2)
/// with gamma the per-channel decay rate.
double rate_formula(const model::SystemParams& p);

struct SpectralRates {
  double A_plus = 0.0;
  double A_minus = 0.0;
  Complex S12_at_minus_nu;
  Complex S21_at_nu;
  /// A_plus / (A_minus - A_plus)
  double n_ss = 0.0;

  double W() const { return A_minus - A_plus; }
};

/// Internal (3-level) Liouvillian without motion, column-stacking convention.
Matrix internal_liouvillian(const model::SystemParams& p);

/// F_1 (phonon-lowering part) of the first-order sideband coupling; F_2 = F_1^dag.
Matrix sideband_operator(const model::SystemParams& p);

/// S_ij(omega) = tr(F_i (-(L_0 + i omega))^{-1} [F_j rho_ss]), rho_ss = |D><D|, i, j in {1, 2}.
Complex spectrum(const model::SystemParams& p, int i, int j, double omega);

/// Same quantity from the time integral int_0^t_max e^{i omega t} tr(F_i e^{L_0 t} F_j rho_ss) dt
/// (Simpson rule on a uniform grid of step dt).
Complex spectrum_by_quadrature(const model::SystemParams& p, int i, int j, double omega, double t_max,
                               double dt);

SpectralRates adiabatic_rates(const model::SystemParams& p);

struct RateResult {
  double W = 0.0;
  double n_final = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual = 0.0;
  int window_samples = 0;
  bool valid = false;
};

/// Exponential fit of <n>(t) - n_final over the window where the excess has
/// fallen to between 90% and 10% of its initial value.
RateResult extract_rate(std::span<const double> times, std::span<const double> n_mean);
RateResult extract_rate(const dynamics::CoolingTrace& trace);

}  // namespace mgcool::rates
