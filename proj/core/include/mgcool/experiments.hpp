#pragma once

// Parameter sweeps, the Rabi-frequency optimizer and the named presets that
// regenerate each figure and table as CSV data.

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "mgcool/io.hpp"
#include "mgcool/model.hpp"
#include "mgcool/rates.hpp"

namespace mgcool::experiments {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// How a single-ion cooling rate is measured by simulation.
struct RateSettings {
  model::Picture picture = model::Picture::original;
  model::PhononState initial = model::PhononState::fock;
  double n_initial = 2.0;
  int samples = 2000;
  /// t_end is doubled until W_fit * t_end reaches this value.
  double min_decays = 8.0;
  int max_extensions = 4;
  double tail_tol = 1e-6;
  double rel_tol = 1e-8;
  /// Runs longer than this use the dense propagator instead of Dormand-Prince.
  double propagator_after = 3000.0;

  void validate() const;
};

struct RatePoint {
  model::SystemParams params;
  double W_fit = kNaN;
  double W_formula = kNaN;
  double n_final = kNaN;
  double omega_eff = kNaN;
  double residual = kNaN;
  double t_end = kNaN;
  bool ok = false;
  /// "<ErrorKind>: message" for failed points.
  std::string error;
};

/// Simulates from the settings' initial state and fits the decay of <n>.
/// Physics errors propagate.
RatePoint simulate_rate(const model::SystemParams& p, const RateSettings& settings);

struct SweepPlan {
  /// One of omega, gamma, eta, phi, delta.
  std::string parameter;
  std::vector<double> grid;
  model::SystemParams base;
  /// delta := (nu^2 - Omega^2)/nu at every point.
  bool delta_at_resonance = true;
  /// eta_eff follows eta when eta is swept.
  bool tie_eta_eff = true;
  RateSettings settings;

  void validate() const;
  model::SystemParams point(std::size_t k) const;
};

/// One record per grid point in grid order; failures are recorded, not dropped.
std::vector<RatePoint> run_sweep(const SweepPlan& plan, int jobs = 1);

struct OmegaOptimum {
  double omega = kNaN;
  double W = kNaN;
  RatePoint best;
  int evaluations = 0;
};

/// Golden-section maximisation of the fitted rate over Omega with delta at
/// resonance. BracketError when the maximum sits on an end of [lo, hi].
OmegaOptimum optimize_omega(const model::SystemParams& base, const RateSettings& settings, double lo = 0.1,
                            double hi = 6.0, double tol = 0.02);

struct PowerLaw {
  double exponent = kNaN;
  double prefactor = kNaN;
};

/// Least-squares line through (log x, log y).
PowerLaw fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------

enum class PresetId {
  fig3_rate_vs_omega,
  fig4_optimal_runs,
  fig5_rate_vs_gamma,
  fig5_inset_opt_omega,
  figA_rate_vs_eta,
  fig6_phase_robustness,
  fig7_multimode,
  table1_gradients,
};

PresetId parse_preset(std::string_view text);
std::string to_string(PresetId id);
std::vector<PresetId> all_presets();

struct PresetOptions {
  int jobs = 1;
  /// End time of the three-ion trace.
  double multimode_t_end = 150.0;
  /// Also run the all-modes-hot traces (slow).
  bool multimode_left_panel = false;
};

struct PresetResult {
  io::CsvTable table;
  io::PlotSpec plot;
  std::vector<io::Series> series;
};

PresetResult run_preset(PresetId id, const PresetOptions& options = {});

// Building blocks shared by presets and acceptance checks.

/// Parameters of the optimal single-ion runs: gamma = 0.5 (Omega 0.85, delta 0.28)
/// or gamma = 5 (Omega 2.8, delta -6.84), eta = eta_eff = 0.1, second order.
model::SystemParams optimal_run_params(double gamma);

struct MultimodeFinal {
  std::vector<double> n_modes;
  double tail = 0.0;
  std::vector<int> truncation;
};

/// Stationary populations of the three-ion chain with the centre-of-mass red
/// sideband resonant.
MultimodeFinal multimode_final_populations(const std::vector<int>& truncation = {4, 5, 5});

/// Three-ion parameters of the multimode runs; resonant_mode selects which
/// mode's red sideband is tuned to resonance.
model::SystemParams multimode_params(int resonant_mode = 0);

struct PhasePoint {
  double phi = kNaN;
  double W = kNaN;
  double n_final = kNaN;
};

/// Fitted rate and stationary <n> (transformed picture) at phase phi.
PhasePoint phase_point(double phi);

}  // namespace mgcool::experiments
