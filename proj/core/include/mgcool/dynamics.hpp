#pragma once

// Lindblad time evolution
//   d rho/dt = -i[H, rho] + sum_c D[c] rho + sum_t [A_t, J_t rho J_t^dag]
// with truncation, trace and Hermiticity monitoring.

#include <cstdint>
#include <vector>

#include "mgcool/model.hpp"

namespace mgcool::dynamics {

enum class Method {
  adaptive_rk,  // Dormand-Prince 5(4)
  fixed_rk4,
  propagator,   // dense exp(L dt) applied per sample; small spaces only
};

Method parse_method(std::string_view text);
std::string to_string(Method method);

struct IntegratorConfig {
  Method method = Method::adaptive_rk;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t_start = 0.0;
  double t_end = 100.0;
  double sample_every = 0.5;
  double tail_tol = 1e-6;
  /// Step of fixed_rk4 (clipped to the sample spacing).
  double fixed_step = 0.01;
  /// Number of samples whose spectrum is checked for negative eigenvalues.
  int positivity_checks = 10;
  std::uint64_t positivity_seed = 12345;
  /// Integrate in the frame rotating with the free mode energies when every
  /// jump operator commutes with them.
  bool rotating_frame = true;
  int max_steps = 50'000'000;

  void validate() const;
};

struct CoolingTrace {
  std::vector<double> times;
  /// First mode's <n>; equal to n_mean_modes[0].
  std::vector<double> n_mean;
  std::vector<std::vector<double>> n_mean_modes;
  std::vector<double> pop_e;
  std::vector<double> pop_D;
  /// Largest population of the two highest Fock levels over all modes.
  std::vector<double> tail;
  std::vector<double> trace_defect;
  double max_hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  bool valid = true;
  std::string invalid_reason;
  Matrix final_state;
  long steps = 0;
  long rejected_steps = 0;

  std::size_t size() const { return times.size(); }
  /// Appends another trace that continues this one in time.
  void append(const CoolingTrace& later);
};

/// Right-hand side of the master equation for Hermitian rho.
Matrix apply_liouvillian(const model::LindbladModel& model, const Matrix& rho);

/// Column-stacking superoperator: vec(L rho) = S vec(rho).
Matrix liouvillian_superoperator(const model::LindbladModel& model);
Matrix liouvillian_superoperator(const Matrix& hamiltonian, const std::vector<Matrix>& collapse_ops,
                                 const std::vector<model::CommutatorDecayTerm>& extra = {});

CoolingTrace evolve(const model::LindbladModel& model, const Matrix& rho0, const IntegratorConfig& cfg);

/// Unique stationary state; DegenerateSteadyStateError when the stationary
/// space is not one-dimensional.
Matrix steady_state(const model::LindbladModel& model);

/// Observables of one density matrix, in the model's picture.
struct Snapshot {
  std::vector<double> n_mean_modes;
  double pop_e = 0.0;
  double pop_D = 0.0;
  double tail = 0.0;
  double trace_defect = 0.0;
};
Snapshot observe(const model::LindbladModel& model, const Matrix& rho);

}  // namespace mgcool::dynamics
