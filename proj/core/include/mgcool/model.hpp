#pragma once

// Hamiltonians and dissipators of the magnetic-gradient cooling scheme in the
// original (rotating-wave) picture, the Schrieffer-Wolff picture and the
// dressed picture, for one ion or for the normal modes of a chain.
//
// Units: every frequency is in units of the trap frequency nu (nu = 1 by
// default), time in 1/nu.

#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "mgcool/hilbert.hpp"

namespace mgcool::model {

enum class ExpansionOrder { first = 1, second = 2, exact = 3 };
enum class Picture { original, schrieffer_wolff, dressed };

ExpansionOrder parse_order(std::string_view text);
std::string to_string(ExpansionOrder order);
Picture parse_picture(std::string_view text);
std::string to_string(Picture picture);

struct SystemParams {
  double nu = 1.0;
  double omega = 1.0;
  /// delta = omega_e - omega_0 - omega_L, shared by both laser pairs.
  double delta = 0.0;
  /// Decay rates of |e> into |+1> and |-1>. The total width of |e> is
  /// gamma_plus + gamma_minus.
  double gamma_plus = 1.0;
  double gamma_minus = 1.0;
  /// Laser Lamb-Dicke parameter.
  double eta = 0.1;
  /// Gradient-induced Lamb-Dicke parameter.
  double eta_eff = 0.1;
  /// Phase of the second beam in each laser pair; pi/2 cancels the blue sideband.
  double phi = std::numbers::pi / 2.0;
  ExpansionOrder order = ExpansionOrder::first;
  int n_max = 20;

  /// Sets both channels to the same per-channel rate.
  void set_gamma(double gamma) { gamma_plus = gamma_minus = gamma; }
  /// Per-channel rate (mean of the two channels).
  double gamma() const { return 0.5 * (gamma_plus + gamma_minus); }
  void validate() const;
};

// ---------------------------------------------------------------------------
// Magnetic gradient <-> Lamb-Dicke parameter (SI units)

namespace constants {
inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double bohr_magneton = 9.2740100783e-24;  // J/T
inline constexpr double electron_g = -2.00231930436256;
inline constexpr double atomic_mass = 1.66053906660e-27;  // kg
}  // namespace constants

struct GradientSpec {
  double ion_mass = 0.0;     // kg
  double wavelength = 0.0;   // m
  double trap_freq = 0.0;    // rad/s
  double angle_theta = 0.0;  // rad, laser beams against the trap axis
  /// Homogeneous field and the Zeeman shift it causes on one level
  /// (hbar omega0 = -g mu_B B0 m_j with |m_j| = 1/2). When both are zero the
  /// ratio omega0/B0 is derived from g_factor.
  double B0 = 0.0;       // T
  double omega0 = 0.0;   // rad/s
  double g_factor = constants::electron_g;
  double dB_dx = 0.0;    // T/m

  void validate() const;
  /// omega0 / B0 in rad/(s T).
  double zeeman_slope() const;
};

/// k sqrt(hbar / (2 m nu)) cos(theta)
double laser_lamb_dicke(const GradientSpec& spec);
/// Gradient making eta_eff equal to the laser Lamb-Dicke parameter.
double gradient_from_eta(const GradientSpec& spec);
/// eta_eff = sqrt(hbar/(2 m nu)) (omega0 / (nu B0)) dB/dx for spec.dB_dx.
double eta_from_gradient(const GradientSpec& spec);

// ---------------------------------------------------------------------------
// Normal modes

struct ModeSpec {
  int n_ions = 1;
  /// Mode frequencies in units of nu, ascending; the first is the COM mode.
  std::vector<double> mode_freqs{1.0};
  /// Rows are ions, columns are modes.
  Eigen::MatrixXd mode_matrix = Eigen::MatrixXd::Ones(1, 1);
  int driven_ion = 0;
  std::vector<int> per_mode_truncation{20};

  void validate() const;
  int num_modes() const { return static_cast<int>(mode_freqs.size()); }
  /// M_d^n sqrt(nu/nu_n): weight of mode n in the driven ion's local (b + b^dag).
  double local_coupling(int mode) const;
  /// eta M_d^n (nu/nu_n)^{3/2}: Schrieffer-Wolff displacement of mode n.
  double sw_displacement(int mode, double eta) const;
  hilbert::SpaceLayout layout() const;
};

/// One mode at the trap frequency with truncation n_max.
ModeSpec single_mode(int n_max);

/// Axial modes of an ion chain. N <= 3 uses tabulated values; larger chains
/// solve for the Coulomb equilibrium by Newton iteration.
ModeSpec modes_for_chain(int n_ions);
/// Newton solution for any N >= 1 (used by modes_for_chain above N = 3).
/// Column signs are fixed so the last ion's entry is positive.
ModeSpec solve_chain_modes(int n_ions);

// ---------------------------------------------------------------------------
// Operators

/// rho -> [generator, jump rho jump^dag]; the first-order Schrieffer-Wolff
/// correction to spontaneous decay.
struct CommutatorDecayTerm {
  Matrix generator;
  Matrix jump;
};

struct Dissipators {
  /// Each collapse operator c enters as c rho c^dag - {c^dag c, rho}/2.
  std::vector<Matrix> collapse_ops;
  std::vector<CommutatorDecayTerm> commutator_terms;
};

struct Observables {
  std::vector<SparseMatrix> n_ops;  // one per mode
  SparseMatrix proj_e;
  SparseMatrix proj_dark;
};

struct LindbladModel {
  Matrix hamiltonian;
  std::vector<Matrix> collapse_ops;
  std::vector<CommutatorDecayTerm> gradient_decay_terms;
  Picture picture = Picture::original;
  hilbert::SpaceLayout layout;
  Observables observables;
  /// Free mode energy sum_n nu_n n_n of every composite basis state.
  Eigen::VectorXd free_energy;

  int dim() const { return static_cast<int>(hamiltonian.rows()); }
};

/// Interaction-picture Hamiltonian of one ion after the rotating-wave
/// approximation, with the laser factors expanded to p.order.
Matrix build_rwa_hamiltonian(const SystemParams& p);
Matrix build_rwa_hamiltonian(const SystemParams& p, const ModeSpec& modes);

/// U = sum_s |s><s| ⊗ D_s with D_{+1} a displacement by +eta (per mode:
/// eta~_n), D_{-1} by -eta and D_e = 1.
Matrix build_sw_unitary(const SystemParams& p);
Matrix build_sw_unitary(const SystemParams& p, const ModeSpec& modes);

enum class SwRoute {
  automatic,    // closed form for order 1 with eta == eta_eff, conjugation otherwise
  closed_form,  // first-order expression; requires eta == eta_eff
  conjugation,  // U H U^dag with the exact displacement unitary
};

Matrix build_sw_hamiltonian(const SystemParams& p, SwRoute route = SwRoute::automatic);
Matrix build_sw_hamiltonian(const SystemParams& p, const ModeSpec& modes,
                            SwRoute route = SwRoute::automatic);

Dissipators build_dissipators(const SystemParams& p, Picture picture);
Dissipators build_dissipators(const SystemParams& p, const ModeSpec& modes, Picture picture);

/// Rows are <u|, <d|, <D| in the (e, +1, -1) basis; |u>, |d> diagonalise the
/// carrier block on {|e>, |B>} with omega_u >= omega_d.
Matrix dressed_basis_rotation(const SystemParams& p);

LindbladModel build_model(const SystemParams& p, Picture picture);
LindbladModel build_multimode_model(const SystemParams& p, const ModeSpec& modes,
                                    Picture picture);

// ---------------------------------------------------------------------------
// Initial states

enum class PhononState { thermal, fock };

/// 1/2 (|+1><+1| + |-1><-1|)
Matrix default_internal_state();

/// internal ⊗ (per-mode diagonal states with the requested mean occupations).
/// Thermal states are geometric distributions on levels 0..n_max-empty_top,
/// tuned to the requested mean; Fock states need an integral mean below that
/// cut.
inline constexpr int kDefaultEmptyTopLevels = 5;
Matrix initial_state(const hilbert::SpaceLayout& layout, const Matrix& internal,
                     const std::vector<double>& mean_n, PhononState kind = PhononState::thermal,
                     int empty_top = kDefaultEmptyTopLevels);

}  // namespace mgcool::model
