#include "mgcool/model.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

#include "mgcool/errors.hpp"

namespace mgcool::model {

using hilbert::Level;

namespace {

// Sign of the Schrieffer-Wolff displacement carried by each internal level.
constexpr int kLevelSign[hilbert::kInternalDim] = {0, +1, -1};

struct ModeOps {
  hilbert::SpaceLayout layout;
  std::vector<Matrix> a;  // lifted to the mode space
  std::vector<Matrix> x;  // a + a^dag
  std::vector<Matrix> k;  // a - a^dag
  std::vector<Matrix> n;
  Matrix identity;
};

ModeOps make_mode_ops(const ModeSpec& modes) {
  ModeOps ops;
  ops.layout = modes.layout();
  const int m_dim = ops.layout.mode_space_dim();
  ops.identity = Matrix::Identity(m_dim, m_dim);
  for (int k = 0; k < modes.num_modes(); ++k) {
    const auto f = hilbert::fock_ops(hilbert::FockSpace(modes.per_mode_truncation[k]));
    ops.a.push_back(hilbert::lift_mode(ops.layout, k, f.a));
    ops.x.push_back(hilbert::lift_mode(ops.layout, k, f.a + f.a_dag));
    ops.k.push_back(hilbert::lift_mode(ops.layout, k, f.a - f.a_dag));
    ops.n.push_back(hilbert::lift_mode(ops.layout, k, f.n_op));
  }
  return ops;
}

Matrix sigma_z() {
  return hilbert::transition(Level::plus, Level::plus) - hilbert::transition(Level::minus, Level::minus);
}

// sum_n nu_n a_n^dag a_n on the mode space.
Matrix trap_energy(const SystemParams& p, const ModeSpec& modes, const ModeOps& ops) {
  Matrix h = Matrix::Zero(ops.identity.rows(), ops.identity.cols());
  for (int k = 0; k < modes.num_modes(); ++k) h += p.nu * modes.mode_freqs[k] * ops.n[k];
  return h;
}

// Local (b_d + b_d^dag) of the driven ion expressed through the normal modes.
Matrix local_position(const ModeSpec& modes, const ModeOps& ops) {
  Matrix x = Matrix::Zero(ops.identity.rows(), ops.identity.cols());
  for (int k = 0; k < modes.num_modes(); ++k) x += modes.local_coupling(k) * ops.x[k];
  return x;
}

// exp(sign * i eta (b_d + b_d^dag)) at the requested expansion order.
Matrix plane_wave(const SystemParams& p, const ModeSpec& modes, const ModeOps& ops, double sign) {
  const Matrix x = local_position(modes, ops);
  switch (p.order) {
    case ExpansionOrder::first:
      return ops.identity + sign * kI * p.eta * x;
    case ExpansionOrder::second:
      return ops.identity + sign * kI * p.eta * x - 0.5 * p.eta * p.eta * (x * x);
    case ExpansionOrder::exact: {
      // The mode quadratures commute, so the exponential factorises.
      std::vector<Matrix> factors;
      for (int k = 0; k < modes.num_modes(); ++k) {
        const auto f = hilbert::fock_ops(hilbert::FockSpace(modes.per_mode_truncation[k]));
        const Matrix gen = sign * kI * p.eta * modes.local_coupling(k) * (f.a + f.a_dag);
        factors.push_back(hilbert::expm(gen));
      }
      return hilbert::kron(factors);
    }
  }
  throw ConfigError("unknown expansion order");
}

Matrix add_hermitian_conjugate(const Matrix& m) { return m + m.adjoint(); }

// Product of per-mode displacements, mode n displaced by sign * eta~_n.
Matrix conditional_displacement(const SystemParams& p, const ModeSpec& modes, int sign) {
  std::vector<Matrix> factors;
  for (int k = 0; k < modes.num_modes(); ++k) {
    const hilbert::FockSpace space(modes.per_mode_truncation[k]);
    factors.push_back(hilbert::displacement(space, sign * modes.sw_displacement(k, p.eta)));
  }
  return hilbert::kron(factors);
}

Matrix sw_closed_form(const SystemParams& p, const ModeSpec& modes) {
  const ModeOps ops = make_mode_ops(modes);
  // cross = i(1 - e^{i phi}), pair = 1 + e^{i phi}; with psi = phi - pi/2,
  // cross + pair = (1+i)(1 + e^{i psi}) and cross - pair = (i-1)(1 - e^{i psi}).
  const Complex turn = std::exp(kI * (p.phi - 0.5 * std::numbers::pi));
  const Complex pair = 1.0 + kI * turn;
  const Complex sum = Complex(1.0, 1.0) * (1.0 + turn);
  const Complex diff = Complex(-1.0, 1.0) * (1.0 - turn);
  const Complex scale = p.omega / std::sqrt(2.0);

  Matrix sideband = Matrix::Zero(ops.identity.rows(), ops.identity.cols());
  for (int k = 0; k < modes.num_modes(); ++k) {
    const double grad = p.eta * modes.local_coupling(k);
    const double tilde = modes.sw_displacement(k, p.eta);
    const Complex red = 0.5 * scale * (sum * (grad + tilde) + diff * (grad - tilde));
    const Complex blue = 0.5 * scale * (sum * (grad - tilde) + diff * (grad + tilde));
    sideband += red * ops.a[k] + blue * ops.a[k].adjoint();
  }
  const Matrix e_bright = hilbert::ket(Level::excited) * hilbert::bright_state().adjoint();
  const Matrix e_dark = hilbert::ket(Level::excited) * hilbert::dark_state().adjoint();

  Matrix h = hilbert::kron({Matrix(p.delta * hilbert::transition(Level::excited, Level::excited)), ops.identity});
  h += hilbert::kron({Matrix::Identity(3, 3), trap_energy(p, modes, ops)});
  const Matrix coupling = hilbert::kron({Matrix(scale * pair * e_bright), ops.identity}) +
                          hilbert::kron({e_dark, sideband});
  return h + add_hermitian_conjugate(coupling);
}

Matrix conjugate_internal(const Matrix& op, const Matrix& rotation, int mode_dim) {
  const Matrix w = hilbert::kron({rotation, Matrix(Matrix::Identity(mode_dim, mode_dim))});
  return w * op * w.adjoint();
}

SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(1.0, 0.0); }

Observables make_observables(const ModeSpec& modes, const Matrix& internal_rotation) {
  const ModeOps ops = make_mode_ops(modes);
  const int m_dim = ops.layout.mode_space_dim();
  Observables obs;
  for (int k = 0; k < modes.num_modes(); ++k) {
    obs.n_ops.push_back(to_sparse(hilbert::kron({Matrix(Matrix::Identity(3, 3)), ops.n[k]})));
  }
  const Matrix pe = internal_rotation * hilbert::transition(Level::excited, Level::excited) *
                    internal_rotation.adjoint();
  const Matrix pd = internal_rotation * hilbert::projector(hilbert::dark_state()) *
                    internal_rotation.adjoint();
  obs.proj_e = to_sparse(hilbert::kron({pe, Matrix(Matrix::Identity(m_dim, m_dim))}));
  obs.proj_dark = to_sparse(hilbert::kron({pd, Matrix(Matrix::Identity(m_dim, m_dim))}));
  return obs;
}

bool same_eta(const SystemParams& p) { return std::abs(p.eta - p.eta_eff) <= 1e-15 * std::max(1.0, std::abs(p.eta)); }

}  // namespace

ExpansionOrder parse_order(std::string_view text) {
  if (text == "1" || text == "first") return ExpansionOrder::first;
  if (text == "2" || text == "second") return ExpansionOrder::second;
  if (text == "exact") return ExpansionOrder::exact;
  throw ConfigError("expansion order must be 1, 2 or exact, got '" + std::string(text) + "'");
}

std::string to_string(ExpansionOrder order) {
  switch (order) {
    case ExpansionOrder::first: return "1";
    case ExpansionOrder::second: return "2";
    case ExpansionOrder::exact: return "exact";
  }
  return "?";
}

Picture parse_picture(std::string_view text) {
  if (text == "original") return Picture::original;
  if (text == "schrieffer_wolff" || text == "sw") return Picture::schrieffer_wolff;
  if (text == "dressed") return Picture::dressed;
  throw ConfigError("picture must be original, schrieffer_wolff or dressed, got '" +
                    std::string(text) + "'");
}

std::string to_string(Picture picture) {
  switch (picture) {
    case Picture::original: return "original";
    case Picture::schrieffer_wolff: return "schrieffer_wolff";
    case Picture::dressed: return "dressed";
  }
  return "?";
}

void SystemParams::validate() const {
  const double values[] = {nu, omega, delta, gamma_plus, gamma_minus, eta, eta_eff, phi};
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("system parameters must be finite");
  }
  if (nu <= 0.0) throw ConfigError("trap frequency nu must be positive");
  if (gamma_plus < 0.0 || gamma_minus < 0.0) throw ConfigError("decay rates must be non-negative");
  if (n_max < 4) throw ConfigError("n_max must be at least 4, got " + std::to_string(n_max));
  const int ord = static_cast<int>(order);
  if (ord < 1 || ord > 3) throw ConfigError("expansion order must be 1, 2 or exact");
}

hilbert::SpaceLayout ModeSpec::layout() const {
  hilbert::SpaceLayout out;
  for (int n : per_mode_truncation) out.mode_dims.push_back(n + 1);
  return out;
}

Matrix build_rwa_hamiltonian(const SystemParams& p) { return build_rwa_hamiltonian(p, single_mode(p.n_max)); }

Matrix build_rwa_hamiltonian(const SystemParams& p, const ModeSpec& modes) {
  p.validate();
  modes.validate();
  const ModeOps ops = make_mode_ops(modes);
  const Matrix e_plus = hilbert::transition(Level::excited, Level::plus);
  const Matrix e_minus = hilbert::transition(Level::excited, Level::minus);
  const Matrix wave_plus = plane_wave(p, modes, ops, +1.0);
  const Matrix wave_minus = plane_wave(p, modes, ops, -1.0);
  const Complex phase = std::exp(kI * p.phi);

  Matrix h = hilbert::kron({Matrix(p.delta * hilbert::transition(Level::excited, Level::excited)), ops.identity});
  h += hilbert::kron({Matrix(Matrix::Identity(3, 3)), trap_energy(p, modes, ops)});
  h += p.eta_eff * p.nu * hilbert::kron({sigma_z(), local_position(modes, ops)});

  // The |+1> pair carries e^{+ikx} and e^{i phi} e^{-ikx}; the |-1> pair the mirror image.
  const Matrix laser = 0.5 * p.omega *
                       (hilbert::kron({e_plus, Matrix(wave_plus + phase * wave_minus)}) +
                        hilbert::kron({e_minus, Matrix(wave_minus + phase * wave_plus)}));
  h += add_hermitian_conjugate(laser);
  return h;
}

Matrix build_sw_unitary(const SystemParams& p) { return build_sw_unitary(p, single_mode(p.n_max)); }

Matrix build_sw_unitary(const SystemParams& p, const ModeSpec& modes) {
  modes.validate();
  const int m_dim = modes.layout().mode_space_dim();
  Matrix u = Matrix::Zero(3 * m_dim, 3 * m_dim);
  for (int s = 0; s < hilbert::kInternalDim; ++s) {
    const Level level = static_cast<Level>(s);
    const Matrix d = kLevelSign[s] == 0 ? Matrix(Matrix::Identity(m_dim, m_dim))
                                        : conditional_displacement(p, modes, kLevelSign[s]);
    u += hilbert::kron({hilbert::transition(level, level), d});
  }
  return u;
}

Matrix build_sw_hamiltonian(const SystemParams& p, SwRoute route) {
  return build_sw_hamiltonian(p, single_mode(p.n_max), route);
}

Matrix build_sw_hamiltonian(const SystemParams& p, const ModeSpec& modes, SwRoute route) {
  p.validate();
  modes.validate();
  if (route == SwRoute::automatic) {
    route = (p.order == ExpansionOrder::first && same_eta(p)) ? SwRoute::closed_form : SwRoute::conjugation;
    if (!same_eta(p)) {
      std::clog << "warning: eta != eta_eff, Schrieffer-Wolff Hamiltonian built by exact conjugation\n";
    }
  }
  if (route == SwRoute::closed_form) {
    if (!same_eta(p)) {
      throw ConfigError("first-order Schrieffer-Wolff closed form needs eta == eta_eff (eta=" +
                        std::to_string(p.eta) + ", eta_eff=" + std::to_string(p.eta_eff) + ")");
    }
    return sw_closed_form(p, modes);
  }
  const Matrix u = build_sw_unitary(p, modes);
  const Matrix h = build_rwa_hamiltonian(p, modes);
  const Matrix out = u * h * u.adjoint();
  return 0.5 * (out + out.adjoint());
}

Dissipators build_dissipators(const SystemParams& p, Picture picture) {
  return build_dissipators(p, single_mode(p.n_max), picture);
}

Dissipators build_dissipators(const SystemParams& p, const ModeSpec& modes, Picture picture) {
  p.validate();
  modes.validate();
  const ModeOps ops = make_mode_ops(modes);
  const int m_dim = ops.layout.mode_space_dim();
  const double rates[3] = {0.0, p.gamma_plus, p.gamma_minus};

  Dissipators out;
  const bool transformed = picture != Picture::original;
  const bool displaced_jumps = transformed && p.order != ExpansionOrder::first;

  for (int s = 1; s < hilbert::kInternalDim; ++s) {
    const Level level = static_cast<Level>(s);
    if (rates[s] == 0.0) continue;
    const Matrix motional = displaced_jumps ? conditional_displacement(p, modes, kLevelSign[s]) : ops.identity;
    out.collapse_ops.push_back(std::sqrt(rates[s]) *
                               hilbert::kron({hilbert::transition(level, Level::excited), motional}));
  }

  if (transformed && !displaced_jumps) {
    // First order in eta of the displaced jumps |i><e| ⊗ D_i:
    // rho -> -s_i gamma_i [sum_n eta~_n (a_n - a_n^dag), |i><e| rho |e><i|].
    Matrix q = Matrix::Zero(m_dim, m_dim);
    bool any = false;
    for (int k = 0; k < modes.num_modes(); ++k) {
      const double tilde = modes.sw_displacement(k, p.eta);
      if (tilde != 0.0) any = true;
      q += tilde * ops.k[k];
    }
    if (any) {
      const Matrix q_full = hilbert::kron({Matrix(Matrix::Identity(3, 3)), q});
      for (int s = 1; s < hilbert::kInternalDim; ++s) {
        if (rates[s] == 0.0) continue;
        const Level level = static_cast<Level>(s);
        out.commutator_terms.push_back(
            {-kLevelSign[s] * rates[s] * q_full,
             hilbert::kron({hilbert::transition(level, Level::excited), ops.identity})});
      }
    }
  }

  if (picture == Picture::dressed) {
    const Matrix w = dressed_basis_rotation(p);
    for (auto& c : out.collapse_ops) c = conjugate_internal(c, w, m_dim);
    for (auto& t : out.commutator_terms) {
      t.generator = conjugate_internal(t.generator, w, m_dim);
      t.jump = conjugate_internal(t.jump, w, m_dim);
    }
  }
  return out;
}

Matrix dressed_basis_rotation(const SystemParams& p) {
  // Carrier block in the (e, B) basis.
  const Complex g = p.omega / std::sqrt(2.0) * (1.0 + std::exp(kI * p.phi));
  Eigen::Matrix2cd block;
  block << p.delta, g, std::conj(g), 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(block);
  const Eigen::Vector2cd up = solver.eigenvectors().col(1);
  const Eigen::Vector2cd down = solver.eigenvectors().col(0);

  auto embed = [](const Eigen::Vector2cd& v) {
    // Fix the phase so that the |e> amplitude is real and non-negative.
    Complex ph = std::abs(v(0)) > 1e-300 ? std::conj(v(0)) / std::abs(v(0)) : Complex(1.0);
    if (std::abs(v(0)) <= 1e-300) ph = std::conj(v(1)) / std::abs(v(1));
    return Vector(ph * v(0) * hilbert::ket(Level::excited) + ph * v(1) * hilbert::bright_state());
  };
  Matrix w(3, 3);
  w.row(0) = embed(up).adjoint();
  w.row(1) = embed(down).adjoint();
  w.row(2) = hilbert::dark_state().adjoint();
  return w;
}

LindbladModel build_model(const SystemParams& p, Picture picture) {
  return build_multimode_model(p, single_mode(p.n_max), picture);
}

LindbladModel build_multimode_model(const SystemParams& p, const ModeSpec& modes, Picture picture) {
  p.validate();
  modes.validate();
  LindbladModel model;
  model.picture = picture;
  model.layout = modes.layout();
  const int m_dim = model.layout.mode_space_dim();

  switch (picture) {
    case Picture::original:
      model.hamiltonian = build_rwa_hamiltonian(p, modes);
      break;
    case Picture::schrieffer_wolff:
      model.hamiltonian = build_sw_hamiltonian(p, modes);
      break;
    case Picture::dressed:
      model.hamiltonian = conjugate_internal(build_sw_hamiltonian(p, modes), dressed_basis_rotation(p), m_dim);
      model.hamiltonian = 0.5 * (model.hamiltonian + model.hamiltonian.adjoint()).eval();
      break;
  }
  Dissipators d = build_dissipators(p, modes, picture);
  model.collapse_ops = std::move(d.collapse_ops);
  model.gradient_decay_terms = std::move(d.commutator_terms);
  const Matrix rotation =
      picture == Picture::dressed ? dressed_basis_rotation(p) : Matrix(Matrix::Identity(3, 3));
  model.observables = make_observables(modes, rotation);
  const ModeOps ops = make_mode_ops(modes);
  const Eigen::VectorXd mode_energy = trap_energy(p, modes, ops).diagonal().real();
  model.free_energy = mode_energy.replicate(hilbert::kInternalDim, 1);
  return model;
}

Matrix default_internal_state() {
  return 0.5 * (hilbert::transition(Level::plus, Level::plus) + hilbert::transition(Level::minus, Level::minus));
}

Matrix initial_state(const hilbert::SpaceLayout& layout, const Matrix& internal,
                     const std::vector<double>& mean_n, PhononState kind, int empty_top) {
  if (empty_top < 0) throw ConfigError("empty_top must be non-negative");
  if (internal.rows() != 3 || internal.cols() != 3) throw DimensionError("internal state must be 3x3");
  if (static_cast<int>(mean_n.size()) != layout.num_modes()) {
    throw DimensionError("initial_state: one mean occupation per mode is required");
  }
  std::vector<Matrix> factors{internal};
  for (int k = 0; k < layout.num_modes(); ++k) {
    const int dim = layout.mode_dims[k];
    Vector pops = Vector::Zero(dim);
    if (kind == PhononState::fock) {
      const double r = std::round(mean_n[k]);
      if (std::abs(r - mean_n[k]) > 1e-12 || r < 0 || r > dim - 1) {
        throw ConfigError("Fock initial state needs an integral occupation inside the truncation");
      }
      if (r > dim - 1 - std::max(empty_top, 2)) {
        throw TruncationError("Fock level " + std::to_string(static_cast<int>(r)) +
                              " is too close to the truncation n_max=" + std::to_string(dim - 1));
      }
      pops(static_cast<int>(r)) = 1.0;
    } else {
      if (mean_n[k] == 0.0) {
        pops(0) = 1.0;
        factors.push_back(pops.asDiagonal());
        continue;
      }
      const int n_cut = dim - 1 - empty_top;
      if (n_cut < 1 || mean_n[k] >= 0.5 * n_cut) {
        throw TruncationError("thermal occupation " + std::to_string(mean_n[k]) +
                              " does not fit below level " + std::to_string(n_cut) + " of n_max=" +
                              std::to_string(dim - 1));
      }
      pops.head(n_cut + 1) = hilbert::thermal_populations(mean_n[k], n_cut);
    }
    factors.push_back(pops.asDiagonal());
  }
  return hilbert::kron(factors);
}

}  // namespace mgcool::model
