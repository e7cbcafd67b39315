#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mgcool/dynamics.hpp"
#include "mgcool/errors.hpp"
#include "mgcool/model.hpp"

using namespace mgcool;
using namespace mgcool::model;
using hilbert::Level;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

SystemParams weak(int n_max = 8) {
  SystemParams p;
  p.omega = 1.0;
  p.delta = 0.0;
  p.eta = p.eta_eff = 0.1;
  p.n_max = n_max;
  p.order = ExpansionOrder::first;
  return p;
}

Matrix random_density(int dim, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  }
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

Matrix random_hermitian(int dim, std::uint32_t seed) {
  const Matrix r = random_density(dim, seed) - random_density(dim, seed + 1000);
  return 0.5 * (r + r.adjoint());
}

// <e, n| H |D, m> on the single-ion space.
Complex e_dark_element(const Matrix& h, int n_max, int n, int m) {
  const int d = n_max + 1;
  const Vector dark = hilbert::dark_state();
  Complex s = 0.0;
  for (int l = 1; l < 3; ++l) s += h(0 * d + n, l * d + m) * dark(l);
  return s;
}

}  // namespace

TEST(Params, Validation) {
  SystemParams p = weak();
  p.n_max = 3;
  EXPECT_THROW(p.validate(), ConfigError);
  p = weak();
  p.nu = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = weak();
  p.gamma_plus = -1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_THROW(parse_order("3"), ConfigError);
  EXPECT_EQ(parse_order("exact"), ExpansionOrder::exact);
  EXPECT_THROW(parse_picture("lab"), ConfigError);
}

TEST(RwaHamiltonian, MatchesFirstOrderCouplings) {
  const SystemParams p = weak(8);
  const Matrix h = build_rwa_hamiltonian(p);
  const auto f = hilbert::fock_ops(hilbert::FockSpace(p.n_max));
  const Matrix id = Matrix::Identity(p.n_max + 1, p.n_max + 1);
  const Matrix x = f.a + f.a_dag;
  const Matrix sz = hilbert::transition(Level::plus, Level::plus) - hilbert::transition(Level::minus, Level::minus);
  const Matrix ep = hilbert::transition(Level::excited, Level::plus);
  const Matrix em = hilbert::transition(Level::excited, Level::minus);
  const Complex c = 0.5 * p.omega * Complex(1.0, 1.0);
  Matrix coupling = c * hilbert::kron({Matrix(ep + em), id}) + p.eta * c * hilbert::kron({Matrix(ep - em), x});
  Matrix expected = hilbert::kron({Matrix(Matrix::Identity(3, 3)), f.n_op}) +
                    p.eta_eff * hilbert::kron({sz, x}) + coupling + Matrix(coupling.adjoint());
  EXPECT_LT(max_abs(h - expected), 1e-14);
  EXPECT_LT(hilbert::hermiticity_defect(h), 1e-14);
}

TEST(RwaHamiltonian, LasersOff) {
  SystemParams p = weak(6);
  p.omega = 0.0;
  p.delta = 0.7;
  const Matrix h = build_rwa_hamiltonian(p);
  const auto f = hilbert::fock_ops(hilbert::FockSpace(p.n_max));
  const Matrix sz = hilbert::transition(Level::plus, Level::plus) - hilbert::transition(Level::minus, Level::minus);
  const Matrix expected = hilbert::kron({Matrix(Matrix::Identity(3, 3)), f.n_op}) +
                          hilbert::kron({Matrix(0.7 * hilbert::transition(Level::excited, Level::excited)),
                                         Matrix(Matrix::Identity(7, 7))}) +
                          p.eta_eff * hilbert::kron({sz, Matrix(f.a + f.a_dag)});
  EXPECT_LT(max_abs(h - expected), 1e-15);
}

TEST(RwaHamiltonian, ExactMinusSecondOrderIsThirdOrder) {
  auto diff = [](double eta) {
    SystemParams p = weak(10);
    p.omega = 1.3;
    p.eta = p.eta_eff = eta;
    p.order = ExpansionOrder::exact;
    const Matrix exact = build_rwa_hamiltonian(p);
    p.order = ExpansionOrder::second;
    return max_abs(exact - build_rwa_hamiltonian(p));
  };
  const double d1 = diff(0.05), d2 = diff(0.025);
  EXPECT_GT(d1 / d2, 7.0);
  EXPECT_LT(d1 / d2, 9.0);
}

TEST(SwUnitary, IdentityWithoutGradient) {
  SystemParams p = weak(10);
  p.eta = p.eta_eff = 0.0;
  EXPECT_LT(max_abs(build_sw_unitary(p) - Matrix::Identity(33, 33)), 1e-15);
}

TEST(SwUnitary, ShiftsLadderOperator) {
  const SystemParams p = weak(20);
  const Matrix u = build_sw_unitary(p);
  const auto f = hilbert::fock_ops(hilbert::FockSpace(20));
  const Matrix b = hilbert::kron({Matrix(Matrix::Identity(3, 3)), f.a});
  const Matrix sz = hilbert::transition(Level::plus, Level::plus) - hilbert::transition(Level::minus, Level::minus);
  const Matrix expected = b - p.eta * hilbert::kron({sz, Matrix(Matrix::Identity(21, 21))});
  const Matrix got = u * b * u.adjoint();
  for (int s = 0; s < 3; ++s) {
    for (int t = 0; t < 3; ++t) {
      const Matrix blk = (got - expected).block(s * 21, t * 21, 16, 16);
      EXPECT_LT(max_abs(blk), 1e-8);
    }
  }
}

TEST(SwUnitary, ThreeIonDisplacements) {
  const ModeSpec m = modes_for_chain(3);
  // tests/oracles/derive.py
  EXPECT_NEAR(m.sw_displacement(1, 0.1), -0.031020161970069987, 1e-15);
  EXPECT_NEAR(m.sw_displacement(0, 0.1), 0.1 / std::sqrt(3.0), 1e-15);
}

TEST(SwHamiltonian, CancellationAndClosedForm) {
  SystemParams p = weak(10);
  p.omega = 1.7;
  p.delta = -0.4;
  const Matrix h = build_sw_hamiltonian(p);
  const Complex red = std::sqrt(2.0) * p.eta * p.omega * Complex(1.0, 1.0);
  for (int n = 0; n < p.n_max; ++n) {
    EXPECT_LT(std::abs(e_dark_element(h, p.n_max, n, n)), 1e-14);
    EXPECT_LT(std::abs(e_dark_element(h, p.n_max, n + 1, n)), 1e-14);
    EXPECT_LT(std::abs(e_dark_element(h, p.n_max, n, n + 1) / std::sqrt(n + 1.0) - red), 1e-14);
  }
}

TEST(SwHamiltonian, ClosedFormNeedsMatchedGradient) {
  SystemParams p = weak(10);
  p.eta_eff = 0.12;
  EXPECT_THROW(build_sw_hamiltonian(p, SwRoute::closed_form), ConfigError);
  EXPECT_NO_THROW(build_sw_hamiltonian(p, SwRoute::conjugation));
}

TEST(SwHamiltonian, NoGradientDecouplesDarkState) {
  SystemParams p = weak(8);
  p.eta = p.eta_eff = 0.0;
  const Matrix h = build_sw_hamiltonian(p);
  for (int n = 0; n <= p.n_max; ++n) {
    for (int m = 0; m <= p.n_max; ++m) EXPECT_EQ(std::abs(e_dark_element(h, p.n_max, n, m)), 0.0);
  }
}

TEST(SwHamiltonian, ConjugationDiffersAtSecondOrder) {
  auto diff = [](double eta) {
    SystemParams p = weak(24);
    p.eta = p.eta_eff = eta;
    const Matrix closed = build_sw_hamiltonian(p, SwRoute::closed_form);
    p.order = ExpansionOrder::exact;
    const Matrix conj = build_sw_hamiltonian(p, SwRoute::conjugation);
    double worst = 0.0;
    const int d = 25, keep = 15;
    for (int s = 0; s < 3; ++s) {
      for (int t = 0; t < 3; ++t) worst = std::max(worst, max_abs((conj - closed).block(s * d, t * d, keep, keep)));
    }
    return worst;
  };
  const double d1 = diff(0.1), d2 = diff(0.05), d3 = diff(0.025);
  EXPECT_NEAR(d1 / d2, 4.0, 0.6);
  EXPECT_NEAR(d2 / d3, 4.0, 0.4);
}

TEST(SwHamiltonian, BlueSidebandGrowsLinearlyWithPhaseError) {
  auto blue = [](double dphi) {
    SystemParams p = weak(8);
    p.phi = std::numbers::pi / 2.0 + dphi;
    return std::abs(e_dark_element(build_sw_hamiltonian(p, SwRoute::closed_form), 8, 1, 0));
  };
  const double b1 = blue(1e-3), b2 = blue(2e-3), bm = blue(-1e-3);
  EXPECT_GT(b1, 0.0);
  EXPECT_NEAR(b2 / b1, 2.0, 1e-3);
  EXPECT_NEAR(bm / b1, 1.0, 1e-3);
}

TEST(SwHamiltonian, SpectrumMatchesOriginalPicture) {
  SystemParams p = weak(16);
  p.omega = 2.0;
  p.delta = -3.0;
  p.order = ExpansionOrder::exact;
  const Matrix h = build_rwa_hamiltonian(p);
  const Matrix u = build_sw_unitary(p);
  Eigen::SelfAdjointEigenSolver<Matrix> a(h), b(u * h * u.adjoint());
  EXPECT_LT((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Dissipators, BranchingOfExcitedState) {
  SystemParams p = weak(6);
  p.omega = 0.0;
  p.gamma_plus = p.gamma_minus = 2.5;
  const LindbladModel m = build_model(p, Picture::original);
  Matrix rho = Matrix::Zero(m.dim(), m.dim());
  rho(0, 0) = 1.0;
  const Matrix d = dynamics::apply_liouvillian(m, rho);
  const int n = p.n_max + 1;
  EXPECT_NEAR(d(0, 0).real(), -5.0, 1e-14);
  EXPECT_NEAR(d(n, n).real(), 2.5, 1e-14);
  EXPECT_NEAR(d(2 * n, 2 * n).real(), 2.5, 1e-14);
}

TEST(Dissipators, FirstOrderTermsVanishWithoutGradient) {
  SystemParams p = weak(6);
  EXPECT_EQ(build_dissipators(p, Picture::schrieffer_wolff).commutator_terms.size(), 2u);
  p.eta = p.eta_eff = 0.0;
  EXPECT_TRUE(build_dissipators(p, Picture::schrieffer_wolff).commutator_terms.empty());
  EXPECT_TRUE(build_dissipators(weak(6), Picture::original).commutator_terms.empty());
}

TEST(Dissipators, FirstOrderTermsMatchDisplacedJumps) {
  auto terms = [](double eta) {
    SystemParams p = weak(14);
    p.eta = p.eta_eff = eta;
    p.gamma_plus = 1.0;
    p.gamma_minus = 3.0;
    const Matrix rho = random_density(3 * 15, 7);
    auto apply = [&](const Dissipators& d) {
      Matrix out = Matrix::Zero(rho.rows(), rho.cols());
      for (const auto& c : d.collapse_ops) out += c * rho * c.adjoint();
      for (const auto& t : d.commutator_terms) {
        const Matrix s = t.jump * rho * t.jump.adjoint();
        out += t.generator * s - s * t.generator;
      }
      return out;
    };
    p.order = ExpansionOrder::first;
    const Matrix first = apply(build_dissipators(p, Picture::schrieffer_wolff));
    p.order = ExpansionOrder::exact;
    const Matrix exact = apply(build_dissipators(p, Picture::schrieffer_wolff));
    return max_abs((first - exact).block(0, 0, 3 * 15, 3 * 15));
  };
  const double d1 = terms(0.02), d2 = terms(0.01);
  EXPECT_NEAR(d1 / d2, 4.0, 0.3);
}

TEST(Dissipators, TraceAnnihilationOnRandomInputs) {
  for (auto picture : {Picture::original, Picture::schrieffer_wolff, Picture::dressed}) {
    for (auto order : {ExpansionOrder::first, ExpansionOrder::second, ExpansionOrder::exact}) {
      SystemParams p = weak(10);
      p.order = order;
      p.omega = 2.8;
      p.delta = -6.84;
      p.gamma_plus = 5.0;
      p.gamma_minus = 3.0;
      const LindbladModel m = build_model(p, picture);
      for (std::uint32_t seed = 1; seed <= 3; ++seed) {
        const Matrix d = dynamics::apply_liouvillian(m, random_hermitian(m.dim(), seed));
        EXPECT_LT(std::abs(d.trace()), 1e-10) << to_string(picture) << " " << to_string(order);
      }
    }
  }
}

TEST(Multimode, SwSidebandCoefficients) {
  const ModeSpec m = modes_for_chain(3);
  for (int k = 0; k < 3; ++k) {
    const double r = m.mode_freqs[0] / m.mode_freqs[k];
    const double red = m.local_coupling(k) * (1.0 + r);
    const double blue = m.local_coupling(k) * (1.0 - r);
    if (k == 0) EXPECT_EQ(blue, 0.0);
    if (k == 1) EXPECT_NEAR(red / blue, 3.7320508075688773, 1e-12);
    if (k == 2) EXPECT_NEAR(red / blue, 2.4201328815660246, 1e-12);
  }
}

TEST(Multimode, SwHamiltonianBlueSidebandPerMode) {
  SystemParams p = weak(4);
  p.omega = 2.8;
  ModeSpec modes = modes_for_chain(3);
  modes.per_mode_truncation = {2, 2, 2};
  const Matrix h = build_sw_hamiltonian(p, modes, SwRoute::closed_form);
  const int md = 27;
  const Vector dark = hilbert::dark_state();
  auto coeff = [&](int from_mode_state, int to_mode_state) {
    Complex s = 0.0;
    for (int l = 1; l < 3; ++l) s += h(to_mode_state, l * md + from_mode_state) * dark(l);
    return s;
  };
  const int strides[3] = {9, 3, 1};
  for (int k = 0; k < 3; ++k) {
    const Complex red = coeff(strides[k], 0);
    const Complex blue = coeff(0, strides[k]);
    const double r = 1.0 / modes.mode_freqs[k];
    EXPECT_NEAR(std::abs(red), p.omega * p.eta * std::abs(modes.local_coupling(k)) * (1.0 + r), 1e-12);
    if (k == 0) {
      EXPECT_LT(std::abs(blue), 1e-15);
    } else {
      EXPECT_NEAR(std::abs(red) / std::abs(blue), (1.0 + r) / (1.0 - r), 1e-12);
    }
  }
}

TEST(Multimode, SingleModeSpecReproducesSingleIon) {
  for (auto picture : {Picture::original, Picture::schrieffer_wolff}) {
    SystemParams p = weak(8);
    p.order = ExpansionOrder::second;
    const LindbladModel a = build_model(p, picture);
    const LindbladModel b = build_multimode_model(p, single_mode(8), picture);
    EXPECT_EQ(max_abs(a.hamiltonian - b.hamiltonian), 0.0);
    ASSERT_EQ(a.collapse_ops.size(), b.collapse_ops.size());
    for (std::size_t k = 0; k < a.collapse_ops.size(); ++k) {
      EXPECT_EQ(max_abs(a.collapse_ops[k] - b.collapse_ops[k]), 0.0);
    }
  }
}

TEST(Modes, TabulatedChains) {
  const ModeSpec one = modes_for_chain(1);
  EXPECT_EQ(one.mode_freqs, std::vector<double>{1.0});
  EXPECT_EQ(one.mode_matrix(0, 0), 1.0);

  const ModeSpec two = modes_for_chain(2);
  EXPECT_NEAR(two.mode_freqs[1], 1.7320508075688773, 1e-12);
  EXPECT_NEAR(std::abs(two.mode_matrix(0, 1)), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(two.mode_matrix(0, 1), -two.mode_matrix(1, 1), 1e-12);

  const ModeSpec three = modes_for_chain(3);
  EXPECT_NEAR(three.mode_freqs[2], 2.4083189157584591, 1e-12);
  EXPECT_NEAR(three.mode_matrix(0, 0), 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(three.mode_matrix(0, 1), -1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(three.mode_matrix(0, 2), 1.0 / std::sqrt(6.0), 1e-12);
}

TEST(Modes, NewtonSolutionAgreesAndIsOrthogonal) {
  for (int n : {2, 3, 5, 7}) {
    const ModeSpec m = solve_chain_modes(n);
    EXPECT_NEAR(m.mode_freqs[0], 1.0, 1e-10) << n;
    EXPECT_NEAR(m.mode_freqs[1], std::sqrt(3.0), 1e-10) << n;
    const Eigen::MatrixXd id = m.mode_matrix.transpose() * m.mode_matrix;
    EXPECT_LT((id - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12) << n;
  }
  const ModeSpec a = solve_chain_modes(3), b = modes_for_chain(3);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.mode_freqs[k], b.mode_freqs[k], 1e-10);
}

TEST(Gradient, TableEntryAndRoundTrip) {
  GradientSpec g;
  g.ion_mass = 171.9363815 * constants::atomic_mass;
  g.wavelength = 369e-9;
  g.trap_freq = 2.0 * std::numbers::pi * 1e6;
  // tests/oracles/derive.py
  EXPECT_NEAR(gradient_from_eta(g) / 1215.1744486817791, 1.0, 1e-9);
  EXPECT_NEAR(laser_lamb_dicke(g) / 0.092316261905173564, 1.0, 1e-9);

  g.dB_dx = gradient_from_eta(g);
  EXPECT_NEAR(eta_from_gradient(g) / laser_lamb_dicke(g), 1.0, 1e-12);

  g.angle_theta = std::numbers::pi / 2.0;
  EXPECT_LT(std::abs(gradient_from_eta(g)), 1e-12);
  EXPECT_LT(std::abs(laser_lamb_dicke(g)), 1e-15);

  g.ion_mass = 0.0;
  EXPECT_THROW(gradient_from_eta(g), ConfigError);
}

TEST(InitialState, FockAndThermal) {
  const hilbert::SpaceLayout layout{{13}};
  const Matrix f = initial_state(layout, default_internal_state(), {2.0}, PhononState::fock);
  const Matrix t = initial_state(layout, default_internal_state(), {2.0}, PhononState::thermal, 0);
  EXPECT_NEAR(f.trace().real(), 1.0, 1e-15);
  EXPECT_NEAR(t.trace().real(), 1.0, 1e-12);
  const auto fo = hilbert::fock_ops(hilbert::FockSpace(12));
  const Matrix n = hilbert::kron({Matrix(Matrix::Identity(3, 3)), fo.n_op});
  EXPECT_NEAR(hilbert::expect(f, n).real(), 2.0, 1e-14);
  EXPECT_NEAR(hilbert::expect(t, n).real(), 2.0, 1e-10);
  EXPECT_THROW(initial_state({{6}}, default_internal_state(), {2.0}, PhononState::fock), TruncationError);
}
