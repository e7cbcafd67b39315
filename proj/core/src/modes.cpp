#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mgcool/errors.hpp"
#include "mgcool/model.hpp"

namespace mgcool::model {

namespace {

constexpr int kDefaultComTruncation = 12;
constexpr int kDefaultOtherTruncation = 6;

// Gradient of the dimensionless potential sum u_i^2/2 + sum_{i<j} 1/|u_i - u_j|.
Eigen::VectorXd force_residual(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd r = u;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = u(i) - u(j);
      r(i) -= std::copysign(1.0, d) / (d * d);
    }
  }
  return r;
}

Eigen::MatrixXd hessian(const Eigen::VectorXd& u) {
  const int n = static_cast<int>(u.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double c = 2.0 / std::pow(std::abs(u(i) - u(j)), 3);
      h(i, i) += c;
      h(i, j) = -c;
    }
  }
  return h;
}

void fix_column_signs(Eigen::MatrixXd& m) {
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = static_cast<int>(m.rows()) - 1; r >= 0; --r) {
      if (std::abs(m(r, c)) > 1e-9) {
        if (m(r, c) < 0.0) m.col(c) *= -1.0;
        break;
      }
    }
  }
}

std::vector<int> default_truncation(int modes) {
  std::vector<int> out(modes, kDefaultOtherTruncation);
  out[0] = kDefaultComTruncation;
  return out;
}

}  // namespace

void ModeSpec::validate() const {
  if (n_ions < 1) throw ConfigError("n_ions must be at least 1");
  const int m = num_modes();
  if (m < 1) throw ConfigError("at least one mode is required");
  if (mode_matrix.rows() != n_ions || mode_matrix.cols() != m) {
    throw ConfigError("mode matrix must be n_ions x n_modes");
  }
  if (static_cast<int>(per_mode_truncation.size()) != m) {
    throw ConfigError("one truncation per mode is required");
  }
  for (int n : per_mode_truncation) {
    if (n < 1) throw ConfigError("per-mode truncation must be at least 1");
  }
  if (std::abs(mode_freqs[0] - 1.0) > 1e-12) throw ConfigError("the first mode must be the COM mode at nu");
  for (int k = 0; k < m; ++k) {
    if (!(mode_freqs[k] > 0.0)) throw ConfigError("mode frequencies must be positive");
    if (k > 0 && mode_freqs[k] < mode_freqs[k - 1]) throw ConfigError("mode frequencies must be ascending");
  }
  if (driven_ion < 0 || driven_ion >= n_ions) throw ConfigError("driven_ion out of range");
  if (m == n_ions) {
    const double defect =
        (mode_matrix.transpose() * mode_matrix - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
    if (defect > 1e-12) {
      throw ConfigError("mode matrix is not orthogonal (defect " + std::to_string(defect) + ")");
    }
  }
}

double ModeSpec::local_coupling(int mode) const {
  return mode_matrix(driven_ion, mode) / std::sqrt(mode_freqs[mode]);
}

double ModeSpec::sw_displacement(int mode, double eta) const {
  return eta * mode_matrix(driven_ion, mode) * std::pow(1.0 / mode_freqs[mode], 1.5);
}

ModeSpec single_mode(int n_max) {
  ModeSpec spec;
  spec.per_mode_truncation = {n_max};
  return spec;
}

ModeSpec solve_chain_modes(int n_ions) {
  if (n_ions < 1) throw ConfigError("n_ions must be at least 1");
  ModeSpec spec;
  spec.n_ions = n_ions;
  if (n_ions == 1) return single_mode(kDefaultComTruncation);

  Eigen::VectorXd u(n_ions);
  const double spacing = 2.0 / std::pow(n_ions, 0.56);
  for (int i = 0; i < n_ions; ++i) u(i) = (i - 0.5 * (n_ions - 1)) * spacing;

  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd r = force_residual(u);
    const double norm = r.norm();
    if (norm < 1e-14) {
      converged = true;
      break;
    }
    const Eigen::VectorXd step = hessian(u).ldlt().solve(-r);
    double t = 1.0;
    Eigen::VectorXd trial = u + step;
    while (t > 1e-6) {
      trial = u + t * step;
      bool ordered = true;
      for (int i = 1; i < n_ions; ++i) ordered = ordered && trial(i) > trial(i - 1);
      if (ordered && force_residual(trial).norm() < norm) break;
      t *= 0.5;
    }
    if (t <= 1e-6) break;
    u = trial;
  }
  if (!converged) {
    throw ConvergenceError("Coulomb equilibrium for " + std::to_string(n_ions) + " ions did not converge");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hessian(u));
  if (solver.info() != Eigen::Success) throw ConvergenceError("chain Hessian diagonalisation failed");
  spec.mode_matrix = solver.eigenvectors();
  fix_column_signs(spec.mode_matrix);
  spec.mode_freqs.resize(n_ions);
  for (int k = 0; k < n_ions; ++k) spec.mode_freqs[k] = std::sqrt(solver.eigenvalues()(k));
  spec.mode_freqs[0] = 1.0;
  spec.per_mode_truncation = default_truncation(n_ions);
  return spec;
}

ModeSpec modes_for_chain(int n_ions) {
  if (n_ions < 1) throw ConfigError("n_ions must be at least 1");
  if (n_ions > 3) return solve_chain_modes(n_ions);
  ModeSpec spec;
  spec.n_ions = n_ions;
  if (n_ions == 1) return single_mode(kDefaultComTruncation);
  if (n_ions == 2) {
    const double s = 1.0 / std::sqrt(2.0);
    spec.mode_freqs = {1.0, std::sqrt(3.0)};
    spec.mode_matrix.resize(2, 2);
    spec.mode_matrix << s, -s,
                        s, s;
  } else {
    const double a = 1.0 / std::sqrt(3.0);
    const double b = 1.0 / std::sqrt(2.0);
    const double c = 1.0 / std::sqrt(6.0);
    spec.mode_freqs = {1.0, std::sqrt(3.0), std::sqrt(29.0 / 5.0)};
    spec.mode_matrix.resize(3, 3);
    spec.mode_matrix << a, -b, c,
                        a, 0.0, -2.0 * c,
                        a, b, c;
  }
  spec.per_mode_truncation = default_truncation(n_ions);
  return spec;
}

}  // namespace mgcool::model
