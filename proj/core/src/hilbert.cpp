#include "mgcool/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "mgcool/errors.hpp"

namespace mgcool::hilbert {

namespace {

constexpr int kDisplacementPadding = 12;
constexpr int kLowerBlockMargin = 5;
constexpr double kDisplacementTolerance = 1e-4;

Matrix displacement_generator(int dim, double alpha) {
  Matrix gen = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    const double s = std::sqrt(static_cast<double>(n));
    gen(n, n - 1) = alpha * s;   // alpha a^dag
    gen(n - 1, n) = -alpha * s;  // -alpha a
  }
  return gen;
}

}  // namespace

FockSpace::FockSpace(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw ConfigError("FockSpace needs n_max >= 1, got " + std::to_string(n_max));
}

FockOperators fock_ops(const FockSpace& space) {
  const int dim = space.dimension();
  FockOperators ops;
  ops.a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) ops.a(n - 1, n) = std::sqrt(static_cast<double>(n));
  ops.a_dag = ops.a.adjoint();
  ops.n_op = ops.a_dag * ops.a;
  return ops;
}

Vector ket(Level level) {
  Vector v = Vector::Zero(kInternalDim);
  v(static_cast<int>(level)) = 1.0;
  return v;
}

Vector bright_state() { return (ket(Level::plus) + ket(Level::minus)) / std::sqrt(2.0); }

Vector dark_state() { return (ket(Level::plus) - ket(Level::minus)) / std::sqrt(2.0); }

Matrix transition(Level i, Level j) {
  Matrix m = Matrix::Zero(kInternalDim, kInternalDim);
  m(static_cast<int>(i), static_cast<int>(j)) = 1.0;
  return m;
}

Matrix projector(const Vector& psi) { return psi * psi.adjoint(); }

Matrix kron(std::span<const Matrix> ops) {
  if (ops.empty()) throw DimensionError("kron of an empty operator list");
  Matrix out = ops.front();
  for (std::size_t k = 1; k < ops.size(); ++k) {
    Matrix next = Eigen::kroneckerProduct(out, ops[k]).eval();
    out = std::move(next);
  }
  return out;
}

Matrix kron(std::initializer_list<Matrix> ops) {
  return kron(std::span<const Matrix>(ops.begin(), ops.size()));
}

Matrix expm(const Matrix& m) { return m.exp(); }

double displacement_truncation_defect(const FockSpace& space, double alpha) {
  const int dim = space.dimension();
  const int lower = std::max(1, dim - kLowerBlockMargin);
  const int padded = dim + kDisplacementPadding;
  const Matrix d = expm(displacement_generator(padded, alpha));
  const Matrix kept = d.topLeftCorner(dim, lower);
  const Matrix gram = kept.adjoint() * kept;
  return (gram - Matrix::Identity(lower, lower)).cwiseAbs().maxCoeff();
}

Matrix displacement(const FockSpace& space, double alpha) {
  const int dim = space.dimension();
  if (std::abs(alpha) * std::sqrt(static_cast<double>(space.n_max())) > 0.3 * space.n_max()) {
    std::clog << "warning: displacement " << alpha << " is not small against n_max=" << space.n_max()
              << "\n";
  }
  const double defect = displacement_truncation_defect(space, alpha);
  if (defect > kDisplacementTolerance) {
    throw TruncationError("displacement by " + std::to_string(alpha) + " leaks " +
                          std::to_string(defect) + " out of n_max=" +
                          std::to_string(space.n_max()));
  }
  return expm(displacement_generator(dim, alpha));
}

Complex expect(const Matrix& rho, const Matrix& obs) {
  if (rho.rows() != obs.rows() || rho.cols() != obs.cols() || rho.rows() != rho.cols()) {
    throw DimensionError("expect: rho is " + std::to_string(rho.rows()) + "x" +
                         std::to_string(rho.cols()) + ", observable is " +
                         std::to_string(obs.rows()) + "x" + std::to_string(obs.cols()));
  }
  // tr(obs rho) = sum_ij obs_ij rho_ji
  const Complex value = obs.cwiseProduct(rho.transpose()).sum();
  if (hermiticity_defect(obs) < 1e-12 && hermiticity_defect(rho) < 1e-8 &&
      std::abs(value.imag()) > 1e-8) {
    throw DimensionError("expect: Hermitian observable produced imaginary part " +
                         std::to_string(value.imag()));
  }
  return value;
}

Complex expect(const Matrix& rho, const SparseMatrix& obs) {
  if (rho.rows() != obs.rows() || rho.cols() != obs.cols()) {
    throw DimensionError("expect: dimension mismatch between rho and sparse observable");
  }
  Complex value = 0.0;
  for (int k = 0; k < obs.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(obs, k); it; ++it) value += it.value() * rho(it.col(), it.row());
  }
  return value;
}

double hermiticity_defect(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermiticity_defect needs a square matrix");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Vector thermal_populations(double mean, int n_cut) {
  if (n_cut < 1 || !(mean >= 0.0) || mean >= n_cut) {
    throw ConfigError("thermal_populations: mean " + std::to_string(mean) +
                      " cannot be represented on levels 0.." + std::to_string(n_cut));
  }
  auto dist = [n_cut](double ratio) {
    Eigen::VectorXd p(n_cut + 1);
    double w = 1.0;
    for (int n = 0; n <= n_cut; ++n) {
      p(n) = w;
      w *= ratio;
    }
    return Eigen::VectorXd(p / p.sum());
  };
  auto mean_of = [n_cut](const Eigen::VectorXd& p) {
    double m = 0.0;
    for (int n = 0; n <= n_cut; ++n) m += n * p(n);
    return m;
  };
  if (mean == 0.0) {
    Vector out = Vector::Zero(n_cut + 1);
    out(0) = 1.0;
    return out;
  }
  // Untruncated Bose-Einstein ratio as the starting bracket.
  double lo = 0.0;
  double hi = std::max(2.0, 2.0 * mean / (1.0 + mean));
  while (mean_of(dist(hi)) < mean) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_of(dist(mid)) < mean) lo = mid;
    else hi = mid;
  }
  return dist(0.5 * (lo + hi)).cast<Complex>();
}

int SpaceLayout::mode_space_dim() const {
  return std::accumulate(mode_dims.begin(), mode_dims.end(), 1, std::multiplies<>());
}

Matrix lift_mode(const SpaceLayout& layout, int mode, const Matrix& op) {
  if (mode < 0 || mode >= layout.num_modes()) throw DimensionError("lift_mode: no such mode");
  if (op.rows() != layout.mode_dims[mode]) throw DimensionError("lift_mode: operator size mismatch");
  std::vector<Matrix> factors;
  factors.reserve(layout.mode_dims.size());
  for (int k = 0; k < layout.num_modes(); ++k) {
    factors.push_back(k == mode ? op : Matrix::Identity(layout.mode_dims[k], layout.mode_dims[k]));
  }
  return kron(factors);
}

std::vector<double> mode_populations(const SpaceLayout& layout, const Matrix& rho, int mode) {
  const int dim = layout.dim();
  if (rho.rows() != dim) throw DimensionError("mode_populations: rho does not match layout");
  int stride = 1;
  for (int k = layout.num_modes() - 1; k > mode; --k) stride *= layout.mode_dims[k];
  const int nm = layout.mode_dims[mode];
  std::vector<double> pops(nm, 0.0);
  for (int i = 0; i < dim; ++i) pops[(i / stride) % nm] += rho(i, i).real();
  return pops;
}

}  // namespace mgcool::hilbert
