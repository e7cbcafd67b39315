#pragma once

// Operator algebra on a 3-level internal space tensored with truncated
// Fock spaces. Composite ordering is always internal ⊗ mode_1 ⊗ ... ⊗ mode_K
// and the internal basis is (e, +1, -1).

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace mgcool {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

namespace hilbert {

class FockSpace {
 public:
  explicit FockSpace(int n_max);
  int n_max() const noexcept { return n_max_; }
  int dimension() const noexcept { return n_max_ + 1; }

 private:
  int n_max_;
};

struct FockOperators {
  Matrix a;
  Matrix a_dag;
  Matrix n_op;
};

FockOperators fock_ops(const FockSpace& space);

/// Internal levels in canonical order.
enum class Level : int { excited = 0, plus = 1, minus = 2 };
inline constexpr int kInternalDim = 3;

Vector ket(Level level);
/// |B> = (|+1> + |-1>)/sqrt2
Vector bright_state();
/// |D> = (|+1> - |-1>)/sqrt2
Vector dark_state();
/// |i><j| on the internal space.
Matrix transition(Level i, Level j);
Matrix projector(const Vector& psi);

/// Tensor product in the order given, ops.front() being the leftmost factor.
Matrix kron(std::span<const Matrix> ops);
Matrix kron(std::initializer_list<Matrix> ops);

/// exp(m) by scaling and squaring with a Pade approximant.
Matrix expm(const Matrix& m);

/// Truncation leakage of exp(alpha (a^dag - a)) on the lower n_max-5 block:
/// the displacement is evaluated on a padded space and the max-abs deviation
/// of (P D)(P D)^dag from identity is returned, P the retained levels.
double displacement_truncation_defect(const FockSpace& space, double alpha);

/// exp(alpha (a^dag - a)) on the truncated space.
/// Throws TruncationError when the lower-block defect exceeds 1e-6.
Matrix displacement(const FockSpace& space, double alpha);

/// tr(obs * rho). Throws DimensionError on mismatch.
Complex expect(const Matrix& rho, const Matrix& obs);
Complex expect(const Matrix& rho, const SparseMatrix& obs);

double hermiticity_defect(const Matrix& m);

/// Diagonal density matrix with geometric (thermal) populations on levels
/// 0..n_cut, rescaled so that the mean occupation equals `mean`.
/// `n_cut` must allow the requested mean (mean < n_cut / 2 is always fine).
Vector thermal_populations(double mean, int n_cut);

/// Dimensions of the composite space internal ⊗ modes.
struct SpaceLayout {
  std::vector<int> mode_dims;

  int internal_dim() const noexcept { return kInternalDim; }
  int mode_space_dim() const;
  int dim() const { return kInternalDim * mode_space_dim(); }
  int num_modes() const { return static_cast<int>(mode_dims.size()); }
};

/// Embeds a single-mode operator as I ⊗ ... ⊗ op ⊗ ... ⊗ I on the mode space
/// (no internal factor).
Matrix lift_mode(const SpaceLayout& layout, int mode, const Matrix& op);

/// Marginal populations of Fock levels of `mode` from the diagonal of rho.
std::vector<double> mode_populations(const SpaceLayout& layout, const Matrix& rho, int mode);

}  // namespace hilbert
}  // namespace mgcool
