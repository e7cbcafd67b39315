#include "mgcool/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include <Eigen/IterativeLinearSolvers>
#include <unsupported/Eigen/IterativeSolvers>
#include <unsupported/Eigen/KroneckerProduct>

#include "mgcool/errors.hpp"

namespace mgcool::dynamics {

namespace {

using SparseRow = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

constexpr int kDenseSteadyStateMaxDim = 40;
constexpr int kPropagatorMaxDim = 48;
constexpr int kDenseBorderedMaxDim = 72;
constexpr double kSteadyStateResidual = 1e-9;

SparseMatrix sparse(const Matrix& m) { return m.sparseView(1.0, 0.0); }

// Operators of one model prepared for repeated right-hand-side evaluation.
class CompiledModel {
 public:
  CompiledModel(const model::LindbladModel& model, bool want_frame) {
    const int dim = model.dim();
    Matrix h_eff = model.hamiltonian;
    for (const auto& c : model.collapse_ops) h_eff -= 0.5 * kI * (c.adjoint() * c);
    frame_ = want_frame && model.free_energy.size() == dim && commutes_with_free_energy(model);
    if (frame_) {
      energy_ = model.free_energy;
      for (int i = 0; i < dim; ++i) h_eff(i, i) -= energy_(i);
    }
    // Products are formed as dense * sparse, which streams columns of rho.
    g_ = sparse(h_eff.adjoint());
    g_.makeCompressed();
    base_values_.assign(g_.valuePtr(), g_.valuePtr() + g_.nonZeros());
    if (frame_) {
      for (int col = 0; col < g_.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(g_, col); it; ++it) {
          freqs_.push_back(energy_(it.row()) - energy_(it.col()));
        }
      }
    }
    for (const auto& c : model.collapse_ops) jump_adj_.push_back(sparse(c.adjoint()));
    for (const auto& t : model.gradient_decay_terms) {
      term_jump_adj_.push_back(sparse(t.jump.adjoint()));
      generator_adj_.push_back(sparse(t.generator.adjoint()));
    }
  }

  bool frame() const { return frame_; }

  void set_time(double tau) {
    if (!frame_) return;
    Complex* v = g_.valuePtr();
    for (std::size_t k = 0; k < base_values_.size(); ++k) {
      v[k] = base_values_[k] * std::polar(1.0, freqs_[k] * tau);
    }
  }

  // With W = i rho H_eff^dag + sum_t (J rho J^dag) A^dag, the right-hand side is
  // W + W^dag + sum_c c rho c^dag.
  void rhs(const Matrix& rho, Matrix& out) {
    w_.noalias() = rho * g_;
    w_ *= kI;
    for (std::size_t t = 0; t < term_jump_adj_.size(); ++t) {
      sandwich(rho, term_jump_adj_[t]);
      w_.noalias() += m_ * generator_adj_[t];
    }
    out = w_ + w_.adjoint();
    for (const auto& cd : jump_adj_) {
      sandwich(rho, cd);
      out += m_;
    }
  }

  // rho_frame(r,c) <-> rho_lab(r,c) e^{i(E_r - E_c) tau}
  void to_lab(Matrix& rho, double tau) const {
    if (!frame_) return;
    for (int c = 0; c < rho.cols(); ++c) {
      for (int r = 0; r < rho.rows(); ++r) rho(r, c) *= std::polar(1.0, -(energy_(r) - energy_(c)) * tau);
    }
  }

 private:
  static bool commutes_with_free_energy(const model::LindbladModel& model) {
    auto check = [&](const Matrix& op) {
      for (int c = 0; c < op.cols(); ++c) {
        for (int r = 0; r < op.rows(); ++r) {
          if (op(r, c) != Complex(0.0) && std::abs(model.free_energy(r) - model.free_energy(c)) > 1e-12) {
            return false;
          }
        }
      }
      return true;
    };
    for (const auto& c : model.collapse_ops) {
      if (!check(c)) return false;
    }
    for (const auto& t : model.gradient_decay_terms) {
      if (!check(t.generator) || !check(t.jump)) return false;
    }
    return true;
  }

  // m_ = J rho J^dag = (rho J^dag)^dag J^dag for Hermitian rho.
  void sandwich(const Matrix& rho, const SparseMatrix& j_adj) {
    t1_.noalias() = rho * j_adj;
    t2_ = t1_.adjoint();
    m_.noalias() = t2_ * j_adj;
  }

  SparseMatrix g_;
  std::vector<Complex> base_values_;
  std::vector<double> freqs_;
  Eigen::VectorXd energy_;
  bool frame_ = false;
  std::vector<SparseMatrix> jump_adj_;
  std::vector<SparseMatrix> term_jump_adj_;
  std::vector<SparseMatrix> generator_adj_;
  Matrix w_, t1_, t2_, m_;
};

SparseMatrix sparse_identity(int n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

SparseMatrix sparse_kron(const SparseMatrix& a, const SparseMatrix& b) {
  SparseMatrix out = Eigen::kroneckerProduct(a, b).eval();
  return out;
}

SparseMatrix superoperator_sparse(const Matrix& hamiltonian, const std::vector<Matrix>& collapse_ops,
                                  const std::vector<model::CommutatorDecayTerm>& extra) {
  const int dim = static_cast<int>(hamiltonian.rows());
  const SparseMatrix id = sparse_identity(dim);
  const SparseMatrix h = sparse(hamiltonian);
  SparseMatrix s = -kI * (sparse_kron(id, h) - sparse_kron(SparseMatrix(h.transpose()), id));
  for (const auto& c_dense : collapse_ops) {
    const SparseMatrix c = sparse(c_dense);
    const SparseMatrix cdc = sparse(c_dense.adjoint() * c_dense);
    s += sparse_kron(SparseMatrix(c.conjugate()), c);
    s -= 0.5 * sparse_kron(id, cdc);
    s -= 0.5 * sparse_kron(SparseMatrix(cdc.transpose()), id);
  }
  for (const auto& t : extra) {
    const SparseMatrix j = sparse(t.jump);
    const SparseMatrix aj = sparse(t.generator * t.jump);
    const SparseMatrix jda = sparse(t.jump.adjoint() * t.generator);
    s += sparse_kron(SparseMatrix(j.conjugate()), aj);
    s -= sparse_kron(SparseMatrix(jda.transpose()), j);
  }
  s.prune(Complex(0.0), 0.0);
  return s;
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix unvec(const Vector& v, int dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

double rms_error(const Matrix& err, const Matrix& y0, const Matrix& y1, double atol, double rtol) {
  double acc = 0.0;
  const Complex* e = err.data();
  const Complex* a = y0.data();
  const Complex* b = y1.data();
  const Eigen::Index n = err.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double scale = atol + rtol * std::max(std::abs(a[k]), std::abs(b[k]));
    const double r = std::abs(e[k]) / scale;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Sampler {
 public:
  Sampler(const model::LindbladModel& model, const IntegratorConfig& cfg, std::size_t n_samples)
      : model_(model), cfg_(cfg) {
    std::mt19937_64 rng(cfg.positivity_seed);
    std::uniform_int_distribution<std::size_t> pick(0, n_samples - 1);
    for (int k = 0; k < cfg.positivity_checks; ++k) check_at_.push_back(pick(rng));
    std::sort(check_at_.begin(), check_at_.end());
    check_at_.erase(std::unique(check_at_.begin(), check_at_.end()), check_at_.end());
    trace_.min_eigenvalue = 0.0;
  }

  void record(double t, const Matrix& rho) {
    const Snapshot s = observe(model_, rho);
    trace_.times.push_back(t);
    if (trace_.n_mean_modes.empty()) trace_.n_mean_modes.resize(s.n_mean_modes.size());
    for (std::size_t k = 0; k < s.n_mean_modes.size(); ++k) trace_.n_mean_modes[k].push_back(s.n_mean_modes[k]);
    trace_.n_mean.push_back(s.n_mean_modes.front());
    trace_.pop_e.push_back(s.pop_e);
    trace_.pop_D.push_back(s.pop_D);
    trace_.tail.push_back(s.tail);
    trace_.trace_defect.push_back(s.trace_defect);
    trace_.max_hermiticity_defect = std::max(trace_.max_hermiticity_defect, hilbert::hermiticity_defect(rho));

    if (!std::isfinite(s.trace_defect)) throw IntegratorError("state became non-finite at t=" + std::to_string(t));
    if (s.tail > cfg_.tail_tol) {
      throw TruncationError("population " + std::to_string(s.tail) + " in the top two Fock levels at t=" +
                            std::to_string(t) + " exceeds tail_tol=" + std::to_string(cfg_.tail_tol));
    }
    if (s.trace_defect > 1e-7 && trace_.valid) {
      trace_.valid = false;
      trace_.invalid_reason = "trace defect " + std::to_string(s.trace_defect) + " at t=" + std::to_string(t);
    }
    if (std::binary_search(check_at_.begin(), check_at_.end(), index_)) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitize(rho), Eigen::EigenvaluesOnly);
      const double lowest = eig.eigenvalues().minCoeff();
      trace_.min_eigenvalue = std::min(trace_.min_eigenvalue, lowest);
      if (lowest < -1e-7 && trace_.valid) {
        trace_.valid = false;
        trace_.invalid_reason = "negative eigenvalue " + std::to_string(lowest) + " at t=" + std::to_string(t);
      }
    }
    ++index_;
  }

  CoolingTrace& trace() { return trace_; }

 private:
  const model::LindbladModel& model_;
  const IntegratorConfig& cfg_;
  std::vector<std::size_t> check_at_;
  std::size_t index_ = 0;
  CoolingTrace trace_;
};

void check_initial_state(const model::LindbladModel& model, const Matrix& rho0) {
  if (rho0.rows() != model.dim() || rho0.cols() != model.dim()) {
    throw DimensionError("initial state is " + std::to_string(rho0.rows()) + "x" + std::to_string(rho0.cols()) +
                         ", model dimension is " + std::to_string(model.dim()));
  }
  if (hilbert::hermiticity_defect(rho0) > 1e-10) throw ConfigError("initial state is not Hermitian");
  if (std::abs(rho0.trace() - Complex(1.0)) > 1e-10) throw ConfigError("initial state does not have unit trace");
}

// Bordered system (row of rho(0,0) replaced by the trace functional) solved by
// ILU-preconditioned Krylov iterations.
Vector iterative_steady_state(const model::LindbladModel& model) {
  const int dim = model.dim();
  const long n = static_cast<long>(dim) * dim;
  SparseMatrix s = superoperator_sparse(model.hamiltonian, model.collapse_ops, model.gradient_decay_terms);
  SparseRow rows = s;
  for (SparseRow::InnerIterator it(rows, 0); it; ++it) it.valueRef() = 0.0;
  for (int i = 0; i < dim; ++i) rows.coeffRef(0, i + i * dim) = 1.0;
  rows.prune(Complex(0.0), 0.0);
  SparseMatrix a = rows;
  a.makeCompressed();
  Vector rhs = Vector::Zero(n);
  rhs(0) = 1.0;
  auto accept = [&](const Vector& x) { return x.allFinite() && (a * x - rhs).norm() <= kSteadyStateResidual; };
  const std::pair<double, int> ilu_settings[] = {{1e-2, 5}, {1e-3, 10}, {1e-4, 20}};
  for (const auto& [droptol, fill] : ilu_settings) {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<Complex>> solver;
    solver.preconditioner().setDroptol(droptol);
    solver.preconditioner().setFillfactor(fill);
    solver.setTolerance(1e-13);
    solver.setMaxIterations(2000);
    solver.compute(a);
    if (solver.info() != Eigen::Success) continue;
    Vector x = solver.solve(rhs);
    if (accept(x)) return x;
  }
  for (const auto& [droptol, fill] : ilu_settings) {
    Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<Complex>> solver;
    solver.set_restart(150);
    solver.preconditioner().setDroptol(droptol);
    solver.preconditioner().setFillfactor(fill);
    solver.setTolerance(1e-14);
    solver.setMaxIterations(3000);
    solver.compute(a);
    if (solver.info() != Eigen::Success) continue;
    Vector x = solver.solve(rhs);
    if (accept(x)) return x;
  }
  throw ConvergenceError("iterative steady-state solve did not reach residual " +
                         std::to_string(kSteadyStateResidual));
}

}  // namespace

Method parse_method(std::string_view text) {
  if (text == "adaptive_rk" || text == "adaptive") return Method::adaptive_rk;
  if (text == "fixed_rk4" || text == "rk4") return Method::fixed_rk4;
  if (text == "propagator") return Method::propagator;
  throw ConfigError("unknown integrator method '" + std::string(text) + "'");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::adaptive_rk: return "adaptive_rk";
    case Method::fixed_rk4: return "fixed_rk4";
    case Method::propagator: return "propagator";
  }
  return "?";
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(t_end > t_start)) throw ConfigError("t_end must exceed t_start");
  if (!(sample_every > 0.0)) throw ConfigError("sample_every must be positive");
  if (!(tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");
  if (!(fixed_step > 0.0)) throw ConfigError("fixed_step must be positive");
}

void CoolingTrace::append(const CoolingTrace& later) {
  // The first sample of `later` repeats the last sample of this trace.
  const std::size_t skip = (!times.empty() && !later.times.empty() && later.times.front() <= times.back()) ? 1 : 0;
  auto cat = [skip](std::vector<double>& a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin() + static_cast<long>(std::min(skip, b.size())), b.end());
  };
  cat(times, later.times);
  cat(n_mean, later.n_mean);
  if (n_mean_modes.size() < later.n_mean_modes.size()) n_mean_modes.resize(later.n_mean_modes.size());
  for (std::size_t k = 0; k < later.n_mean_modes.size(); ++k) cat(n_mean_modes[k], later.n_mean_modes[k]);
  cat(pop_e, later.pop_e);
  cat(pop_D, later.pop_D);
  cat(tail, later.tail);
  cat(trace_defect, later.trace_defect);
  max_hermiticity_defect = std::max(max_hermiticity_defect, later.max_hermiticity_defect);
  min_eigenvalue = std::min(min_eigenvalue, later.min_eigenvalue);
  if (valid && !later.valid) invalid_reason = later.invalid_reason;
  valid = valid && later.valid;
  final_state = later.final_state;
  steps += later.steps;
  rejected_steps += later.rejected_steps;
}

Snapshot observe(const model::LindbladModel& model, const Matrix& rho) {
  Snapshot s;
  for (const auto& n_op : model.observables.n_ops) s.n_mean_modes.push_back(hilbert::expect(rho, n_op).real());
  s.pop_e = hilbert::expect(rho, model.observables.proj_e).real();
  s.pop_D = hilbert::expect(rho, model.observables.proj_dark).real();
  for (int k = 0; k < model.layout.num_modes(); ++k) {
    const auto pops = hilbert::mode_populations(model.layout, rho, k);
    const std::size_t n = pops.size();
    const double top = pops[n - 1] + (n >= 2 ? pops[n - 2] : 0.0);
    s.tail = std::max(s.tail, top);
  }
  s.trace_defect = std::abs(rho.trace() - Complex(1.0));
  return s;
}

Matrix apply_liouvillian(const model::LindbladModel& model, const Matrix& rho) {
  if (rho.rows() != model.dim() || rho.cols() != model.dim()) throw DimensionError("apply_liouvillian: size mismatch");
  const Matrix& h = model.hamiltonian;
  Matrix out = -kI * (h * rho - rho * h);
  for (const auto& c : model.collapse_ops) {
    const Matrix cdc = c.adjoint() * c;
    out += c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc);
  }
  for (const auto& t : model.gradient_decay_terms) {
    const Matrix y = t.jump * rho * t.jump.adjoint();
    out += t.generator * y - y * t.generator;
  }
  return out;
}

Matrix liouvillian_superoperator(const Matrix& hamiltonian, const std::vector<Matrix>& collapse_ops,
                                 const std::vector<model::CommutatorDecayTerm>& extra) {
  return Matrix(superoperator_sparse(hamiltonian, collapse_ops, extra));
}

Matrix liouvillian_superoperator(const model::LindbladModel& model) {
  return liouvillian_superoperator(model.hamiltonian, model.collapse_ops, model.gradient_decay_terms);
}

CoolingTrace evolve(const model::LindbladModel& model, const Matrix& rho0, const IntegratorConfig& cfg) {
  cfg.validate();
  check_initial_state(model, rho0);
  const int dim = model.dim();
  const double span = cfg.t_end - cfg.t_start;
  const long n_intervals = std::max(1L, std::lround(span / cfg.sample_every));
  const double dt_sample = span / static_cast<double>(n_intervals);
  Sampler sampler(model, cfg, static_cast<std::size_t>(n_intervals + 1));
  auto time_at = [&](long k) { return k == n_intervals ? cfg.t_end : cfg.t_start + k * dt_sample; };

  Matrix rho = hermitize(rho0);
  sampler.record(cfg.t_start, rho);
  long steps = 0;
  long rejected = 0;

  if (cfg.method == Method::propagator) {
    if (dim > kPropagatorMaxDim) {
      throw ConfigError("propagator method needs dim <= " + std::to_string(kPropagatorMaxDim) + ", model has " +
                        std::to_string(dim));
    }
    const Matrix s = liouvillian_superoperator(model);
    const Matrix prop = hilbert::expm(s * dt_sample);
    Vector v = Eigen::Map<const Vector>(rho.data(), rho.size());
    for (long k = 1; k <= n_intervals; ++k) {
      v = prop * v;
      rho = hermitize(unvec(v, dim));
      v = Eigen::Map<const Vector>(rho.data(), rho.size());
      sampler.record(time_at(k), rho);
      ++steps;
    }
    CoolingTrace& out = sampler.trace();
    out.final_state = rho;
    out.steps = steps;
    return std::move(out);
  }

  CompiledModel compiled(model, cfg.rotating_frame);
  auto frame_time = [&](double t) { return t - cfg.t_start; };
  auto lab_state = [&](Matrix state, double t) {
    compiled.to_lab(state, frame_time(t));
    return state;
  };

  if (cfg.method == Method::fixed_rk4) {
    const long sub = std::max(1L, static_cast<long>(std::ceil(dt_sample / cfg.fixed_step - 1e-9)));
    const double h = dt_sample / static_cast<double>(sub);
    Matrix k1, k2, k3, k4, y;
    double t = cfg.t_start;
    for (long k = 1; k <= n_intervals; ++k) {
      for (long s = 0; s < sub; ++s) {
        const double tau = frame_time(t);
        compiled.set_time(tau);
        compiled.rhs(rho, k1);
        y = rho + 0.5 * h * k1;
        compiled.set_time(tau + 0.5 * h);
        compiled.rhs(y, k2);
        y = rho + 0.5 * h * k2;
        compiled.rhs(y, k3);
        y = rho + h * k3;
        compiled.set_time(tau + h);
        compiled.rhs(y, k4);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = cfg.t_start + ((k - 1) * sub + s + 1) * h;
        if (++steps > cfg.max_steps) throw IntegratorError("fixed-step RK4 exceeded max_steps");
      }
      t = time_at(k);
      sampler.record(t, rho);
    }
    CoolingTrace& out = sampler.trace();
    out.final_state = lab_state(rho, cfg.t_end);
    out.steps = steps;
    return std::move(out);
  }

  // Adaptive Dormand-Prince 5(4) with FSAL; steps are clipped to land on sample times.
  Matrix k1, k2, k3, k4, k5, k6, k7, y, y_new, err;
  double t = cfg.t_start;
  double h = std::min(dt_sample, 1e-2);
  compiled.set_time(0.0);
  compiled.rhs(rho, k1);
  for (long k = 1; k <= n_intervals; ++k) {
    const double t_target = time_at(k);
    while (t < t_target) {
      bool last = false;
      double step = h;
      if (t + step >= t_target - 1e-12 * std::max(1.0, std::abs(t_target))) {
        step = t_target - t;
        last = true;
      }
      const double tau = frame_time(t);
      compiled.set_time(tau + c2 * step);
      y = rho + step * (a21 * k1);
      compiled.rhs(y, k2);
      compiled.set_time(tau + c3 * step);
      y = rho + step * (a31 * k1 + a32 * k2);
      compiled.rhs(y, k3);
      compiled.set_time(tau + c4 * step);
      y = rho + step * (a41 * k1 + a42 * k2 + a43 * k3);
      compiled.rhs(y, k4);
      compiled.set_time(tau + c5 * step);
      y = rho + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      compiled.rhs(y, k5);
      compiled.set_time(tau + step);
      y = rho + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      compiled.rhs(y, k6);
      y_new = rho + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      compiled.rhs(y_new, k7);
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double e = rms_error(err, rho, y_new, cfg.abs_tol, cfg.rel_tol);
      if (!std::isfinite(e)) throw IntegratorError("non-finite error estimate at t=" + std::to_string(t));
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      if (e <= 1.0) {
        t = last ? t_target : t + step;
        rho.swap(y_new);
        k1.swap(k7);
        if (!last || factor < 1.0) h = step * factor;
        else h = std::max(h, step * factor);
      } else {
        ++rejected;
        h = step * std::min(1.0, factor);
        if (h < 1e-12 * std::max(1.0, std::abs(t))) {
          throw IntegratorError("step size underflow at t=" + std::to_string(t));
        }
      }
      if (++steps > cfg.max_steps) throw IntegratorError("adaptive integrator exceeded max_steps");
    }
    sampler.record(t, rho);
  }
  CoolingTrace& out = sampler.trace();
  out.final_state = lab_state(rho, cfg.t_end);
  out.steps = steps;
  out.rejected_steps = rejected;
  return std::move(out);
}

Matrix steady_state(const model::LindbladModel& model) {
  const int dim = model.dim();
  const int n = dim * dim;
  Matrix rho;
  if (dim <= kDenseSteadyStateMaxDim) {
    const Matrix s = liouvillian_superoperator(model);
    Eigen::BDCSVD<Matrix> svd(s, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(n - 2) <= 1e-10) {
      throw DegenerateSteadyStateError("second-smallest singular value " + std::to_string(sv(n - 2)) +
                                       " of the Liouvillian is below 1e-10");
    }
    rho = unvec(svd.matrixV().col(n - 1), dim);
  } else if (dim <= kDenseBorderedMaxDim) {
    Matrix a = liouvillian_superoperator(model);
    a.row(0).setZero();
    for (int i = 0; i < dim; ++i) a(0, i + i * dim) = 1.0;
    Eigen::PartialPivLU<Matrix> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond > 1e-12)) {
      throw DegenerateSteadyStateError("bordered Liouvillian is singular (rcond " + std::to_string(rcond) + ")");
    }
    Vector rhs = Vector::Zero(n);
    rhs(0) = 1.0;
    rho = unvec(lu.solve(rhs), dim);
  } else {
    rho = unvec(iterative_steady_state(model), dim);
  }
  const Complex tr = rho.trace();
  if (std::abs(tr) < 1e-14) throw DegenerateSteadyStateError("stationary vector has zero trace");
  rho = hermitize(rho / tr);
  return rho;
}

}  // namespace mgcool::dynamics
