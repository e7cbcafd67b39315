#include "mgcool/rates.hpp"

#include <cmath>
#include <string>

#include "mgcool/errors.hpp"

namespace mgcool::rates {

using hilbert::Level;

namespace {

Complex carrier_coupling(const model::SystemParams& p) {
  return p.omega / std::sqrt(2.0) * (1.0 + std::exp(kI * p.phi));
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, int dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

Matrix dark_projector() { return hilbert::projector(hilbert::dark_state()); }

const Matrix& pick(int i, const Matrix& f1, const Matrix& f2) {
  if (i == 1) return f1;
  if (i == 2) return f2;
  throw ConfigError("spectrum index must be 1 or 2, got " + std::to_string(i));
}

}  // namespace

double resonance_detuning(double omega, double nu) {
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  return (nu * nu - omega * omega) / nu;
}

DressedInfo dressed_info(const model::SystemParams& p) {
  if (p.omega < 0.0) throw ConfigError("Rabi frequency must be non-negative");
  const Complex g = carrier_coupling(p);
  Eigen::Matrix2cd block;
  block << p.delta, g, std::conj(g), 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(block);
  DressedInfo info;
  info.omega_d = solver.eigenvalues()(0);
  info.omega_u = solver.eigenvalues()(1);

  auto normalise = [](Eigen::Vector2cd v) {
    const double mag = std::abs(v(0));
    if (mag > 1e-300) v *= std::conj(v(0)) / mag;
    else v *= std::conj(v(1)) / std::abs(v(1));
    return v;
  };
  const Eigen::Vector2cd u = normalise(solver.eigenvectors().col(1));
  const Eigen::Vector2cd d = normalise(solver.eigenvectors().col(0));
  info.a_e_u = u(0).real();
  info.a_e_d = d(0).real();
  info.omega_eff = p.omega * info.a_e_u;
  info.u = u(0) * hilbert::ket(Level::excited) + u(1) * hilbert::bright_state();
  info.d = d(0) * hilbert::ket(Level::excited) + d(1) * hilbert::bright_state();
  return info;
}

double omega_eff_at_resonance(double omega, double nu) {
  if (!(nu > 0.0)) throw ConfigError("nu must be positive");
  return nu * std::abs(omega) / std::sqrt(nu * nu + omega * omega);
}

double rate_formula(const model::SystemParams& p) {
  const double gamma = p.gamma();
  const double nu = p.nu;
  const double bracket = (p.delta - nu) * nu + p.omega * p.omega;
  return 8.0 * p.eta * p.eta * p.omega * p.omega * gamma * nu * nu / (gamma * gamma * nu * nu + bracket * bracket);
}

Matrix internal_liouvillian(const model::SystemParams& p) {
  const Complex g = carrier_coupling(p);
  Matrix h = p.delta * hilbert::transition(Level::excited, Level::excited);
  const Matrix e_bright = hilbert::ket(Level::excited) * hilbert::bright_state().adjoint();
  h += g * e_bright + std::conj(g) * e_bright.adjoint();
  std::vector<Matrix> jumps;
  if (p.gamma_plus > 0.0) jumps.push_back(std::sqrt(p.gamma_plus) * hilbert::transition(Level::plus, Level::excited));
  if (p.gamma_minus > 0.0) {
    jumps.push_back(std::sqrt(p.gamma_minus) * hilbert::transition(Level::minus, Level::excited));
  }
  return dynamics::liouvillian_superoperator(h, jumps);
}

Matrix sideband_operator(const model::SystemParams& p) {
  const Complex phase = std::exp(kI * p.phi);
  const Complex scale = p.omega / std::sqrt(2.0);
  const Complex red = scale * (kI * p.eta * (1.0 - phase) + (1.0 + phase) * p.eta);
  const Complex blue = scale * (kI * p.eta * (1.0 - phase) - (1.0 + phase) * p.eta);
  const Matrix e_dark = hilbert::ket(Level::excited) * hilbert::dark_state().adjoint();
  // Coefficient of b: red |e><D| from the coupling, conj(blue) |D><e| from the h.c. of the b^dag term.
  return red * e_dark + std::conj(blue) * e_dark.adjoint();
}

Complex spectrum(const model::SystemParams& p, int i, int j, double omega) {
  const Matrix f1 = sideband_operator(p);
  const Matrix f2 = f1.adjoint();
  const Matrix& fi = pick(i, f1, f2);
  const Matrix& fj = pick(j, f1, f2);
  const Matrix l0 = internal_liouvillian(p);
  const Matrix m = -(l0 + kI * omega * Matrix::Identity(l0.rows(), l0.cols()));
  Eigen::PartialPivLU<Matrix> lu(m);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    throw SingularResolventError("L0 + i omega is singular at omega=" + std::to_string(omega) +
                                 " (rcond " + std::to_string(rcond) + ")");
  }
  const Vector x = lu.solve(vec(fj * dark_projector()));
  return (fi * unvec(x, hilbert::kInternalDim)).trace();
}

Complex spectrum_by_quadrature(const model::SystemParams& p, int i, int j, double omega, double t_max,
                               double dt) {
  if (!(dt > 0.0) || !(t_max > dt)) throw ConfigError("quadrature needs 0 < dt < t_max");
  const Matrix f1 = sideband_operator(p);
  const Matrix f2 = f1.adjoint();
  const Matrix& fi = pick(i, f1, f2);
  const Matrix& fj = pick(j, f1, f2);
  long n = std::lround(t_max / dt);
  if (n % 2) ++n;
  const double h = t_max / static_cast<double>(n);
  const Matrix step = hilbert::expm(internal_liouvillian(p) * h);
  Vector x = vec(fj * dark_projector());
  Complex sum = 0.0;
  for (long k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const Complex value = std::exp(kI * omega * (k * h)) * (fi * unvec(x, hilbert::kInternalDim)).trace();
    sum += w * value;
    x = step * x;
  }
  return sum * h / 3.0;
}

SpectralRates adiabatic_rates(const model::SystemParams& p) {
  p.validate();
  SpectralRates out;
  out.S21_at_nu = spectrum(p, 2, 1, p.nu);
  out.S12_at_minus_nu = spectrum(p, 1, 2, -p.nu);
  out.A_minus = 2.0 * out.S21_at_nu.real();
  out.A_plus = 2.0 * out.S12_at_minus_nu.real();
  const double w = out.A_minus - out.A_plus;
  out.n_ss = out.A_plus == 0.0 ? 0.0 : out.A_plus / w;
  return out;
}

RateResult extract_rate(std::span<const double> times, std::span<const double> n_mean) {
  if (times.size() != n_mean.size()) throw FitError("times and populations differ in length");
  const std::size_t n = times.size();
  if (n < 20) throw FitError("trace has only " + std::to_string(n) + " samples");
  const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.05 * n)));
  double n_final = 0.0;
  for (std::size_t k = n - tail; k < n; ++k) n_final += n_mean[k];
  n_final /= static_cast<double>(tail);
  const double excess0 = n_mean[0] - n_final;
  if (!(excess0 > 0.0)) throw FitError("population does not decay");

  std::size_t lo = n;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = (n_mean[k] - n_final) / excess0;
    if (r <= 0.9 && r >= 0.1) {
      lo = k;
      break;
    }
  }
  std::size_t hi = lo;
  while (hi < n) {
    const double r = (n_mean[hi] - n_final) / excess0;
    if (r > 0.9 || r < 0.1) break;
    ++hi;
  }
  const std::size_t count = hi - lo;
  if (lo == n || count < 10) {
    throw FitError("fit window holds " + std::to_string(lo == n ? 0 : count) + " samples, need at least 10");
  }

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double t = times[k];
    const double y = std::log(n_mean[k] - n_final);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double m = static_cast<double>(count);
  const double slope = (m * sty - st * sy) / (m * stt - st * st);
  const double intercept = (sy - slope * st) / m;
  double ss = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    const double r = std::log(n_mean[k] - n_final) - (intercept + slope * times[k]);
    ss += r * r;
  }

  RateResult out;
  out.W = -slope;
  out.n_final = n_final;
  out.t_lo = times[lo];
  out.t_hi = times[hi - 1];
  out.residual = std::sqrt(ss / m);
  out.window_samples = static_cast<int>(count);
  if (out.residual > 0.05) {
    throw FitError("log-linear fit residual " + std::to_string(out.residual) + " exceeds 0.05");
  }
  out.valid = true;
  return out;
}

RateResult extract_rate(const dynamics::CoolingTrace& trace) { return extract_rate(trace.times, trace.n_mean); }

}  // namespace mgcool::rates
