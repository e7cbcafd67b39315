#include <cmath>
#include <numbers>

#include "mgcool/errors.hpp"
#include "mgcool/model.hpp"

namespace mgcool::model {

namespace {

double ground_state_extent(const GradientSpec& spec) {
  return std::sqrt(constants::hbar / (2.0 * spec.ion_mass * spec.trap_freq));
}

}  // namespace

void GradientSpec::validate() const {
  const double values[] = {ion_mass, wavelength, trap_freq, angle_theta, B0, omega0, g_factor, dB_dx};
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("gradient parameters must be finite");
  }
  if (ion_mass <= 0.0) throw ConfigError("ion mass must be positive");
  if (wavelength <= 0.0) throw ConfigError("wavelength must be positive");
  if (trap_freq <= 0.0) throw ConfigError("trap frequency must be positive");
  if ((B0 == 0.0) != (omega0 == 0.0)) throw ConfigError("B0 and omega0 must be given together");
  if (B0 == 0.0 && g_factor == 0.0) throw ConfigError("g factor must be nonzero");
}

double GradientSpec::zeeman_slope() const {
  if (B0 != 0.0) return omega0 / B0;
  // hbar omega0 = -g mu_B B0 m_j with |m_j| = 1/2
  return -g_factor * constants::bohr_magneton / (2.0 * constants::hbar);
}

double laser_lamb_dicke(const GradientSpec& spec) {
  spec.validate();
  const double k = 2.0 * std::numbers::pi / spec.wavelength;
  return k * ground_state_extent(spec) * std::cos(spec.angle_theta);
}

double gradient_from_eta(const GradientSpec& spec) {
  const double eta = laser_lamb_dicke(spec);
  return eta * spec.trap_freq / (ground_state_extent(spec) * spec.zeeman_slope());
}

double eta_from_gradient(const GradientSpec& spec) {
  spec.validate();
  return ground_state_extent(spec) * spec.zeeman_slope() / spec.trap_freq * spec.dB_dx;
}

}  // namespace mgcool::model
