#include "nsch/physics.hpp"

#include <cmath>
#include <limits>

namespace nsch {

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

double sigma_from_sigma12(double sigma12) noexcept { return 3.0 * sigma12 / (2.0 * kSqrt2); }
double sigma12_from_sigma(double sigma) noexcept { return 2.0 * kSqrt2 * sigma / 3.0; }

double double_well(double phi) noexcept {
  const double a = phi * phi - 1.0;
  return 0.25 * a * a;
}
double double_well_slope(double phi) noexcept { return phi * phi * phi - phi; }
double double_well_curvature(double phi) noexcept { return 3.0 * phi * phi - 1.0; }

ModelParams::ModelParams(const Values& v) : v_(v) {
  if (!(v.rho2 > 0.0) || !(v.rho1 >= v.rho2))
    throw ConfigError("model: densities must satisfy rho1 >= rho2 > 0");
  if (!(v.eta1 > 0.0) || !(v.eta2 > 0.0)) throw ConfigError("model: viscosities eta1, eta2 must be positive");
  if (!(v.sigma12 > 0.0)) throw ConfigError("model: surface tension sigma12 must be positive");
  if (!(v.epsilon > 0.0)) throw ConfigError("model: interface thickness epsilon must be positive");
  if (!(v.mobility > 0.0)) throw ConfigError("model: mobility must be positive");
  if (!(v.alpha_gn > 0.0)) throw ConfigError("model: alpha_gn must be positive");
  if (v.sigma_s1 < 0.0 || v.sigma_s2 < 0.0)
    throw ConfigError("model: solid-fluid surface tensions sigma_s1, sigma_s2 must be nonnegative");
  if (v.volume_ratio != 1.0) throw ConfigError("model: only volume_ratio = 1 is supported");
  sigma_ = sigma_from_sigma12(v.sigma12);
  lambda_ = matched_density() ? std::numeric_limits<double>::infinity() : v.rho2 / (v.rho1 - v.rho2);
}

// Five-branch C1 extension: linear on [-1-l, 1+l], quadratic blends on the
// next interval of width l, then constant plateaus 1/4 rho2 and rho1 + 3/4 rho2.
double ModelParams::density(double phi) const noexcept {
  const double r1 = v_.rho1, r2 = v_.rho2, l = lambda_;
  if (matched_density()) return r1;
  if (phi <= -1.0 - 2.0 * l) return 0.25 * r2;
  if (phi < -1.0 - l) {
    const double s = 1.0 + 2.0 * l + phi;
    return 0.25 * r2 + 0.25 * r2 * s * s / (l * l);
  }
  if (phi <= 1.0 + l) return 0.5 * (1.0 + phi) * r1 + 0.5 * (1.0 - phi) * r2;
  if (phi < 1.0 + 2.0 * l) {
    const double s = 1.0 + 2.0 * l - phi;
    return r1 + 0.75 * r2 - 0.25 * r2 * s * s / (l * l);
  }
  return r1 + 0.75 * r2;
}

double ModelParams::density_slope(double phi) const noexcept {
  const double r1 = v_.rho1, r2 = v_.rho2, l = lambda_;
  if (matched_density()) return 0.0;
  if (phi <= -1.0 - 2.0 * l) return 0.0;
  if (phi < -1.0 - l) return 0.5 * r2 * (1.0 + 2.0 * l + phi) / (l * l);
  if (phi <= 1.0 + l) return 0.5 * (r1 - r2);
  if (phi < 1.0 + 2.0 * l) return 0.5 * r2 * (1.0 + 2.0 * l - phi) / (l * l);
  return 0.0;
}

double ModelParams::density_curvature(double phi) const noexcept {
  const double r2 = v_.rho2, l = lambda_;
  if (matched_density()) return 0.0;
  if (phi <= -1.0 - 2.0 * l) return 0.0;
  if (phi < -1.0 - l) return 0.5 * r2 / (l * l);
  if (phi <= 1.0 + l) return 0.0;
  if (phi < 1.0 + 2.0 * l) return -0.5 * r2 / (l * l);
  return 0.0;
}

double ModelParams::viscosity(double phi) const noexcept {
  return std::exp(0.5 * ((1.0 + phi) * std::log(v_.eta1) + (1.0 - phi) * std::log(v_.eta2)));
}

double ModelParams::viscosity_slope(double phi) const noexcept {
  return viscosity(phi) * 0.5 * (std::log(v_.eta1) - std::log(v_.eta2));
}

double ModelParams::solid_fluid_tension(double phi) const noexcept {
  const double d = v_.sigma_s2 - v_.sigma_s1;
  return 0.25 * (phi * phi * phi - 3.0 * phi) * d + 0.5 * (v_.sigma_s1 + v_.sigma_s2);
}

double ModelParams::solid_fluid_tension_slope(double phi) const noexcept {
  return 0.75 * (phi * phi - 1.0) * (v_.sigma_s2 - v_.sigma_s1);
}

double ModelParams::solid_fluid_tension_curvature(double phi) const noexcept {
  return 1.5 * phi * (v_.sigma_s2 - v_.sigma_s1);
}

double ModelParams::mass_flux_coefficient() const noexcept {
  return 0.5 * (v_.rho1 - v_.rho2) * v_.mobility;
}

Vec2 ModelParams::mass_flux(const Vec2& grad_mu) const noexcept {
  return -mass_flux_coefficient() * grad_mu;
}

double ModelParams::mixture_energy_density(double phi, const Vec2& grad_phi) const noexcept {
  return 0.5 * sigma_ * v_.epsilon * grad_phi.squaredNorm() + sigma_ / v_.epsilon * double_well(phi);
}

void StabParams::validate() const {
  if (!(beta > 0.0)) throw ConfigError("stabilization: Nitsche parameter must be positive");
  if (!(gamma_skeleton > 0.0)) throw ConfigError("stabilization: skeleton penalty must be positive");
  if (!(gamma_ghost > 0.0)) throw ConfigError("stabilization: ghost penalty must be positive");
}

}  // namespace nsch
