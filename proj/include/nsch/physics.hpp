#pragma once

#include "nsch/types.hpp"

namespace nsch {

/// Constitutive parameters of the binary-fluid model. The surface tension
/// coefficient sigma is stored; the physical fluid-fluid tension
/// sigma12 = (2 sqrt 2 / 3) sigma is derived. Densities may coincide
/// (matched-density benchmarks), in which case rho(phi) is constant.
class ModelParams {
public:
  struct Values {
    double rho1 = 1000.0;          // kg/m^3
    double rho2 = 1.3;             // kg/m^3
    double eta1 = 1.0e-3;          // Pa s
    double eta2 = 1.813e-5;        // Pa s
    double sigma12 = 72.8e-3;      // N/m
    double epsilon = 0.78125e-6;   // m
    double mobility = 3.0487e-10;  // m s^2 / kg
    double alpha_gn = 100.0;       // Pa s / m
    double sigma_s1 = 0.0;         // N/m
    double sigma_s2 = 0.0;         // N/m
    double volume_ratio = 1.0;     // Lambda; only 1 is supported
    Vec2 body_force = Vec2::Zero();  // N/m^3
  };

  ModelParams() : ModelParams(Values{}) {}
  explicit ModelParams(const Values& v);

  const Values& values() const noexcept { return v_; }

  double rho1() const noexcept { return v_.rho1; }
  double rho2() const noexcept { return v_.rho2; }
  double eta1() const noexcept { return v_.eta1; }
  double eta2() const noexcept { return v_.eta2; }
  double sigma12() const noexcept { return v_.sigma12; }
  double sigma() const noexcept { return sigma_; }
  double epsilon() const noexcept { return v_.epsilon; }
  double mobility() const noexcept { return v_.mobility; }
  double alpha_gn() const noexcept { return v_.alpha_gn; }
  double sigma_s1() const noexcept { return v_.sigma_s1; }
  double sigma_s2() const noexcept { return v_.sigma_s2; }
  const Vec2& body_force() const noexcept { return v_.body_force; }
  bool neutral_wetting() const noexcept { return v_.sigma_s1 == v_.sigma_s2; }
  bool matched_density() const noexcept { return v_.rho1 == v_.rho2; }

  /// rho2 / (rho1 - rho2); +inf for matched densities.
  double lambda_ext() const noexcept { return lambda_; }

  double density(double phi) const noexcept;
  double density_slope(double phi) const noexcept;
  double density_curvature(double phi) const noexcept;

  double viscosity(double phi) const noexcept;
  double viscosity_slope(double phi) const noexcept;

  double solid_fluid_tension(double phi) const noexcept;
  double solid_fluid_tension_slope(double phi) const noexcept;
  double solid_fluid_tension_curvature(double phi) const noexcept;

  /// Relative mass flux J = -((rho1 - rho2)/2) m grad(mu).
  Vec2 mass_flux(const Vec2& grad_mu) const noexcept;
  /// Scalar c such that J = -c grad(mu).
  double mass_flux_coefficient() const noexcept;

  double mixture_energy_density(double phi, const Vec2& grad_phi) const noexcept;

private:
  Values v_;
  double sigma_;
  double lambda_;
};

/// sigma12 = (2 sqrt 2 / 3) sigma.
double sigma_from_sigma12(double sigma12) noexcept;
double sigma12_from_sigma(double sigma) noexcept;

double double_well(double phi) noexcept;
double double_well_slope(double phi) noexcept;
double double_well_curvature(double phi) noexcept;

struct StabParams {
  double beta = 100.0;
  double gamma_skeleton = 0.01;
  double gamma_ghost = 0.01;

  void validate() const;
};

}  // namespace nsch
