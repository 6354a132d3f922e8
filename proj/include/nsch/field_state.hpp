#pragma once

#include <array>

#include <Eigen/Dense>

#include "nsch/types.hpp"

namespace nsch {

enum Field : int { Ux = 0, Uy = 1, P = 2, Phi = 3, Mu = 4 };
inline constexpr int kNumFields = 5;
inline constexpr std::array<const char*, kNumFields> kFieldNames = {"u_x", "u_y", "p", "phi", "mu"};

/// Coefficients of (u_x, u_y, p, phi, mu) over the active spline functions,
/// blocked per field, at time t.
struct FieldState {
  int functions = 0;
  Eigen::VectorXd coeffs;
  double t = 0.0;

  FieldState() = default;
  FieldState(int n, double time) : functions(n), coeffs(Eigen::VectorXd::Zero(kNumFields * n)), t(time) {}

  int size() const { return kNumFields * functions; }
  int dof(Field f, int fn) const { return f * functions + fn; }
  auto field(Field f) { return coeffs.segment(f * functions, functions); }
  auto field(Field f) const { return coeffs.segment(f * functions, functions); }
};

}  // namespace nsch
