#pragma once

#include <Eigen/Dense>

namespace nsch {

/// Univariate B-spline basis of degree k and regularity k-1 on a uniform
/// mesh of `elements` unit-length elements. Open axes use clamped knots
/// (elements + k functions); periodic axes wrap the last k functions onto
/// the first k (elements functions, needs elements >= k + 1).
class UniformBSpline {
public:
  UniformBSpline(int elements, int degree, bool periodic);

  int degree() const noexcept { return k_; }
  int elements() const noexcept { return n_; }
  bool periodic() const noexcept { return periodic_; }
  int num_functions() const noexcept { return periodic_ ? n_ : n_ + k_; }

  /// Global index of the l-th function (0..k) supported on element e.
  int function_index(int e, int l) const noexcept { return periodic_ ? (e + l) % n_ : e + l; }

  /// Rows d = 0..nders hold the d-th derivatives (per unit element length)
  /// of the k+1 functions supported on element e at local t in [0,1].
  /// At t = 0 or 1 these are the one-sided limits from inside e.
  Eigen::MatrixXd evaluate(int e, double t, int nders) const;

  /// Knot value with index i of the (extended) knot vector.
  double knot(int i) const;

private:
  int n_;
  int k_;
  bool periodic_;
};

}  // namespace nsch
