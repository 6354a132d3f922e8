#include "nsch/bspline.hpp"

#include <algorithm>
#include <string>

#include "nsch/types.hpp"

namespace nsch {

UniformBSpline::UniformBSpline(int elements, int degree, bool periodic)
    : n_(elements), k_(degree), periodic_(periodic) {
  if (degree < 1) throw ConfigError("spline degree must be at least 1");
  if (elements < 1) throw ConfigError("spline axis needs at least one element");
  if (periodic && elements < degree + 1)
    throw ConfigError("periodic spline axis needs at least degree + 1 = " + std::to_string(degree + 1) +
                      " elements");
}

double UniformBSpline::knot(int i) const {
  if (periodic_) return double(i - k_);
  return double(std::clamp(i - k_, 0, n_));
}

Eigen::MatrixXd UniformBSpline::evaluate(int e, double t, int nders) const {
  if (e < 0 || e >= n_) throw ContractViolation("element index out of range");
  if (nders < 0 || nders > k_) throw ContractViolation("derivative order exceeds the spline degree");
  const int p = k_;
  const int span = e + p;
  const double x = double(e) + t;

  // Derivatives of the nonzero basis functions on one knot span, following
  // the classical triangular Cox-de Boor table.
  Eigen::MatrixXd ndu(p + 1, p + 1);
  Eigen::VectorXd left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knot(span + 1 - j);
    right[j] = knot(span + j) - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  Eigen::MatrixXd ders = Eigen::MatrixXd::Zero(nders + 1, p + 1);
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu(j, p);
  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int kk = 1; kk <= nders; ++kk) {
      double d = 0.0;
      const int rk = r - kk, pk = p - kk;
      if (r >= kk) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? kk - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, kk) = -a(s1, kk - 1) / ndu(pk + 1, r);
        d += a(s2, kk) * ndu(r, pk);
      }
      ders(kk, r) = d;
      std::swap(s1, s2);
    }
  }
  int factor = p;
  for (int kk = 1; kk <= nders; ++kk) {
    ders.row(kk) *= factor;
    factor *= (p - kk);
  }
  return ders;
}

}  // namespace nsch
