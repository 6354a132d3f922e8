#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "nsch/field_state.hpp"
#include "nsch/spline_space.hpp"

namespace nsch {

/// Prescribed traces on conforming inflow facets, as functions of the
/// physical position and time.
struct BoundaryData {
  std::function<Vec2(const Vec2& x, double t)> inflow_velocity;
  std::function<double(const Vec2& x)> inflow_phase;
};

/// Strongly imposed dof values. Periodicity is built into the spline space
/// (wrapped functions share one index), so it needs no entries here.
struct Constraints {
  int functions = 0;
  std::vector<char> fixed;  // per global dof
  Eigen::VectorXd values;   // prescribed values (0 for free dofs)
  std::optional<int> pressure_pin;

  int num_fixed() const;
  bool is_fixed(int dof) const { return fixed[dof] != 0; }
  /// Overwrites the fixed entries of a coefficient vector.
  void apply(Eigen::VectorXd& coeffs) const;
};

/// Inflow facets: u and phi fixed by L2 projection of the data onto the
/// boundary-adjacent function layer. Symmetric facets: the velocity
/// component along the facet normal is fixed to zero. A pressure dof is
/// pinned when no outflow facet exists.
Constraints build_constraints(const SplineSpace& space, const BoundaryData& data, double t);

/// Compact indices of the functions with nonzero trace on one side of the
/// ambient box, paired with the index of the function along that side.
std::vector<std::pair<int, int>> side_trace_functions(const SplineSpace& space, Side side);

}  // namespace nsch
