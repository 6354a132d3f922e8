#pragma once

#include <array>
#include <string>
#include <vector>

#include "nsch/assembler.hpp"
#include "nsch/constraints.hpp"

namespace nsch {

struct NewtonOptions {
  double rel_tol = 1e-8;   // per field block, relative to the first iterate
  /// Per field block, relative to the magnitude |J||U| of the terms that
  /// make up the block, so the test does not depend on units.
  double abs_tol = 1e-12;
  /// Typical magnitude of each field. |U| in the term scale is floored by
  /// it, so a block whose terms vanish at the current state (pressure rows
  /// of a fluid at rest) still gets a rounding-level tolerance. Zero
  /// disables the floor.
  std::array<double, kNumFields> typical{};
  int max_iterations = 20;
  double linear_tol = 1e-10;  // accepted |J d + r| / |r|; worse solves are logged
};

struct NewtonResult {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;  // global 2-norm per assembled iterate
  std::array<double, kNumFields> final_block_norms{};
  double worst_linear_residual = 0.0;
  std::string failure;
};

/// Newton iteration for one implicit step. `state` holds the initial guess
/// (constraint values are imposed first) and is replaced by the solution
/// only on convergence.
NewtonResult newton_solve(const Assembler& assembler, const Constraints& constraints, const FieldState& prev,
                          FieldState& state, const AssemblyOptions& opt, const NewtonOptions& nopt = {});

}  // namespace nsch
