#pragma once

#include <string>

#include "nsch/assembler.hpp"

namespace nsch {

struct LinearSolveInfo {
  bool ok = false;
  double relative_residual = 0.0;  // |A x - b| / |b| on the unscaled system
  std::string message;
};

/// Name of the sparse LU backend compiled in.
const char* linear_solver_backend();

/// Direct sparse LU solve of A x = b after row/column equilibration.
LinearSolveInfo solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b, Eigen::VectorXd& x);

}  // namespace nsch
