#include "nsch/linear_solver.hpp"

#include <cmath>

#include <Eigen/SparseLU>
#ifdef NSCH_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

namespace nsch {

const char* linear_solver_backend() {
#ifdef NSCH_HAVE_UMFPACK
  return "umfpack";
#else
  return "eigen-sparselu";
#endif
}

LinearSolveInfo solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  LinearSolveInfo info;
  const Eigen::Index n = A.rows();
  if (A.cols() != n || b.size() != n) throw ContractViolation("linear system dimensions do not match");

  // Row then column scaling to unit max-norm.
  Eigen::VectorXd dr = Eigen::VectorXd::Zero(n), dc = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) dr[r] = std::max(dr[r], std::abs(it.value()));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dr[i] > 0.0) || !std::isfinite(dr[i])) {
      info.message = "zero or non-finite row " + std::to_string(i);
      return info;
    }
    dr[i] = 1.0 / dr[i];
  }
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it)
      dc[it.col()] = std::max(dc[it.col()], std::abs(it.value()) * dr[r]);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(dc[i] > 0.0)) {
      info.message = "zero column " + std::to_string(i);
      return info;
    }
    dc[i] = 1.0 / dc[i];
  }
  Eigen::SparseMatrix<double> S = A;  // column major copy
  for (int c = 0; c < S.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(S, c); it; ++it) it.valueRef() *= dr[it.row()] * dc[c];
  S.makeCompressed();
  const Eigen::VectorXd sb = dr.cwiseProduct(b);

#ifdef NSCH_HAVE_UMFPACK
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
#else
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
#endif
  lu.compute(S);
  if (lu.info() != Eigen::Success) {
    info.message = "sparse LU factorization failed (singular matrix?)";
    return info;
  }
  Eigen::VectorXd y = lu.solve(sb);
  if (lu.info() != Eigen::Success || !y.allFinite()) {
    info.message = "sparse LU solve failed";
    return info;
  }
  x = dc.cwiseProduct(y);
  const double bn = b.norm();
  info.relative_residual = (A * x - b).norm() / (bn > 0.0 ? bn : 1.0);
  info.ok = std::isfinite(info.relative_residual);
  if (!info.ok) info.message = "non-finite solution";
  return info;
}

}  // namespace nsch
