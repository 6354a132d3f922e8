#include "nsch/newton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nsch/linear_solver.hpp"
#include "nsch/log.hpp"

namespace nsch {

namespace {

std::array<double, kNumFields> block_norms(const Eigen::VectorXd& v, int n) {
  std::array<double, kNumFields> out{};
  for (int f = 0; f < kNumFields; ++f) out[f] = v.segment(f * n, n).norm();
  return out;
}

// Magnitude of the terms summed into each residual block: |J| max(|x|, typical).
std::array<double, kNumFields> term_scale(const SparseMatrix& J, const Eigen::VectorXd& x, int n,
                                          const std::array<double, kNumFields>& typical) {
  Eigen::VectorXd ax(x.size());
  for (int i = 0; i < x.size(); ++i) ax[i] = std::max(std::abs(x[i]), typical[i / n]);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(J.rows());
  for (int r = 0; r < J.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(J, r); it; ++it) s[r] += std::abs(it.value()) * ax[it.col()];
  return block_norms(s, n);
}

}  // namespace

NewtonResult newton_solve(const Assembler& assembler, const Constraints& constraints, const FieldState& prev,
                          FieldState& state, const AssemblyOptions& opt, const NewtonOptions& nopt) {
  NewtonResult res;
  const int n = state.functions;
  FieldState x = state;
  constraints.apply(x.coeffs);
  std::array<double, kNumFields> first{};
  StabilizedSystem sys;

  auto zero_fixed = [&](Eigen::VectorXd& r) {
    for (int i = 0; i < r.size(); ++i)
      if (constraints.is_fixed(i)) r[i] = 0.0;
  };

  for (int it = 0;; ++it) {
    // After the first iterate the convergence test needs only the residual;
    // the term scale uses the previous Jacobian with the current iterate.
    const bool residual_only = it > 0;
    try {
      assembler.assemble(x, prev, opt, sys, !residual_only);
    } catch (const AssemblyError& e) {
      res.failure = e.what();
      return res;
    }
    if (residual_only)
      zero_fixed(sys.residual);
    else
      apply_constraints(sys, constraints);
    const auto norms = block_norms(sys.residual, n);
    res.residual_history.push_back(sys.residual.norm());
    res.final_block_norms = norms;
    if (it == 0) first = norms;
    if (!std::isfinite(res.residual_history.back())) {
      res.failure = "non-finite residual";
      return res;
    }

    const auto scale = term_scale(sys.jacobian, x.coeffs, n, nopt.typical);
    bool done = true;
    for (int f = 0; f < kNumFields; ++f) {
      const double tol = std::max(nopt.abs_tol * scale[f], it > 0 ? nopt.rel_tol * first[f] : 0.0);
      if (norms[f] > tol) done = false;
    }
    if (done) {
      res.converged = true;
      res.iterations = it;
      state = x;
      return res;
    }
    if (it >= nopt.max_iterations) {
      std::ostringstream m;
      m << "no convergence in " << nopt.max_iterations << " iterations, |r| = " << res.residual_history.back();
      res.failure = m.str();
      res.iterations = it;
      return res;
    }

    if (residual_only) {
      try {
        assembler.assemble(x, prev, opt, sys, true);
      } catch (const AssemblyError& e) {
        res.failure = e.what();
        return res;
      }
      apply_constraints(sys, constraints);
    }

    Eigen::VectorXd delta;
    const LinearSolveInfo li = solve_linear(sys.jacobian, -sys.residual, delta);
    if (!li.ok) {
      res.failure = "linear solve failed: " + li.message;
      res.iterations = it;
      return res;
    }
    res.worst_linear_residual = std::max(res.worst_linear_residual, li.relative_residual);
    if (li.relative_residual > nopt.linear_tol)
      log::warn("linear solve residual " + std::to_string(li.relative_residual) + " above tolerance");
    x.coeffs += delta;

    // Stagnation at rounding level: the update no longer changes the state.
    bool stagnant = it > 0;
    for (int f = 0; f < kNumFields && stagnant; ++f)
      stagnant = delta.segment(f * n, n).norm() <= 1e-14 * x.coeffs.segment(f * n, n).norm();
    if (stagnant) {
      log::debug("Newton update at rounding level; accepting the iterate");
      assembler.assemble(x, prev, opt, sys, false);
      zero_fixed(sys.residual);
      res.residual_history.push_back(sys.residual.norm());
      res.converged = true;
      res.iterations = it + 1;
      state = x;
      return res;
    }
  }
}

}  // namespace nsch
