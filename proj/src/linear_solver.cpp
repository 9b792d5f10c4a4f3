/*
   Copyright 2026 The fluxbound Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "fluxbound/linear_solver.hpp"

#include "fluxbound/types.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <string>

namespace fluxbound {

void check_symmetric(const SparseMatrix& a, double tol) {
  if (a.rows() != a.cols()) throw NumericalFailure("system matrix is not square");
  const SparseMatrix t = a.transpose();
  const double scale = a.norm();
  if ((a - t).norm() > tol * scale) throw NumericalFailure("system matrix is not symmetric");
  for (int k = 0; k < a.rows(); ++k) {
    if (!(a.coeff(k, k) > 0.0)) {
      throw NumericalFailure("system matrix has a non-positive diagonal entry at row " +
                             std::to_string(k));
    }
  }
}

SolveStats solve_spd(const SparseMatrix& a, const Vector& b, Vector& x, double tol,
                     int max_iterations) {
  SolveStats stats;
  if (b.norm() == 0.0) {
    x.setZero(b.size());
    stats.converged = true;
    return stats;
  }
  if (x.size() != b.size()) x.setZero(b.size());
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>>>
      cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(max_iterations);
  cg.compute(a);
  if (cg.info() != Eigen::Success) throw NumericalFailure("incomplete Cholesky factorisation failed");
  x = cg.solveWithGuess(b, x);
  stats.iterations = static_cast<int>(cg.iterations());
  stats.relative_residual = (b - a * x).norm() / b.norm();
  stats.converged = stats.relative_residual <= 10.0 * tol;
  if (!stats.converged) {
    throw NumericalFailure("conjugate gradients did not converge: relative residual " +
                           std::to_string(stats.relative_residual) + " after " +
                           std::to_string(stats.iterations) + " iterations");
  }
  return stats;
}

DirectSolver::DirectSolver(const SparseMatrix& a) {
  ldlt_.compute(a);
  if (ldlt_.info() != Eigen::Success) throw NumericalFailure("LDL^T factorisation failed");
  if (!(ldlt_.vectorD().minCoeff() > 0.0)) {
    throw NumericalFailure("assembled matrix is not positive definite");
  }
}

Vector DirectSolver::solve(const Vector& b) const {
  Vector x = ldlt_.solve(b);
  if (ldlt_.info() != Eigen::Success) throw NumericalFailure("LDL^T solve failed");
  return x;
}

}  // namespace fluxbound
