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

#pragma once

#include <Eigen/Sparse>

#include <vector>

namespace fluxbound {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Checks symmetry and positive diagonal; throws NumericalFailure otherwise.
void check_symmetric(const SparseMatrix& a, double tol = 1e-13);

/// Conjugate gradients with an incomplete-Cholesky preconditioner. `x` is
/// the initial guess on entry. Throws NumericalFailure when the relative
/// residual does not reach `tol` within `max_iterations`.
SolveStats solve_spd(const SparseMatrix& a, const Vector& b, Vector& x, double tol = 1e-10,
                     int max_iterations = 20000);

/// Sparse LDL^T factorisation for many right-hand sides. Throws
/// NumericalFailure when a pivot is not positive (matrix not SPD).
class DirectSolver {
 public:
  explicit DirectSolver(const SparseMatrix& a);
  Vector solve(const Vector& b) const;

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

}  // namespace fluxbound
