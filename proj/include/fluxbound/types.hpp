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

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace fluxbound {

inline constexpr int kMaxDim = 8;

/// A point or vector in R^d. Storage is inline (no heap) for d <= kMaxDim.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using SmallMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

inline Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

inline Point unit_vector(int dim, int axis) {
  Point p = Point::Zero(dim);
  p[axis] = 1.0;
  return p;
}

/// Raised when a precondition on problem data fails (bad radii, bad flux, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure cannot deliver its contract
/// (non-convergence, budget exhaustion, violated structural checks).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fluxbound
