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

#include "fluxbound/types.hpp"

#include <functional>
#include <span>
#include <string>

namespace fluxbound {

/// Symmetric operator L = e^{-Q} div(e^{Q} a grad) = div(a grad) + a grad(Q) . grad.
/// The Laplacian is the case a = I, Q = 0. Outside free_radius() the operator
/// is exactly the Laplacian (a = I, Q constant).
class OperatorSpec {
 public:
  using MatrixField = std::function<SmallMatrix(const Point&)>;
  using ScalarField = std::function<double(const Point&)>;
  using VectorField = std::function<Point(const Point&)>;

  OperatorSpec() = default;
  /// Null fields mean a = I, Q = 0, grad Q = 0 respectively. A null gradient
  /// with a non-null Q is filled in by central differences.
  OperatorSpec(std::string name, int dimension, MatrixField a, ScalarField q, VectorField grad_q,
               double free_radius, double length_scale);

  static OperatorSpec laplacian(int d);
  /// Q(x) = shift + amplitude exp(-|x|^2 / width^2), a = I.
  static OperatorSpec q_bump(int d, double amplitude, double width, double shift = 0.0);
  /// a(x) = (1 + beta exp(-|x|^2 / width^2)) I together with the Q bump above.
  static OperatorSpec isotropic_bump(int d, double beta, double width, double q_amplitude);

  const std::string& name() const { return name_; }
  int dimension() const { return dim_; }
  bool is_laplacian() const { return !a_ && !q_; }
  bool has_constant_diffusion() const { return !a_; }

  SmallMatrix diffusion(const Point& x) const;
  /// Lower Cholesky factor sigma with sigma sigma^T = a(x).
  SmallMatrix diffusion_sqrt(const Point& x) const;
  double weight_exponent(const Point& x) const;
  Point weight_gradient(const Point& x) const;
  /// (div a)_i = sum_j d_j a_ij, by central differences.
  Point diffusion_divergence(const Point& x) const;
  /// Drift of the diffusion generated by L: div a + a grad Q.
  Point drift(const Point& x) const;
  /// First-order coefficient b in the convention L = a_ij d_ij - b . grad, i.e. -drift.
  Point first_order_coefficient(const Point& x) const;

  double free_radius() const { return free_radius_; }
  double length_scale() const { return length_scale_; }

  /// Same operator with Q replaced by Q + c. L itself is unchanged.
  OperatorSpec shifted(double c) const;

  /// Smallest and largest eigenvalue of a over the samples.
  std::pair<double, double> ellipticity(std::span<const Point> samples) const;

  /// |e^{-Q} div(e^Q a grad f) - (a : D^2 f + drift . grad f)| at x for the
  /// quadratic f(y) = c . y + y^T M y, with the left side by nested central differences.
  double drift_identity_residual(const Point& x, const Point& c, const SmallMatrix& m,
                                 double h) const;

 private:
  std::string name_ = "laplacian";
  int dim_ = 3;
  MatrixField a_;
  ScalarField q_;
  VectorField grad_q_;
  double free_radius_ = 0.0;
  double length_scale_ = 1.0;
  double shift_ = 0.0;
};

}  // namespace fluxbound
