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
#include <vector>

namespace fluxbound {

/// Face positions on [lo, hi] containing every forced point, with local cell
/// size close to spacing(x). Faces between consecutive forced points are
/// equidistributed in the metric dx / spacing(x).
std::vector<double> graded_faces(double lo, double hi, std::vector<double> forced,
                                 const std::function<double(double)>& spacing);

/// Tensor mesh in (r, theta) for axisymmetric fields in R^d: r is |x| and
/// theta the angle to the symmetry axis. Each cell is a solid of revolution;
/// its measure carries the factor omega_{d-1} r^{d-1} sin^{d-2}(theta).
class PolarMesh {
 public:
  PolarMesh(int dimension, std::vector<double> radial_faces, std::vector<double> polar_faces);

  int dimension() const { return dim_; }
  int radial_cells() const { return static_cast<int>(r_.size()) - 1; }
  int polar_cells() const { return static_cast<int>(t_.size()) - 1; }
  int index(int i, int j) const { return i * polar_cells() + j; }

  const std::vector<double>& radial_faces() const { return r_; }
  const std::vector<double>& polar_faces() const { return t_; }
  double r_center(int i) const { return 0.5 * (r_[i] + r_[i + 1]); }
  double theta_center(int j) const { return 0.5 * (t_[j] + t_[j + 1]); }

  /// Number of radial cells below the face at radius `radius` (which must be a face).
  int radial_prefix(double radius) const;

  /// Cell containing (r, theta); radial index may equal radial_cells() when r is beyond the mesh.
  std::pair<int, int> locate(double r, double theta) const;

  double volume(int i, int j) const;
  /// Area of the radial face at r_faces[i] restricted to polar cell j.
  double radial_face_area(int i, int j) const;
  /// omega_{d-1} sin^{d-2}(t_j) times the integral of r^{d-3} over radial cell i:
  /// multiplied by 1/(r dtheta) gradients this gives the flux through polar face j.
  double polar_face_factor(int i, int j) const;

 private:
  int dim_;
  std::vector<double> r_;
  std::vector<double> t_;
  std::vector<double> polar_measure_;   // integral of sin^{d-2} over each polar cell
  std::vector<double> polar_face_sin_;  // sin^{d-2} at each polar face
  double azimuth_measure_;              // omega_{d-1}
};

/// Integral of sin^k over [a, b].
double sine_power_integral(int k, double a, double b);

}  // namespace fluxbound
