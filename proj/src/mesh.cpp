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

#include "fluxbound/mesh.hpp"

#include "fluxbound/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fluxbound {

std::vector<double> graded_faces(double lo, double hi, std::vector<double> forced,
                                 const std::function<double(double)>& spacing) {
  if (!(hi > lo)) throw InvalidInput("graded_faces: empty interval");
  forced.push_back(lo);
  forced.push_back(hi);
  std::erase_if(forced, [&](double x) { return x < lo || x > hi || !std::isfinite(x); });
  std::sort(forced.begin(), forced.end());
  const double merge = 1e-12 * (hi - lo);
  forced.erase(std::unique(forced.begin(), forced.end(),
                           [merge](double a, double b) { return b - a <= merge; }),
               forced.end());
  forced.back() = hi;

  std::vector<double> faces{forced.front()};
  std::vector<double> xs;
  std::vector<double> phi;
  for (std::size_t k = 0; k + 1 < forced.size(); ++k) {
    const double a = forced[k];
    const double b = forced[k + 1];
    // Tabulate phi(x) = integral of 1/spacing from a to x.
    xs.assign(1, a);
    phi.assign(1, 0.0);
    double x = a;
    double inv = 1.0 / spacing(a);
    while (x < b) {
      const double step = std::min(0.05 / inv, b - x);
      const double xn = (b - x - step <= 1e-14 * (b - a)) ? b : x + step;
      const double invn = 1.0 / spacing(xn);
      phi.push_back(phi.back() + 0.5 * (inv + invn) * (xn - x));
      xs.push_back(xn);
      x = xn;
      inv = invn;
    }
    const double total = phi.back();
    const int m = std::max(1, static_cast<int>(std::ceil(total - 1e-9)));
    std::size_t p = 0;
    for (int l = 1; l < m; ++l) {
      const double target = total * l / m;
      while (phi[p + 1] < target) ++p;
      const double f = (target - phi[p]) / (phi[p + 1] - phi[p]);
      faces.push_back(xs[p] + f * (xs[p + 1] - xs[p]));
    }
    faces.push_back(b);
  }
  return faces;
}

double sine_power_integral(int k, double a, double b) {
  if (k == 0) return b - a;
  if (k == 1) return std::cos(a) - std::cos(b);
  // I_k = [-sin^{k-1} cos]/k + (k-1)/k I_{k-2}
  auto boundary = [k](double t) { return -std::pow(std::sin(t), k - 1) * std::cos(t) / k; };
  return boundary(b) - boundary(a) + (k - 1.0) / k * sine_power_integral(k - 2, a, b);
}

PolarMesh::PolarMesh(int dimension, std::vector<double> radial_faces, std::vector<double> polar_faces)
    : dim_(dimension), r_(std::move(radial_faces)), t_(std::move(polar_faces)) {
  if (dim_ < 3) throw InvalidInput("PolarMesh: dimension must be >= 3");
  if (r_.size() < 2 || t_.size() < 2 || r_.front() < 0.0 || t_.front() != 0.0 ||
      std::abs(t_.back() - std::numbers::pi) > 1e-12) {
    throw InvalidInput("PolarMesh: faces must start at r >= 0 and span theta in [0, pi]");
  }
  t_.back() = std::numbers::pi;
  if (!std::is_sorted(r_.begin(), r_.end(), std::less_equal<>()) ||
      !std::is_sorted(t_.begin(), t_.end(), std::less_equal<>())) {
    throw InvalidInput("PolarMesh: faces must be strictly increasing");
  }
  azimuth_measure_ = closedform::unit_sphere_area_any(dim_ - 1);
  for (int j = 0; j + 1 < static_cast<int>(t_.size()); ++j) {
    polar_measure_.push_back(sine_power_integral(dim_ - 2, t_[j], t_[j + 1]));
  }
  for (double t : t_) polar_face_sin_.push_back(std::pow(std::sin(t), dim_ - 2));
  polar_face_sin_.front() = 0.0;
  polar_face_sin_.back() = 0.0;
}

int PolarMesh::radial_prefix(double radius) const {
  auto it = std::lower_bound(r_.begin(), r_.end(), radius * (1.0 - 1e-12));
  if (it == r_.end() || std::abs(*it - radius) > 1e-9 * std::max(1.0, radius)) {
    throw InvalidInput("PolarMesh: radius " + std::to_string(radius) + " is not a mesh face");
  }
  return static_cast<int>(it - r_.begin());
}

std::pair<int, int> PolarMesh::locate(double r, double theta) const {
  int i = static_cast<int>(std::upper_bound(r_.begin(), r_.end(), r) - r_.begin()) - 1;
  i = std::clamp(i, 0, radial_cells());
  int j = static_cast<int>(std::upper_bound(t_.begin(), t_.end(), theta) - t_.begin()) - 1;
  j = std::clamp(j, 0, polar_cells() - 1);
  return {i, j};
}

double PolarMesh::volume(int i, int j) const {
  const double radial = (std::pow(r_[i + 1], dim_) - std::pow(r_[i], dim_)) / dim_;
  return azimuth_measure_ * radial * polar_measure_[j];
}

double PolarMesh::radial_face_area(int i, int j) const {
  return azimuth_measure_ * std::pow(r_[i], dim_ - 1) * polar_measure_[j];
}

double PolarMesh::polar_face_factor(int i, int j) const {
  double radial;
  if (dim_ == 3) {
    radial = r_[i + 1] - r_[i];
  } else {
    radial = (std::pow(r_[i + 1], dim_ - 2) - std::pow(r_[i], dim_ - 2)) / (dim_ - 2);
  }
  return azimuth_measure_ * polar_face_sin_[j] * radial;
}

}  // namespace fluxbound
