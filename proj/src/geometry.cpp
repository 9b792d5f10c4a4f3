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

#include "fluxbound/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fluxbound {

namespace {

constexpr double kPi = std::numbers::pi;

// Orthonormal vectors completing `axis` to a basis of R^d.
std::vector<Point> complement_basis(const Point& axis) {
  const int d = static_cast<int>(axis.size());
  std::vector<Point> basis{axis};
  for (int k = 0; k < d && static_cast<int>(basis.size()) < d; ++k) {
    Point v = unit_vector(d, k);
    for (const Point& b : basis) v -= v.dot(b) * b;
    const double n = v.norm();
    if (n > 1e-8) basis.push_back(v / n);
  }
  basis.erase(basis.begin());
  return basis;
}

struct WeightedDirection {
  Point u;
  double w;
};

// Product rule on the unit sphere of the subspace spanned by `basis`
// (basis.size() - 1 is the sphere dimension). The first polar angle is
// restricted to [theta_min, pi].
std::vector<WeightedDirection> sphere_rule(std::span<const Point> basis, double theta_min,
                                           const QuadratureSpec& q) {
  std::vector<WeightedDirection> out;
  if (basis.size() == 2) {
    const int n = q.azimuth_nodes;
    for (int k = 0; k < n; ++k) {
      const double phi = 2.0 * kPi * (k + 0.5) / n;
      out.push_back({std::cos(phi) * basis[0] + std::sin(phi) * basis[1], 2.0 * kPi / n});
    }
    return out;
  }
  const int sub_sphere_dim = static_cast<int>(basis.size()) - 2;
  std::vector<double> th, wt;
  gauss_legendre(q.polar_nodes, theta_min, kPi, th, wt);
  const auto sub = sphere_rule(basis.subspan(1), 0.0, q);
  out.reserve(th.size() * sub.size());
  for (std::size_t i = 0; i < th.size(); ++i) {
    const double s = std::sin(th[i]);
    const double c = std::cos(th[i]);
    const double jac = wt[i] * std::pow(s, sub_sphere_dim);
    for (const auto& sd : sub) {
      out.push_back({Point(c * basis[0] + s * sd.u), jac * sd.w});
    }
  }
  return out;
}

}  // namespace

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (n < 1) throw InvalidInput("gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[i] = mid - half * z;
    nodes[n - 1 - i] = mid + half * z;
    weights[i] = weights[n - 1 - i] = 2.0 * half / ((1.0 - z * z) * dp * dp);
  }
}

Domain::Domain(Shape shape, int dimension, double bounding_radius, Point axis,
               QuadratureSpec quadrature)
    : shape_(std::move(shape)),
      dim_(dimension),
      bounding_radius_(bounding_radius),
      axis_(std::move(axis)),
      quadrature_(quadrature) {
  if (dim_ < 3 || dim_ > kMaxDim) throw InvalidInput("dimension must be in [3, 8]");
  if (axis_.size() != dim_) throw InvalidInput("axis dimension mismatch");
  const double an = axis_.norm();
  if (!(an > 0.0)) throw InvalidInput("axis must be non-zero");
  axis_ /= an;
  meridian_ = complement_basis(axis_).front();
  if (quadrature_.polar_nodes < 2 || quadrature_.azimuth_nodes < 3 ||
      quadrature_.channel_axial_nodes < 1) {
    throw InvalidInput("quadrature resolution too small");
  }
  if (outer_extent() >= bounding_radius_) {
    // D is open, so a ball touching the bounding sphere is still inside B_R.
    if (outer_extent() > bounding_radius_ * (1.0 + 1e-12)) {
      throw InvalidInput("obstacle does not fit inside the bounding ball B_R");
    }
  }
  build_quadrature();
}

double Domain::outer_extent() const {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallShape>) {
          return s.radius;
        } else {
          return s.outer;
        }
      },
      shape_);
}

int Domain::active_faces(const Point& x, double* v) const {
  const double r = x.norm();
  return std::visit(
      [&](const auto& s) -> int {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallShape>) {
          v[0] = r - s.radius;
          return 1;
        } else if constexpr (std::is_same_v<T, ShellShape>) {
          v[0] = s.inner - r;
          v[1] = r - s.outer;
          return 2;
        } else {
          const double along = x.dot(axis_);
          const double ray_dist = along >= 0.0 ? (x - along * axis_).norm() : r;
          v[0] = s.inner - r;
          v[1] = r - s.outer;
          v[2] = s.channel_radius - ray_dist;
          return 3;
        }
      },
      shape_);
}

double Domain::signed_distance(const Point& x) const {
  double v[3];
  const int n = active_faces(x, v);
  return *std::max_element(v, v + n);
}

double Domain::signed_distance_polar(double r, double theta) const {
  return signed_distance(from_polar(r, theta));
}

std::pair<double, double> Domain::to_polar(const Point& x) const {
  const double along = x.dot(axis_);
  const double perp = (x - along * axis_).norm();
  return {std::hypot(along, perp), std::atan2(perp, along)};
}

Point Domain::from_polar(double r, double theta) const {
  return r * (std::cos(theta) * axis_ + std::sin(theta) * meridian_);
}

Point Domain::inward_normal(const Point& y) const {
  const double sd = signed_distance(y);
  const double tol = 1e-6 * bounding_radius_;
  if (std::abs(sd) > tol) {
    throw InvalidInput("inward_normal: point is not on the boundary (|signed distance| = " +
                       std::to_string(std::abs(sd)) + ")");
  }
  return signed_distance_gradient(y);
}

Point Domain::signed_distance_gradient(const Point& y) const {
  double v[3];
  const int n = active_faces(y, v);
  const int face = static_cast<int>(std::max_element(v, v + n) - v);
  const double r = y.norm();
  if (!(r > 0.0)) throw InvalidInput("signed distance gradient undefined at the origin");
  Point radial = y / r;
  switch (face) {
    case 0:
      return std::holds_alternative<BallShape>(shape_) ? radial : Point(-radial);
    case 1:
      return radial;
    default: {
      const double along = y.dot(axis_);
      if (along < 0.0) return -radial;
      Point perp = y - along * axis_;
      const double pn = perp.norm();
      if (!(pn > 0.0)) throw InvalidInput("signed distance gradient undefined on the channel axis");
      return -perp / pn;
    }
  }
}

bool Domain::is_edge(const Point& y, double tol) const {
  double v[3];
  const int n = active_faces(y, v);
  std::sort(v, v + n);
  return n >= 2 && std::abs(v[n - 1] - v[n - 2]) <= tol * bounding_radius_;
}

void Domain::build_quadrature() {
  nodes_.clear();
  std::vector<Point> basis{axis_};
  for (Point& b : complement_basis(axis_)) basis.push_back(std::move(b));

  auto add_sphere = [&](double radius, double theta_min, bool facing_out) {
    const auto rule = sphere_rule(basis, theta_min, quadrature_);
    const double scale = std::pow(radius, dim_ - 1);
    for (const auto& wd : rule) {
      nodes_.push_back({radius * wd.u, facing_out ? wd.u : Point(-wd.u), scale * wd.w});
    }
  };

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallShape>) {
          add_sphere(s.radius, 0.0, true);
        } else if constexpr (std::is_same_v<T, ShellShape>) {
          add_sphere(s.inner, 0.0, false);
          add_sphere(s.outer, 0.0, true);
        } else {
          const double eps = s.channel_radius;
          add_sphere(s.inner, std::asin(eps / s.inner), false);
          add_sphere(s.outer, std::asin(eps / s.outer), true);
          // Channel wall: cylinder of radius eps between the two spheres.
          const double t0 = std::sqrt(s.inner * s.inner - eps * eps);
          const double t1 = std::sqrt(s.outer * s.outer - eps * eps);
          std::vector<double> ts, wts;
          gauss_legendre(quadrature_.channel_axial_nodes, t0, t1, ts, wts);
          const int na = quadrature_.azimuth_nodes;
          for (std::size_t i = 0; i < ts.size(); ++i) {
            for (int k = 0; k < na; ++k) {
              const double phi = 2.0 * kPi * (k + 0.5) / na;
              Point radial = std::cos(phi) * basis[1] + std::sin(phi) * basis[2];
              nodes_.push_back({ts[i] * axis_ + eps * radial, -radial, eps * (2.0 * kPi / na) * wts[i]});
            }
          }
        }
      },
      shape_);
}

std::string Domain::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallShape>) {
          os << "ball(R1=" << s.radius << ")";
        } else if constexpr (std::is_same_v<T, ShellShape>) {
          os << "shell(R1=" << s.inner << ", R2=" << s.outer << ")";
        } else {
          os << "punctured_shell(R1=" << s.inner << ", R2=" << s.outer
             << ", eps=" << s.channel_radius << ")";
        }
      },
      shape_);
  os << " in d=" << dim_ << ", R=" << bounding_radius_;
  return os.str();
}

Domain make_ball(double radius, int d, double bounding_radius, QuadratureSpec q) {
  if (!(radius > 0.0)) throw InvalidInput("make_ball: radius must be positive");
  if (bounding_radius <= 0.0) bounding_radius = radius;
  return Domain(BallShape{radius}, d, bounding_radius, unit_vector(d, d - 1), q);
}

Domain make_shell(double inner, double outer, int d, double bounding_radius, QuadratureSpec q) {
  if (!(inner > 0.0) || !(outer > inner)) throw InvalidInput("make_shell: need 0 < R1 < R2");
  if (bounding_radius <= 0.0) bounding_radius = outer;
  return Domain(ShellShape{inner, outer}, d, bounding_radius, unit_vector(d, d - 1), q);
}

Domain make_punctured_shell(double inner, double outer, double channel_radius, const Point& axis,
                            double bounding_radius, int d, QuadratureSpec q) {
  if (d != 3) throw InvalidInput("make_punctured_shell: only d = 3 is supported");
  if (!(inner > 0.0) || !(outer > inner) || !(bounding_radius > outer)) {
    throw InvalidInput("make_punctured_shell: radii out of order (need 0 < R1 < R2 < R)");
  }
  if (!(channel_radius > 0.0) || !(channel_radius < inner)) {
    throw InvalidInput("make_punctured_shell: channel radius must satisfy 0 < eps < R1");
  }
  return Domain(PuncturedShellShape{inner, outer, channel_radius}, d, bounding_radius, axis, q);
}

double surface_measure(const Domain& dom) {
  double s = 0.0;
  for (const auto& n : dom.boundary()) s += n.weight;
  return s;
}

Point inward_normal(const Domain& dom, const Point& y) { return dom.inward_normal(y); }

bool exterior_connected(const Domain& dom, double resolution) {
  if (!(resolution > 0.0)) throw InvalidInput("exterior_connected: resolution must be positive");
  const double extent = 1.25 * dom.outer_extent();
  const int nr = static_cast<int>(std::ceil(extent / resolution));
  const int nt = static_cast<int>(std::ceil(kPi * extent / resolution));
  const double dr = extent / nr;
  const double dt = kPi / nt;
  std::vector<char> fluid(static_cast<std::size_t>(nr) * nt);
  std::vector<char> seen(fluid.size(), 0);
  auto id = [nt](int i, int j) { return static_cast<std::size_t>(i) * nt + j; };
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      fluid[id(i, j)] = dom.signed_distance_polar((i + 0.5) * dr, (j + 0.5) * dt) > 0.0;
    }
  }
  std::deque<std::pair<int, int>> queue;
  for (int j = 0; j < nt; ++j) {
    if (fluid[id(nr - 1, j)]) {
      seen[id(nr - 1, j)] = 1;
      queue.emplace_back(nr - 1, j);
    }
  }
  while (!queue.empty()) {
    auto [i, j] = queue.front();
    queue.pop_front();
    const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& c : nb) {
      if (c[0] < 0 || c[0] >= nr || c[1] < 0 || c[1] >= nt) continue;
      const auto k = id(c[0], c[1]);
      if (fluid[k] && !seen[k]) {
        seen[k] = 1;
        queue.emplace_back(c[0], c[1]);
      }
    }
  }
  for (std::size_t k = 0; k < fluid.size(); ++k) {
    if (fluid[k] && !seen[k]) return false;
  }
  return true;
}

void dump_boundary(const Domain& dom, std::ostream& out) {
  out.precision(17);
  for (const auto& n : dom.boundary()) {
    for (int k = 0; k < dom.dimension(); ++k) out << n.position[k] << ' ';
    for (int k = 0; k < dom.dimension(); ++k) out << n.normal[k] << ' ';
    out << n.weight << '\n';
  }
}

FluxSpec FluxSpec::uniform(double value) {
  return FluxSpec("uniform(" + std::to_string(value) + ")", [value](const Point&) { return value; });
}

FluxSpec FluxSpec::hemisphere(const Point& axis, double value) {
  Point a = axis.normalized();
  return FluxSpec("hemisphere(" + std::to_string(value) + ")",
                  [a, value](const Point& y) { return y.dot(a) > 0.0 ? value : 0.0; });
}

FluxSpec FluxSpec::scaled(double factor) const {
  auto inner = density_;
  return FluxSpec(name_ + "*" + std::to_string(factor),
                  [inner, factor](const Point& y) { return factor * inner(y); });
}

FluxSpec FluxSpec::plus(const FluxSpec& other, double a, double b) const {
  auto f = density_;
  auto g = other.density_;
  return FluxSpec(name_ + "+" + other.name_,
                  [f, g, a, b](const Point& y) { return a * f(y) + b * g(y); });
}

void FluxSpec::validate(const Domain& dom) const {
  if (!density_) throw InvalidInput("flux density is not set");
  bool positive = false;
  for (const auto& n : dom.boundary()) {
    const double h = density_(n.position);
    if (!std::isfinite(h) || h < 0.0) throw InvalidInput("flux density must be finite and >= 0");
    positive = positive || h > 0.0;
  }
  if (!positive) throw InvalidInput("flux density vanishes on every boundary node");
}

bool FluxSpec::is_zero_on(const Domain& dom) const {
  return std::all_of(dom.boundary().begin(), dom.boundary().end(),
                     [&](const BoundaryNode& n) { return density_(n.position) == 0.0; });
}

double total_flux(const Domain& dom, const FluxSpec& h) {
  double s = 0.0;
  for (const auto& n : dom.boundary()) s += h(n.position) * n.weight;
  return s;
}

double weighted_total_flux(const Domain& dom, const FluxSpec& h,
                           const std::function<double(const Point&)>& weight_exponent) {
  double s = 0.0;
  for (const auto& n : dom.boundary()) {
    s += h(n.position) * std::exp(weight_exponent(n.position)) * n.weight;
  }
  return s;
}

}  // namespace fluxbound
