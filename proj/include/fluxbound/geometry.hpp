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
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fluxbound {

struct BallShape {
  double radius = 1.0;
};

struct ShellShape {
  double inner = 0.5;
  double outer = 0.9;
};

/// Spherical shell minus the closed cylinder of radius `channel_radius` swept
/// along the ray through `axis`. The channel joins the cavity to the exterior.
struct PuncturedShellShape {
  double inner = 0.5;
  double outer = 0.9;
  double channel_radius = 0.1;
};

using Shape = std::variant<BallShape, ShellShape, PuncturedShellShape>;

/// Resolution of the boundary quadrature. Spheres use a Gauss-Legendre rule in
/// each polar angle times a uniform azimuthal rule; the channel wall uses
/// Gauss-Legendre along the axis times the same azimuthal rule.
struct QuadratureSpec {
  int polar_nodes = 48;
  int azimuth_nodes = 64;
  int channel_axial_nodes = 24;
};

struct BoundaryNode {
  Point position;
  Point normal;  // unit, pointing away from D into the exterior domain
  double weight = 0.0;
};

class Domain {
 public:
  Domain(Shape shape, int dimension, double bounding_radius, Point axis, QuadratureSpec quadrature);

  int dimension() const { return dim_; }
  double bounding_radius() const { return bounding_radius_; }
  const Shape& shape() const { return shape_; }
  /// Symmetry axis of the shape (the channel direction for punctured shells).
  const Point& axis() const { return axis_; }
  const QuadratureSpec& quadrature_spec() const { return quadrature_; }

  /// Negative inside D, positive outside, zero on the boundary. 1-Lipschitz.
  double signed_distance(const Point& x) const;

  /// Signed distance at the point with radius r and polar angle theta from the axis.
  double signed_distance_polar(double r, double theta) const;

  /// Unit normal at a boundary point, pointing into the exterior domain. On a
  /// sharp edge the one-sided normal of the first active face is returned.
  Point inward_normal(const Point& y) const;

  /// Gradient of the active face of the signed distance at any point off the
  /// axis and origin; the unit normal there of the nearest face.
  Point signed_distance_gradient(const Point& x) const;

  /// True when y sits on a sharp edge (two faces active within tol).
  bool is_edge(const Point& y, double tol = 1e-9) const;

  std::span<const BoundaryNode> boundary() const { return nodes_; }

  double geometric_tolerance() const { return 1e-9 * bounding_radius_; }

  /// Polar coordinates (r, theta) of x relative to the symmetry axis.
  std::pair<double, double> to_polar(const Point& x) const;
  /// Point in the meridian half-plane spanned by the axis and a fixed normal direction.
  Point from_polar(double r, double theta) const;

  /// Radius of the smallest origin-centred ball containing D.
  double outer_extent() const;

  std::string describe() const;

 private:
  // Signed distances of the individual faces; D is their intersection.
  int active_faces(const Point& x, double* values) const;
  void build_quadrature();

  Shape shape_;
  int dim_;
  double bounding_radius_;
  Point axis_;
  Point meridian_;
  QuadratureSpec quadrature_;
  std::vector<BoundaryNode> nodes_;
};

Domain make_ball(double radius, int d, double bounding_radius = 0.0, QuadratureSpec q = {});
Domain make_shell(double inner, double outer, int d, double bounding_radius = 0.0,
                  QuadratureSpec q = {});
Domain make_punctured_shell(double inner, double outer, double channel_radius, const Point& axis,
                            double bounding_radius, int d = 3, QuadratureSpec q = {});

/// Sum of the boundary quadrature weights.
double surface_measure(const Domain& dom);

/// Unit normal at a boundary point, pointing into the exterior domain.
Point inward_normal(const Domain& dom, const Point& y);

/// Flood fill of the meridian half-plane at the given resolution. Returns true
/// when every exterior cell is reachable from the far field.
bool exterior_connected(const Domain& dom, double resolution);

/// Writes one line per boundary node: coordinates, normal, weight.
void dump_boundary(const Domain& dom, std::ostream& out);

/// Boundary flux density h >= 0 on the boundary of D.
class FluxSpec {
 public:
  using Density = std::function<double(const Point&)>;

  FluxSpec() = default;
  FluxSpec(std::string name, Density density) : name_(std::move(name)), density_(std::move(density)) {}

  static FluxSpec uniform(double value);
  /// `value` where y . axis > 0, zero elsewhere.
  static FluxSpec hemisphere(const Point& axis, double value);

  double operator()(const Point& y) const { return density_(y); }
  const std::string& name() const { return name_; }
  FluxSpec scaled(double factor) const;
  FluxSpec plus(const FluxSpec& other, double a, double b) const;

  /// Checks h >= 0 on every quadrature node and h > 0 on at least one.
  void validate(const Domain& dom) const;
  bool is_zero_on(const Domain& dom) const;

 private:
  std::string name_;
  Density density_;
};

/// Integral of h over the boundary of D (boundary quadrature).
double total_flux(const Domain& dom, const FluxSpec& h);

/// Integral of h e^{Q} over the boundary of D.
double weighted_total_flux(const Domain& dom, const FluxSpec& h,
                           const std::function<double(const Point&)>& weight_exponent);

/// Gauss-Legendre nodes and weights on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace fluxbound
