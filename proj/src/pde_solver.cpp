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

#include "fluxbound/pde_solver.hpp"

#include "fluxbound/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace fluxbound {

namespace {

constexpr double kPi = std::numbers::pi;

double lerp(double a, double b, double t) { return a + t * (b - a); }

// Polar faces whose bands each contain one node of the Gauss-Legendre polar
// rule, so that a constant flux deposits exactly the face area in every band.
std::vector<double> quadrature_aligned_polar_faces(int d, int polar_nodes) {
  std::vector<double> th, wt;
  gauss_legendre(polar_nodes, 0.0, kPi, th, wt);
  const int k = d - 2;
  const double total = sine_power_integral(k, 0.0, kPi);
  double weight_sum = 0.0;
  for (int q = 0; q < polar_nodes; ++q) weight_sum += wt[q] * std::pow(std::sin(th[q]), k);
  auto invert = [&](double target) {
    double lo = 0.0;
    double hi = kPi;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (sine_power_integral(k, 0.0, mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  std::vector<double> faces{0.0};
  double cumulative = 0.0;
  for (int q = 0; q < polar_nodes; ++q) {
    cumulative += wt[q] * std::pow(std::sin(th[q]), k) * total / weight_sum;
    faces.push_back(q == polar_nodes - 1 ? kPi : invert(cumulative));
  }
  return faces;
}

// Distance from x to the interval [a, b].
double interval_distance(double x, double a, double b) {
  if (x < a) return a - x;
  if (x > b) return x - b;
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridField

GridField::GridField(std::shared_ptr<const PolarMesh> mesh, Point axis, int radial_cells,
                     double truncation, std::vector<double> values, std::vector<CellKind> kinds,
                     double inner_radius, double inner_value)
    : mesh_(std::move(mesh)),
      axis_(std::move(axis)),
      radial_cells_(radial_cells),
      truncation_(truncation),
      values_(std::move(values)),
      kinds_(std::move(kinds)),
      inner_radius_(inner_radius),
      inner_value_(inner_value) {}

std::pair<double, double> GridField::polar(const Point& x) const {
  const double along = x.dot(axis_);
  const double perp = (x - along * axis_).norm();
  return {std::hypot(along, perp), std::atan2(perp, along)};
}

double GridField::value_at(const Point& x) const {
  const auto [r, t] = polar(x);
  return value_at_polar(r, t);
}

double GridField::cell_value(const Point& x) const {
  const auto [r, t] = polar(x);
  const auto [i, j] = mesh_->locate(r, t);
  if (i >= radial_cells_ || kind(i, j) == CellKind::inactive) {
    throw InvalidInput("cell_value: point is not in an active cell");
  }
  return value(i, j);
}

double GridField::value_at_polar(double r, double theta) const {
  if (r >= truncation_) return 0.0;
  if (inner_radius_ > 0.0 && r <= inner_radius_) return inner_value_;
  const PolarMesh& m = *mesh_;
  const int nt = m.polar_cells();
  const int last = radial_cells_ - 1;

  int j0 = 0;
  int j1 = 0;
  double ft = 0.0;
  if (theta >= m.theta_center(nt - 1)) {
    j0 = j1 = nt - 1;
  } else if (theta > m.theta_center(0)) {
    const auto& tf = m.polar_faces();
    j0 = static_cast<int>(std::upper_bound(tf.begin(), tf.end(), theta) - tf.begin()) - 1;
    if (m.theta_center(j0) > theta) --j0;
    j1 = j0 + 1;
    ft = (theta - m.theta_center(j0)) / (m.theta_center(j1) - m.theta_center(j0));
  }

  auto active = [&](int i, int j) { return i >= 0 && i <= last && kind(i, j) != CellKind::inactive; };

  // Radial interpolation along polar column j; NaN when a needed cell is inactive.
  auto column = [&](int j) -> double {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (r >= m.r_center(last)) {
      if (!active(last, j)) return nan;
      return lerp(value(last, j), 0.0, (r - m.r_center(last)) / (truncation_ - m.r_center(last)));
    }
    const auto& rf = m.radial_faces();
    int i0 = static_cast<int>(std::upper_bound(rf.begin(), rf.end(), r) - rf.begin()) - 1;
    if (m.r_center(i0) > r) --i0;
    if (i0 < 0) return active(0, j) ? value(0, j) : nan;
    if (inner_radius_ > 0.0 && (!active(i0, j)) && active(i0 + 1, j) &&
        std::abs(rf[i0 + 1] - inner_radius_) < 1e-12 * inner_radius_) {
      const double rc = m.r_center(i0 + 1);
      return lerp(inner_value_, value(i0 + 1, j), (r - inner_radius_) / (rc - inner_radius_));
    }
    if (!active(i0, j) || !active(i0 + 1, j)) return nan;
    const double f = (r - m.r_center(i0)) / (m.r_center(i0 + 1) - m.r_center(i0));
    return lerp(value(i0, j), value(i0 + 1, j), f);
  };

  const double a = column(j0);
  const double b = j1 == j0 ? a : column(j1);
  if (std::isfinite(a) && std::isfinite(b)) return lerp(a, b, ft);

  // Next to the obstacle: nearest active cell centre in the meridian plane.
  const auto [ic, jc] = m.locate(r, theta);
  double best = std::numeric_limits<double>::infinity();
  double result = std::numeric_limits<double>::quiet_NaN();
  const double px = r * std::cos(theta);
  const double py = r * std::sin(theta);
  for (int i = std::max(0, ic - 2); i <= std::min(last, ic + 2); ++i) {
    for (int j = std::max(0, jc - 2); j <= std::min(nt - 1, jc + 2); ++j) {
      if (!active(i, j)) continue;
      const double cx = m.r_center(i) * std::cos(m.theta_center(j));
      const double cy = m.r_center(i) * std::sin(m.theta_center(j));
      const double dist = std::hypot(cx - px, cy - py);
      if (dist < best) {
        best = dist;
        result = value(i, j);
      }
    }
  }
  if (!std::isfinite(result)) {
    throw InvalidInput("value_at: point is not in the discretised exterior domain");
  }
  return result;
}

std::pair<double, CellKind> GridField::max_value() const {
  double best = -std::numeric_limits<double>::infinity();
  CellKind where = CellKind::inactive;
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (kinds_[c] == CellKind::inactive) continue;
    if (values_[c] > best) {
      best = values_[c];
      where = kinds_[c];
    }
  }
  return {best, where};
}

double GridField::min_value() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (kinds_[c] != CellKind::inactive) best = std::min(best, values_[c]);
  }
  return best;
}

void GridField::write_table(std::ostream& out) const {
  out.precision(12);
  out << "r theta value kind\n";
  for (int i = 0; i < radial_cells_; ++i) {
    for (int j = 0; j < mesh_->polar_cells(); ++j) {
      if (kind(i, j) == CellKind::inactive) continue;
      out << mesh_->r_center(i) << ' ' << mesh_->theta_center(j) << ' ' << value(i, j) << ' '
          << static_cast<int>(kind(i, j)) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// GreenMatrix

double GreenMatrix::asymmetry() const {
  return (values - values.transpose()).norm() / values.norm();
}

double GreenMatrix::weighted_asymmetry() const {
  Eigen::MatrixXd w = values;
  for (int i = 0; i < w.rows(); ++i) w.row(i) *= std::exp(probe_weight_exponent[i]);
  return (w - w.transpose()).norm() / w.norm();
}

Eigen::MatrixXd GreenMatrix::symmetric_kernel() const {
  Eigen::MatrixXd g = values;
  for (int j = 0; j < g.cols(); ++j) g.col(j) *= std::exp(-probe_weight_exponent[j]);
  return g;
}

// ---------------------------------------------------------------------------
// ExteriorSolver

ExteriorSolver::ExteriorSolver(const Domain& domain, const OperatorSpec& op, SolverOptions options)
    : ExteriorSolver(domain, op, std::move(options), false, 0.0) {}

ExteriorSolver ExteriorSolver::dirichlet_sphere(double radius, int d, const OperatorSpec& op,
                                                double inner_value, SolverOptions options) {
  QuadratureSpec tiny{2, 3, 1};
  return ExteriorSolver(make_ball(radius, d, radius, tiny), op, std::move(options), true, inner_value);
}

ExteriorSolver::ExteriorSolver(const Domain& domain, const OperatorSpec& op, SolverOptions options,
                               bool dirichlet, double inner_value)
    : domain_(domain),
      op_(op),
      options_(std::move(options)),
      dirichlet_inner_(dirichlet),
      inner_value_(inner_value) {
  if (op_.dimension() != domain_.dimension()) {
    throw InvalidInput("operator and domain dimensions differ");
  }
  if (!(options_.mesh_scale > 0.0) || !(options_.relative_spacing > 0.0) ||
      !(options_.polar_spacing > 0.0) || options_.max_doublings < 0) {
    throw InvalidInput("solver options out of range");
  }
  if (dirichlet_inner_) inner_radius_ = domain_.outer_extent();
  build_mesh();
  classify();
  check_axisymmetric_operator();
  if (!dirichlet_inner_) map_boundary_nodes();
}

void ExteriorSolver::build_mesh() {
  const int d = domain_.dimension();
  const double big_r = domain_.bounding_radius();
  const double extent = domain_.outer_extent();
  const double scale = options_.mesh_scale;
  const double n0 = options_.first_truncation > 0.0 ? options_.first_truncation : 4.0 * big_r;
  if (!(n0 > big_r)) throw InvalidInput("first truncation radius must exceed R");
  truncations_.clear();
  for (int k = 0; k <= options_.max_doublings; ++k) truncations_.push_back(n0 * std::ldexp(1.0, k));

  std::vector<double> forced = truncations_;
  forced.push_back(big_r);
  forced.insert(forced.end(), options_.forced_radii.begin(), options_.forced_radii.end());
  struct Zone {
    double a, b, h;
  };
  std::vector<Zone> zones;
  std::vector<double> polar_forced;
  bool aligned = false;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BallShape>) {
          forced.push_back(s.radius);
          aligned = !dirichlet_inner_;
        } else if constexpr (std::is_same_v<T, ShellShape>) {
          forced.push_back(s.inner);
          forced.push_back(s.outer);
          zones.push_back({s.inner, s.outer, (s.outer - s.inner) / 6.0});
          aligned = true;
        } else {
          forced.push_back(s.inner);
          forced.push_back(s.outer);
          const double eps = s.channel_radius;
          zones.push_back({s.inner, s.outer, std::min((s.outer - s.inner) / 6.0, eps / 3.0)});
          polar_forced.push_back(std::asin(eps / s.outer));
          polar_forced.push_back(std::asin(eps / s.inner));
        }
      },
      domain_.shape());

  const double rel = options_.relative_spacing;
  auto radial_spacing = [&](double r) {
    double h = rel * std::max(r, extent);
    for (const Zone& z : zones) h = std::min(h, z.h + 0.15 * interval_distance(r, z.a, z.b));
    return scale * h;
  };
  std::vector<double> rf = graded_faces(0.0, truncations_.back(), forced, radial_spacing);

  std::vector<double> tf;
  if (aligned) {
    tf = quadrature_aligned_polar_faces(d, domain_.quadrature_spec().polar_nodes);
  } else {
    double zone_end = 0.0;
    double zone_h = options_.polar_spacing;
    if (!polar_forced.empty()) {
      zone_end = *std::max_element(polar_forced.begin(), polar_forced.end());
      zone_h = std::min(zone_h, zone_end / 6.0);
    }
    auto polar_spacing = [&](double t) {
      return scale * std::min(options_.polar_spacing, zone_h + 0.15 * interval_distance(t, 0.0, zone_end));
    };
    tf = graded_faces(0.0, kPi, polar_forced, polar_spacing);
  }
  mesh_ = std::make_shared<const PolarMesh>(d, std::move(rf), std::move(tf));
  if (dirichlet_inner_) inner_face_ = mesh_->radial_prefix(inner_radius_);
}

void ExteriorSolver::classify() {
  const PolarMesh& m = *mesh_;
  const int nr = m.radial_cells();
  const int nt = m.polar_cells();
  std::vector<char> fluid(static_cast<std::size_t>(nr) * nt);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      fluid[m.index(i, j)] = dirichlet_inner_
                                 ? i >= inner_face_
                                 : domain_.signed_distance_polar(m.r_center(i), m.theta_center(j)) > 0.0;
    }
  }
  std::vector<char> reached(fluid.size(), 0);
  std::deque<std::pair<int, int>> queue;
  for (int j = 0; j < nt; ++j) {
    if (fluid[m.index(nr - 1, j)]) {
      reached[m.index(nr - 1, j)] = 1;
      queue.emplace_back(nr - 1, j);
    }
  }
  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
    for (const auto& c : nb) {
      if (c[0] < 0 || c[0] >= nr || c[1] < 0 || c[1] >= nt) continue;
      const int k = m.index(c[0], c[1]);
      if (fluid[k] && !reached[k]) {
        reached[k] = 1;
        queue.emplace_back(c[0], c[1]);
      }
    }
  }
  unknown_of_cell_.assign(fluid.size(), -1);
  cell_of_unknown_.clear();
  unknowns_below_.assign(nr + 1, 0);
  for (int i = 0; i < nr; ++i) {
    unknowns_below_[i] = static_cast<int>(cell_of_unknown_.size());
    for (int j = 0; j < nt; ++j) {
      const int c = m.index(i, j);
      if (reached[c]) {
        unknown_of_cell_[c] = static_cast<int>(cell_of_unknown_.size());
        cell_of_unknown_.push_back(c);
      }
    }
  }
  unknowns_below_[nr] = static_cast<int>(cell_of_unknown_.size());
}

void ExteriorSolver::check_axisymmetric_operator() const {
  if (op_.is_laplacian()) return;
  const PolarMesh& m = *mesh_;
  const Point& axis = domain_.axis();
  const Point mirror_dir = domain_.from_polar(1.0, 0.5 * kPi);
  for (int c : cell_of_unknown_) {
    const int i = c / m.polar_cells();
    const int j = c % m.polar_cells();
    const double r = m.r_center(i);
    if (r > op_.free_radius()) continue;
    const double t = m.theta_center(j);
    const Point x = domain_.from_polar(r, t);
    // Rotation by pi about the axis within the meridian plane.
    const Point y = r * (std::cos(t) * axis - std::sin(t) * mirror_dir);
    const double q1 = op_.weight_exponent(x);
    const double q2 = op_.weight_exponent(y);
    if (std::abs(q1 - q2) > 1e-10 * std::max(1.0, std::abs(q1))) {
      throw InvalidInput("weight exponent Q is not axisymmetric about the domain axis");
    }
    if (op_.has_constant_diffusion()) continue;
    const SmallMatrix a = op_.diffusion(x);
    Point er = std::cos(t) * axis + std::sin(t) * mirror_dir;
    Point et = -std::sin(t) * axis + std::cos(t) * mirror_dir;
    if (std::abs(er.dot(a * et)) > 1e-10 * a.norm()) {
      throw InvalidInput("diffusion matrix couples the radial and polar directions");
    }
  }
}

void ExteriorSolver::map_boundary_nodes() {
  const PolarMesh& m = *mesh_;
  const auto nodes = domain_.boundary();
  const double delta = 1e-7 * domain_.bounding_radius();
  node_unknown_.assign(nodes.size(), -1);
  node_dropped_.assign(nodes.size(), 0);
  const int nr = m.radial_cells();
  const int nt = m.polar_cells();
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    const Point p = nodes[q].position + delta * nodes[q].normal;
    const auto [r, t] = domain_.to_polar(p);
    const auto [ic, jc] = m.locate(r, t);
    const int c = m.index(ic, jc);
    if (unknown_of_cell_[c] >= 0) {
      node_unknown_[q] = unknown_of_cell_[c];
      continue;
    }
    if (domain_.signed_distance_polar(m.r_center(ic), m.theta_center(jc)) > 0.0) {
      node_dropped_[q] = 1;  // fluid, but not connected to infinity
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    bool fluid_seen = false;
    const double px = r * std::cos(t);
    const double py = r * std::sin(t);
    for (int i = std::max(0, ic - 2); i <= std::min(nr - 1, ic + 2); ++i) {
      for (int j = std::max(0, jc - 2); j <= std::min(nt - 1, jc + 2); ++j) {
        const int cc = m.index(i, j);
        const double cx = m.r_center(i) * std::cos(m.theta_center(j));
        const double cy = m.r_center(i) * std::sin(m.theta_center(j));
        if (unknown_of_cell_[cc] < 0) {
          fluid_seen = fluid_seen || domain_.signed_distance_polar(m.r_center(i), m.theta_center(j)) > 0.0;
          continue;
        }
        const double dist = std::hypot(cx - px, cy - py);
        if (dist < best) {
          best = dist;
          node_unknown_[q] = unknown_of_cell_[cc];
        }
      }
    }
    if (node_unknown_[q] < 0) {
      if (!fluid_seen) {
        throw NumericalFailure("boundary node has no neighbouring exterior cell; refine the mesh");
      }
      node_dropped_[q] = 1;
    }
  }
}

int ExteriorSolver::unknowns(double truncation) const {
  return unknowns_below_[mesh_->radial_prefix(truncation)];
}

Vector ExteriorSolver::flux_source(const FluxSpec& h) const {
  if (dirichlet_inner_) throw InvalidInput("flux data given for a Dirichlet sphere problem");
  const auto nodes = domain_.boundary();
  const auto basis_perp = domain_.from_polar(1.0, 0.5 * kPi);
  Vector b = Vector::Zero(static_cast<Eigen::Index>(cell_of_unknown_.size()));
  const double hmax = [&] {
    double v = 0.0;
    for (const auto& n : nodes) v = std::max(v, std::abs(h(n.position)));
    return v;
  }();
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    const Point& y = nodes[q].position;
    const double hy = h(y);
    // The discretisation is axisymmetric; so must the data be.
    const double off = y.dot(basis_perp);
    const Point mirrored = y - 2.0 * off * basis_perp;
    if (std::abs(h(mirrored) - hy) > 1e-9 * std::max(1.0, hmax)) {
      throw InvalidInput("flux density is not axisymmetric about the domain axis");
    }
    if (node_unknown_[q] < 0) continue;
    b[node_unknown_[q]] += std::exp(op_.weight_exponent(y)) * hy * nodes[q].weight;
  }
  return b;
}

double ExteriorSolver::dropped_flux(const FluxSpec& h) const {
  double s = 0.0;
  const auto nodes = domain_.boundary();
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    if (node_dropped_[q]) s += h(nodes[q].position) * nodes[q].weight;
  }
  return s;
}

double ExteriorSolver::radial_coefficient(double r, double theta) const {
  if (op_.is_laplacian()) return 1.0;
  const Point x = domain_.from_polar(r, theta);
  const double q = std::exp(op_.weight_exponent(x));
  if (op_.has_constant_diffusion()) return q;
  const Point er = domain_.from_polar(1.0, theta);
  return q * er.dot(op_.diffusion(x) * er);
}

double ExteriorSolver::polar_coefficient(double r, double theta) const {
  if (op_.is_laplacian()) return 1.0;
  const Point x = domain_.from_polar(r, theta);
  const double q = std::exp(op_.weight_exponent(x));
  if (op_.has_constant_diffusion()) return q;
  const Point et = domain_.from_polar(1.0, theta + 0.5 * kPi);
  return q * et.dot(op_.diffusion(x) * et);
}

double ExteriorSolver::cell_weight_exponent(int unknown) const {
  const PolarMesh& m = *mesh_;
  const int c = cell_of_unknown_.at(unknown);
  const int i = c / m.polar_cells();
  const int j = c % m.polar_cells();
  return op_.weight_exponent(domain_.from_polar(m.r_center(i), m.theta_center(j)));
}

TruncatedSystem ExteriorSolver::assemble(double truncation) const {
  const PolarMesh& m = *mesh_;
  const int nr = mesh_->radial_prefix(truncation);
  if (nr <= (dirichlet_inner_ ? inner_face_ : 0)) throw InvalidInput("truncation radius too small");
  const int nt = m.polar_cells();
  const int count = unknowns_below_[nr];
  if (count == 0) throw NumericalFailure("no exterior cells inside the truncation radius");
  TruncatedSystem sys;
  sys.truncation_radius = truncation;
  sys.radial_cells = nr;
  sys.weights.resize(count);
  sys.rhs = Vector::Zero(count);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(count) * 5);
  auto couple = [&](int u, int v, double t) {
    trip.emplace_back(u, u, t);
    trip.emplace_back(v, v, t);
    trip.emplace_back(u, v, -t);
    trip.emplace_back(v, u, -t);
  };
  for (int u = 0; u < count; ++u) {
    const int c = cell_of_unknown_[u];
    const int i = c / nt;
    const int j = c % nt;
    const double rc = m.r_center(i);
    const double tc = m.theta_center(j);
    sys.weights[u] = std::exp(op_.weight_exponent(domain_.from_polar(rc, tc))) * m.volume(i, j);
    const double rface = m.radial_faces()[i + 1];
    if (i + 1 < nr) {
      const int v = unknown_of_cell_[m.index(i + 1, j)];
      if (v >= 0) {
        couple(u, v, radial_coefficient(rface, tc) * m.radial_face_area(i + 1, j) / (m.r_center(i + 1) - rc));
      }
    } else {
      trip.emplace_back(u, u, radial_coefficient(rface, tc) * m.radial_face_area(i + 1, j) / (rface - rc));
    }
    if (dirichlet_inner_ && i == inner_face_) {
      const double r0 = m.radial_faces()[i];
      const double t = radial_coefficient(r0, tc) * m.radial_face_area(i, j) / (rc - r0);
      trip.emplace_back(u, u, t);
      sys.rhs[u] += t * inner_value_;
    }
    if (j + 1 < nt) {
      const int v = unknown_of_cell_[m.index(i, j + 1)];
      if (v >= 0) {
        const double tf = m.polar_faces()[j + 1];
        couple(u, v, polar_coefficient(rc, tf) * m.polar_face_factor(i, j + 1) /
                         (m.theta_center(j + 1) - tc));
      }
    }
  }
  sys.matrix.resize(count, count);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.matrix.makeCompressed();
  return sys;
}

GridField ExteriorSolver::make_field(const Vector& x, int nr, double truncation) const {
  const PolarMesh& m = *mesh_;
  const int nt = m.polar_cells();
  std::vector<double> values(static_cast<std::size_t>(nr) * nt, 0.0);
  std::vector<CellKind> kinds(values.size(), CellKind::inactive);
  std::vector<char> has_node(values.size(), 0);
  for (int u : node_unknown_) {
    if (u >= 0 && u < x.size()) has_node[cell_of_unknown_[u]] = 1;
  }
  auto active = [&](int i, int j) {
    return i >= 0 && i < nr && j >= 0 && j < nt && unknown_of_cell_[m.index(i, j)] >= 0;
  };
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      const int c = m.index(i, j);
      const int u = unknown_of_cell_[c];
      if (u < 0) continue;
      values[c] = x[u];
      bool open_face = (i > 0 && !active(i - 1, j)) || (j > 0 && !active(i, j - 1)) ||
                       (j + 1 < nt && !active(i, j + 1));
      if (dirichlet_inner_ && i == inner_face_) open_face = false;
      if (i == nr - 1 || (dirichlet_inner_ && i == inner_face_)) {
        kinds[c] = CellKind::dirichlet_boundary;
      } else if (has_node[c] || open_face) {
        kinds[c] = CellKind::flux_boundary;
      } else {
        kinds[c] = CellKind::interior;
      }
    }
  }
  return GridField(mesh_, domain_.axis(), nr, truncation, std::move(values), std::move(kinds),
                   dirichlet_inner_ ? inner_radius_ : 0.0, inner_value_);
}

GridField ExteriorSolver::solve_truncated(const std::optional<FluxSpec>& h, double truncation,
                                          const Vector* warm_start) const {
  TruncatedSystem sys = assemble(truncation);
  Vector b = sys.rhs;
  if (h) b += flux_source(*h).head(b.size());
  check_symmetric(sys.matrix);
  Vector x = Vector::Zero(b.size());
  if (warm_start) x.head(std::min(x.size(), warm_start->size())) = warm_start->head(std::min(x.size(), warm_start->size()));
  const SolveStats stats = solve_spd(sys.matrix, b, x, options_.linear_tolerance);
  GridField f = make_field(x, sys.radial_cells, truncation);
  f.stats = stats;
  return f;
}

MinimalSolution ExteriorSolver::solve_minimal(const std::optional<FluxSpec>& h,
                                              std::span<const Point> probes) const {
  return solve_minimal_source(h ? flux_source(*h) : Vector(), probes);
}

MinimalSolution ExteriorSolver::solve_minimal_source(const Vector& source,
                                                     std::span<const Point> probes) const {
  if (probes.empty()) throw InvalidInput("solve_minimal: empty probe set");
  double reach = 0.0;
  for (const Point& p : probes) reach = std::max(reach, p.norm());
  MinimalSolution out;
  Vector x;
  int checked = 0;
  for (std::size_t k = 0; k < truncations_.size(); ++k) {
    const double n = truncations_[k];
    if (n < 2.0 * reach && k + 1 < truncations_.size()) continue;
    TruncatedSystem sys = assemble(n);
    Vector b = sys.rhs;
    if (source.size() > 0) b += source.head(b.size());
    if (k == 0 || checked == 0) check_symmetric(sys.matrix);
    Vector guess = Vector::Zero(b.size());
    if (x.size() > 0) guess.head(x.size()) = x;
    x = guess;
    out.stats.push_back(solve_spd(sys.matrix, b, x, options_.linear_tolerance));
    out.field = make_field(x, sys.radial_cells, n);
    out.field.stats = out.stats.back();
    std::vector<double> vals;
    for (const Point& p : probes) vals.push_back(out.field.value_at(p));
    out.truncations.push_back(n);
    out.probe_values.push_back(vals);
    ++checked;
    if (out.probe_values.size() < 2) continue;
    const auto& prev = out.probe_values[out.probe_values.size() - 2];
    double diff = 0.0;
    double mag = 0.0;
    for (std::size_t p = 0; p < vals.size(); ++p) {
      diff = std::max(diff, std::abs(vals[p] - prev[p]));
      mag = std::max(mag, std::abs(vals[p]));
    }
    const double inc = mag > 0.0 ? diff / mag : 0.0;
    out.increments.push_back(inc);
    out.achieved_increment = inc;
    if (inc < options_.tolerance) return out;
    const std::size_t m = out.increments.size();
    if (m >= 3 && out.increments[m - 1] > 1.5 * out.increments[m - 2]) {
      throw NumericalFailure("truncation increments are not decreasing (" +
                             std::to_string(out.increments[m - 2]) + " -> " +
                             std::to_string(out.increments[m - 1]) +
                             "): transience fails or the mesh is too coarse");
    }
  }
  throw NumericalFailure("truncation budget exhausted: increment " +
                         std::to_string(out.achieved_increment) + " above tolerance " +
                         std::to_string(options_.tolerance) + " at n = " +
                         std::to_string(truncations_.back()));
}

int ExteriorSolver::unknown_at(const Point& x) const {
  const auto [r, t] = domain_.to_polar(x);
  const auto [i, j] = mesh_->locate(r, t);
  if (i >= mesh_->radial_cells()) return -1;
  return unknown_of_cell_[mesh_->index(i, j)];
}

GreenMatrix ExteriorSolver::discrete_green(double truncation, std::span<const Point> probes) const {
  TruncatedSystem sys = assemble(truncation);
  check_symmetric(sys.matrix);
  DirectSolver solver(sys.matrix);
  GreenMatrix g;
  g.truncation_radius = truncation;
  const int count = static_cast<int>(sys.matrix.rows());
  for (const Point& p : probes) {
    if (!dirichlet_inner_ && std::abs(domain_.signed_distance(p)) <= 1e-6 * domain_.bounding_radius()) {
      throw InvalidInput("discrete_green: probe lies on the boundary of D");
    }
    const int u = unknown_at(p);
    if (u < 0 || u >= count) throw InvalidInput("discrete_green: probe is outside the discrete domain");
    g.probes.push_back(p);
    g.probe_unknowns.push_back(u);
    g.probe_weight_exponent.push_back(cell_weight_exponent(u));
  }
  const int np = static_cast<int>(g.probes.size());
  g.values.resize(np, np);
  for (int j = 0; j < np; ++j) {
    Vector rhs = Vector::Zero(count);
    rhs[g.probe_unknowns[j]] = std::exp(g.probe_weight_exponent[j]);
    g.columns.push_back(solver.solve(rhs));
    for (int i = 0; i < np; ++i) g.values(i, j) = g.columns.back()[g.probe_unknowns[i]];
  }
  return g;
}

double ExteriorSolver::weighted_adjoint_defect(double truncation, int trials, std::uint64_t seed) const {
  TruncatedSystem sys = assemble(truncation);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index n = sys.matrix.rows();
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector f(n);
    Vector g(n);
    for (Eigen::Index k = 0; k < n; ++k) f[k] = normal(gen);
    for (Eigen::Index k = 0; k < n; ++k) g[k] = normal(gen);
    const Vector lf = -(sys.matrix * f).cwiseQuotient(sys.weights);
    const Vector lg = -(sys.matrix * g).cwiseQuotient(sys.weights);
    const double left = (sys.weights.cwiseProduct(lf)).dot(g);
    const double right = f.dot(sys.weights.cwiseProduct(lg));
    worst = std::max(worst, std::abs(left - right) / (std::abs(left) + std::abs(right)));
  }
  return worst;
}

std::vector<double> boundary_representation(const ExteriorSolver& solver, const GreenMatrix& green,
                                            const FluxSpec& h) {
  const auto nodes = solver.domain().boundary();
  const auto map = solver.node_unknowns();
  std::vector<double> u(green.probes.size(), 0.0);
  for (std::size_t i = 0; i < green.probes.size(); ++i) {
    const Vector& col = green.columns[i];
    double s = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      if (map[q] < 0 || map[q] >= col.size()) continue;
      const double hy = h(nodes[q].position);
      if (hy == 0.0) continue;
      const double qy = solver.op().weight_exponent(nodes[q].position);
      s += col[map[q]] * std::exp(qy - green.probe_weight_exponent[i]) * hy * nodes[q].weight;
    }
    u[i] = s;
  }
  return u;
}

VSolution solve_V(double radius, const OperatorSpec& op, double probe_radius, SolverOptions options) {
  if (!(probe_radius > radius)) throw InvalidInput("solve_V: probe sphere must lie outside B_R");
  const int d = op.dimension();
  ExteriorSolver solver = ExteriorSolver::dirichlet_sphere(radius, d, op, 1.0, options);
  std::vector<Point> probes;
  for (int k = 0; k <= 16; ++k) probes.push_back(solver.domain().from_polar(probe_radius, kPi * k / 16));
  VSolution v;
  v.probe_radius = probe_radius;
  v.solution = solver.solve_minimal(std::nullopt, probes);
  v.min_on_sphere = std::numeric_limits<double>::infinity();
  v.max_on_sphere = -v.min_on_sphere;
  for (int k = 0; k <= 64; ++k) {
    const double val = v.solution.field.value_at_polar(probe_radius, kPi * k / 64);
    v.min_on_sphere = std::min(v.min_on_sphere, val);
    v.max_on_sphere = std::max(v.max_on_sphere, val);
  }
  if (v.min_on_sphere >= 1.0 - 1e-6) {
    throw NumericalFailure("V is identically 1 on the probe sphere: the diffusion is recurrent");
  }
  return v;
}

std::vector<double> dirichlet_green_pde(double radius, const OperatorSpec& op, const Point& pole,
                                        std::span<const Point> z, SolverOptions options) {
  if (!(pole.norm() > radius)) throw InvalidInput("dirichlet_green_pde: pole must lie outside B_R");
  options.forced_radii.push_back(pole.norm());
  ExteriorSolver solver = ExteriorSolver::dirichlet_sphere(radius, op.dimension(), op, 0.0, options);
  const int u = solver.unknown_at(pole);
  if (u < 0) throw InvalidInput("dirichlet_green_pde: pole is not in the mesh");
  Vector source = Vector::Zero(solver.unknowns(solver.truncations().back()));
  source[u] = std::exp(solver.cell_weight_exponent(u));
  std::vector<Point> probes(z.begin(), z.end());
  probes.push_back(pole);
  const MinimalSolution sol = solver.solve_minimal_source(source, probes);
  std::vector<double> vals = sol.probe_values.back();
  vals.pop_back();
  return vals;
}

CompatibilityReport neumann_compatibility_check(double radius, int d, const FluxSpec& h,
                                                std::vector<int> ks, double mesh_scale) {
  if (!(radius > 0.0) || ks.empty()) throw InvalidInput("neumann_compatibility_check: bad arguments");
  std::sort(ks.begin(), ks.end());
  const double smallest_cap = 1.0 / ks.back();
  std::vector<double> caps;
  for (int k : ks) {
    if (k < 1) throw InvalidInput("neumann_compatibility_check: k must be positive");
    caps.push_back(1.0 / k);
  }
  auto rs = [&](double r) {
    return mesh_scale * std::min(0.05 * radius, radius * smallest_cap / 6.0 + 0.15 * (radius - r));
  };
  auto ts = [&](double t) { return mesh_scale * std::min(kPi / 40.0, smallest_cap / 6.0 + 0.15 * t); };
  PolarMesh m(d, graded_faces(0.0, radius, {}, rs), graded_faces(0.0, kPi, caps, ts));
  const int nr = m.radial_cells();
  const int nt = m.polar_cells();
  const Point axis = unit_vector(d, d - 1);
  const Point side = unit_vector(d, 0);
  auto idx = [&](int i, int j) { return m.index(i, j); };

  std::vector<Eigen::Triplet<double>> base;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      if (i + 1 < nr) {
        const double t = m.radial_face_area(i + 1, j) / (m.r_center(i + 1) - m.r_center(i));
        base.emplace_back(idx(i, j), idx(i, j), t);
        base.emplace_back(idx(i + 1, j), idx(i + 1, j), t);
        base.emplace_back(idx(i, j), idx(i + 1, j), -t);
        base.emplace_back(idx(i + 1, j), idx(i, j), -t);
      }
      if (j + 1 < nt) {
        const double t = m.polar_face_factor(i, j + 1) / (m.theta_center(j + 1) - m.theta_center(j));
        base.emplace_back(idx(i, j), idx(i, j), t);
        base.emplace_back(idx(i, j + 1), idx(i, j + 1), t);
        base.emplace_back(idx(i, j), idx(i, j + 1), -t);
        base.emplace_back(idx(i, j + 1), idx(i, j), -t);
      }
    }
  }
  CompatibilityReport rep;
  const int last = nr - 1;
  for (int k : ks) {
    const double cap = 1.0 / k;
    auto trip = base;
    Vector b = Vector::Zero(static_cast<Eigen::Index>(nr) * nt);
    for (int j = 0; j < nt; ++j) {
      const double area = m.radial_face_area(nr, j);
      const double tc = m.theta_center(j);
      if (tc < cap) {
        trip.emplace_back(idx(last, j), idx(last, j), area / (radius - m.r_center(last)));
      } else {
        const Point y = radius * (std::cos(tc) * axis + std::sin(tc) * side);
        b[idx(last, j)] += h(y) * area;
      }
    }
    SparseMatrix a(b.size(), b.size());
    a.setFromTriplets(trip.begin(), trip.end());
    DirectSolver solver(a);
    const Vector x = solver.solve(b);
    double num = 0.0;
    double den = 0.0;
    for (int j = 0; j < nt; ++j) {
      num += x[idx(0, j)] * m.volume(0, j);
      den += m.volume(0, j);
    }
    rep.k.push_back(k);
    rep.center_values.push_back(num / den);
  }
  const auto& v = rep.center_values;
  double scale = 0.0;
  for (double c : v) scale = std::max(scale, std::abs(c));
  bool diverging = v.size() >= 2;
  bool shrinking = v.size() >= 3;
  for (std::size_t i = 1; i < v.size(); ++i) {
    diverging = diverging && v[i - 1] > 0.0 && v[i] >= 1.5 * v[i - 1];
    if (i >= 2) shrinking = shrinking && std::abs(v[i] - v[i - 1]) < std::abs(v[i - 1] - v[i - 2]);
  }
  if (scale <= 1e-12) {
    rep.verdict = "compatible";
  } else if (diverging) {
    rep.verdict = "incompatible";
  } else if (shrinking) {
    rep.verdict = "compatible";
  } else {
    rep.verdict = "inconclusive";
  }
  return rep;
}

}  // namespace fluxbound
