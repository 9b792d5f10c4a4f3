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

#include "fluxbound/geometry.hpp"
#include "fluxbound/linear_solver.hpp"
#include "fluxbound/mesh.hpp"
#include "fluxbound/operator.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fluxbound {

struct SolverOptions {
  /// Multiplies every target cell size; 0.5 halves the grid spacing.
  double mesh_scale = 1.0;
  /// Far-field radial cell size divided by r.
  double relative_spacing = 0.05;
  /// Polar cell size away from the channel (punctured shells and Dirichlet
  /// spheres). Balls and shells use one polar cell per quadrature band.
  double polar_spacing = 0.1;
  /// First truncation radius n; 0 selects 4 R.
  double first_truncation = 0.0;
  int max_doublings = 16;
  /// Relative sup-norm increment on the probes that stops the doubling in n.
  double tolerance = 1e-4;
  double linear_tolerance = 1e-10;
  /// Additional radial faces.
  std::vector<double> forced_radii;
};

enum class CellKind : std::uint8_t { inactive, interior, flux_boundary, dirichlet_boundary };

/// Discrete field on the (r, theta) mesh of B_n minus D. Values live at cell
/// centres; the Dirichlet data sit on the faces r = n (value 0) and, for
/// sphere problems, r = R (value inner_value).
class GridField {
 public:
  GridField() = default;
  GridField(std::shared_ptr<const PolarMesh> mesh, Point axis, int radial_cells, double truncation,
            std::vector<double> values, std::vector<CellKind> kinds, double inner_radius,
            double inner_value);

  /// Bilinear interpolation between active cell centres; 0 for |x| >= n.
  double value_at(const Point& x) const;
  double value_at_polar(double r, double theta) const;
  /// Value of the cell containing x (throws if that cell is not active).
  double cell_value(const Point& x) const;

  const PolarMesh& mesh() const { return *mesh_; }
  double truncation_radius() const { return truncation_; }
  int radial_cells() const { return radial_cells_; }
  std::span<const double> values() const { return values_; }
  std::span<const CellKind> kinds() const { return kinds_; }
  double value(int i, int j) const { return values_[mesh_->index(i, j)]; }
  CellKind kind(int i, int j) const { return kinds_[mesh_->index(i, j)]; }

  /// Largest value and the kind of the cell where it is attained.
  std::pair<double, CellKind> max_value() const;
  double min_value() const;

  /// One line per active cell: r theta value kind.
  void write_table(std::ostream& out) const;

  SolveStats stats;

 private:
  std::pair<double, double> polar(const Point& x) const;

  std::shared_ptr<const PolarMesh> mesh_;
  Point axis_;
  int radial_cells_ = 0;
  double truncation_ = 0.0;
  std::vector<double> values_;
  std::vector<CellKind> kinds_;
  double inner_radius_ = 0.0;
  double inner_value_ = 0.0;
};

struct TruncatedSystem {
  SparseMatrix matrix;
  /// e^{Q} times cell volume for each unknown (the weight W of L_h = -W^{-1} A).
  Vector weights;
  Vector rhs;
  double truncation_radius = 0.0;
  int radial_cells = 0;
};

struct MinimalSolution {
  GridField field;
  std::vector<double> truncations;
  std::vector<std::vector<double>> probe_values;
  /// Relative sup-norm increment between consecutive truncations.
  std::vector<double> increments;
  std::vector<SolveStats> stats;
  double achieved_increment = 0.0;
};

/// Green's function columns at probe cells: values(i, j) approximates
/// G(x_i, x_j), the (azimuthally averaged) kernel with pole x_j.
struct GreenMatrix {
  std::vector<Point> probes;
  std::vector<int> probe_unknowns;
  std::vector<double> probe_weight_exponent;
  Eigen::MatrixXd values;
  std::vector<Vector> columns;
  double truncation_radius = 0.0;

  /// ||M - M^T|| / ||M|| (Frobenius).
  double asymmetry() const;
  /// Same for the matrix e^{Q(x_i)} M_ij.
  double weighted_asymmetry() const;
  /// G_sym(x_i, x_j) = M_ij e^{-Q(x_j)}.
  Eigen::MatrixXd symmetric_kernel() const;
};

/// Finite-volume discretisation of div(e^Q a grad u) = 0 outside an obstacle,
/// on truncations B_n that are prefixes of one graded (r, theta) mesh.
/// Two boundary models: co-normal flux on the boundary of a Domain, or a
/// Dirichlet sphere |x| = R (used for V and the exterior-ball Green's function).
class ExteriorSolver {
 public:
  ExteriorSolver(const Domain& domain, const OperatorSpec& op, SolverOptions options = {});

  /// Exterior of the sphere |x| = radius with value `inner_value` there.
  static ExteriorSolver dirichlet_sphere(double radius, int d, const OperatorSpec& op,
                                         double inner_value, SolverOptions options = {});

  const Domain& domain() const { return domain_; }
  const OperatorSpec& op() const { return op_; }
  const SolverOptions& options() const { return options_; }
  std::shared_ptr<const PolarMesh> mesh() const { return mesh_; }
  const std::vector<double>& truncations() const { return truncations_; }
  bool dirichlet_inner() const { return dirichlet_inner_; }
  int unknowns(double truncation) const;

  /// Flux right-hand side e^{Q(y)} h(y) w over the boundary quadrature.
  Vector flux_source(const FluxSpec& h) const;
  /// Flux of quadrature nodes that fall into components not connected to infinity.
  double dropped_flux(const FluxSpec& h) const;

  TruncatedSystem assemble(double truncation) const;

  /// Solves the truncated problem on B_n. h may be omitted for Dirichlet-sphere problems.
  GridField solve_truncated(const std::optional<FluxSpec>& h, double truncation,
                            const Vector* warm_start = nullptr) const;

  /// Doubles n until the relative sup-norm increment on the probes drops below tolerance.
  MinimalSolution solve_minimal(const std::optional<FluxSpec>& h, std::span<const Point> probes) const;
  /// Same with an explicit right-hand side over all unknowns (empty for none).
  MinimalSolution solve_minimal_source(const Vector& source, std::span<const Point> probes) const;

  /// Green's function columns for poles at the probe cells, on B_n.
  GreenMatrix discrete_green(double truncation, std::span<const Point> probes) const;

  /// Unknown index of the cell containing x, or -1.
  int unknown_at(const Point& x) const;
  double cell_weight_exponent(int unknown) const;

  /// |<W L f, g> - <f, W L g>| / (|<W L f, g>| + |<f, W L g>|) maximised over
  /// `trials` random pairs, with L = -W^{-1} A.
  double weighted_adjoint_defect(double truncation, int trials, std::uint64_t seed) const;

  /// Unknown index and data of each boundary node (-1 when dropped).
  std::span<const int> node_unknowns() const { return node_unknown_; }

 private:
  ExteriorSolver(const Domain& domain, const OperatorSpec& op, SolverOptions options, bool dirichlet,
                 double inner_value);
  void build_mesh();
  void classify();
  void map_boundary_nodes();
  void check_axisymmetric_operator() const;
  GridField make_field(const Vector& x, int radial_cells, double truncation) const;
  double radial_coefficient(double r, double theta) const;
  double polar_coefficient(double r, double theta) const;

  Domain domain_;
  OperatorSpec op_;
  SolverOptions options_;
  bool dirichlet_inner_ = false;
  double inner_value_ = 0.0;
  double inner_radius_ = 0.0;
  int inner_face_ = 0;
  std::shared_ptr<const PolarMesh> mesh_;
  std::vector<double> truncations_;
  std::vector<int> unknown_of_cell_;
  std::vector<int> cell_of_unknown_;
  std::vector<int> unknowns_below_;  // active cells with radial index < i
  std::vector<int> node_unknown_;
  std::vector<char> node_dropped_;
};

/// u(x_i) = sum over boundary nodes of G(x_i, y) e^{Q(y)} h(y) w, using the
/// symmetry of the discrete kernel to read G(x_i, y) from the column at x_i.
std::vector<double> boundary_representation(const ExteriorSolver& solver, const GreenMatrix& green,
                                            const FluxSpec& h);

struct VSolution {
  MinimalSolution solution;
  double probe_radius = 0.0;
  double min_on_sphere = 0.0;
  double max_on_sphere = 0.0;
};

/// Probability-of-hitting function V for the ball B_R: L V = 0 outside B_R,
/// V = 1 on the sphere, V = 0 on |x| = n, with n doubled to convergence.
/// min/max are taken over the sphere |z| = probe_radius. Throws
/// NumericalFailure when V is 1 on that sphere (recurrent diffusion).
VSolution solve_V(double radius, const OperatorSpec& op, double probe_radius,
                  SolverOptions options = {});

/// G^R_Dir(z, x) for the exterior of B_R with pole x, evaluated at the points z.
std::vector<double> dirichlet_green_pde(double radius, const OperatorSpec& op, const Point& pole,
                                        std::span<const Point> z, SolverOptions options = {});

struct CompatibilityReport {
  std::vector<int> k;
  std::vector<double> center_values;
  std::string verdict;  // "incompatible", "compatible" or "inconclusive"
};

/// Interior problem on the ball of the given radius with boundary flux h and
/// a Dirichlet cap of angular radius 1/k around the axis, for each k.
/// A compatible flux (zero total) gives converging centre values; a flux with
/// non-zero total gives centre values that grow without bound.
CompatibilityReport neumann_compatibility_check(double radius, int d, const FluxSpec& h,
                                                std::vector<int> ks = {4, 8, 16, 32},
                                                double mesh_scale = 1.0);

}  // namespace fluxbound
