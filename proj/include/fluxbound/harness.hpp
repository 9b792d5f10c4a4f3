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
#include "fluxbound/montecarlo.hpp"
#include "fluxbound/operator.hpp"
#include "fluxbound/pde_solver.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace fluxbound {

struct ScenarioConfig {
  std::string name = "scenario";
  int dimension = 3;

  // Geometry. Ball uses inner_radius as its radius.
  std::string shape = "ball";  // ball | shell | punctured_shell
  double inner_radius = 1.0;
  double outer_radius = 0.0;
  double channel_radius = 0.0;
  double bounding_radius = 1.0;
  /// Symmetry axis; empty selects the last coordinate axis.
  std::vector<double> axis;
  QuadratureSpec quadrature;

  // Operator. Widths are in units of the bounding radius.
  std::string operator_kind = "laplacian";  // laplacian | q_bump
  double kappa = 0.5;
  double width_factor = 1.0;
  double q_shift = 0.0;

  // Flux.
  std::string flux_kind = "uniform";  // uniform | hemisphere
  double flux_value = 1.0;

  // Probes.
  std::vector<double> gammas{2.0, 4.0, 10.0};
  std::vector<double> probe_angles{0.0, 1.5707963267948966, 3.141592653589793};
  double r_prime_factor = 1.5;
  std::vector<double> theorem2_radius_factors{3.0, 5.0};
  int sphere_samples = 5;

  SolverOptions solver;

  // Monte Carlo.
  PathConfig mc;
  bool mc_crosscheck = true;
  std::uint64_t crosscheck_samples = 20'000;
  double hitting_rho = 2.0;
  int hitting_circuits = 4;

  // Blow-up study.
  std::vector<int> blowup_n{4, 8, 16, 32};
  double blowup_exterior_factor = 2.0;

  std::vector<std::string> suites{"theorem1"};
  std::string output_dir;
};

Domain build_domain(const ScenarioConfig& cfg);
OperatorSpec build_operator(const ScenarioConfig& cfg);
FluxSpec build_flux(const ScenarioConfig& cfg);

/// Integral of f over the ball by Gauss-Legendre in the radius times the sphere rule.
double ball_integral(const std::function<double(const Point&)>& f, const Point& center, double radius,
                     int radial_nodes = 12, QuadratureSpec sphere = {12, 24, 1});

struct ProbeRow {
  Point x;
  double radius = 0.0;
  double gamma = 0.0;
  double angle = 0.0;
  /// Solver value on the finer mesh, its coarse-mesh counterpart, and the
  /// discretisation tolerance |u_fine - u_coarse| + truncation increment.
  double u = 0.0;
  double u_coarse = 0.0;
  double discretization_tol = 0.0;
  /// Value from the boundary representation with the discrete Green's function.
  double u_representation = std::numeric_limits<double>::quiet_NaN();
  /// Monte Carlo cross-check (NaN when not run).
  double mc = std::numeric_limits<double>::quiet_NaN();
  double mc_se = std::numeric_limits<double>::quiet_NaN();
  bool mc_pass = true;
  /// Quantity compared with the envelopes and the envelopes themselves.
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  /// Combined tolerance in the units of `value`.
  double tolerance = 0.0;
  /// min(value - lower, upper - value); negative when outside.
  double margin = 0.0;
  bool pass = false;
  /// Secondary envelope (PDE-built for Theorem 2); NaN when absent.
  double lower_alt = std::numeric_limits<double>::quiet_NaN();
  double upper_alt = std::numeric_limits<double>::quiet_NaN();
};

struct BoundReport {
  std::string scenario;
  std::string theorem;  // "theorem1" or "theorem2"
  int dimension = 3;
  double flux_integral = 0.0;
  /// Theorem 2 data: R', min and max of V on |z| = R' with tolerance.
  double r_prime = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  double v_tol = 0.0;
  std::vector<ProbeRow> rows;
  bool all_pass = false;
  std::string verdict;  // "pass", "fail" or "inconclusive"
  std::vector<std::string> notes;
};

/// Two-sided bound of Theorem 1 (Laplacian) at |x| = gamma R for each gamma
/// and probe angle; the value compared is u (d-2) omega_d |x|^{d-2} / S.
BoundReport verify_theorem1(const ScenarioConfig& cfg);

/// Weighted bracket of Theorem 2 at |x| = factor R on the symmetry axis. For a
/// non-Laplacian operator the primary envelope uses Monte Carlo G^R_Dir with
/// 3 standard errors folded in; the secondary uses the PDE Green's function.
/// For the Laplacian both use the closed-form kernel.
BoundReport verify_theorem2(const ScenarioConfig& cfg);

struct BlowupRow {
  int n = 0;
  double inner = 0.0;
  double outer = 0.0;
  double channel = 0.0;
  double surface = 0.0;
  double flux_integral = 0.0;
  double interior_value = 0.0;
  double interior_coarse = 0.0;
  double exterior_sup = 0.0;
  double exterior_envelope = 0.0;
  double growth = std::numeric_limits<double>::quiet_NaN();
  bool exterior_pass = false;
  bool trustworthy = true;
};

struct BlowupReport {
  std::vector<BlowupRow> rows;
  double surface_bound = 0.0;
  bool growth_pass = false;
  bool exterior_pass = false;
  bool surface_pass = false;
  int largest_trustworthy_n = 0;
  bool all_pass = false;
};

/// Punctured shells with R1 = R - 2/n, R2 = R - 1/n, epsilon = 1/n: the
/// interior value at |x| = R - 3/n grows without bound while the exterior
/// stays under the Theorem 1 envelope.
BlowupReport run_blowup_study(const ScenarioConfig& cfg);

struct SymmetryReport {
  int probes = 0;
  bool laplacian = true;
  double asymmetry = 0.0;
  double weighted_asymmetry = 0.0;
  /// Plain asymmetry of G_sym = M e^{-Q(y)}.
  double sym_kernel_asymmetry = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Discrete Green's matrix at >= 6 probe points outside D.
SymmetryReport verify_green_symmetry(const ScenarioConfig& cfg);

struct HittingReport {
  CircuitStats stats;
  std::vector<double> expected;
  std::vector<bool> within;
  TwoSidedHittingReport twosided;
  bool all_pass = false;
};

/// Circuit decomposition from a boundary point; for the Laplacian the
/// frequencies are compared with rho^{(2-d)(n-1)}, otherwise with the
/// two-sided bracket from solve_V.
HittingReport run_hitting_law(const ScenarioConfig& cfg);

struct KernelCheck {
  std::string kind;  // "dirichlet" or "free"
  Point z;
  Point center;
  double radius = 0.0;
  double mc = 0.0;
  double se = 0.0;
  double quadrature = 0.0;
  bool pass = false;
};

/// estimate_green_dirichlet against quadrature of the exterior-ball kernel and
/// estimate_occupation against the free kernel, three configurations each.
std::vector<KernelCheck> verify_kernels(const PathConfig& mc, int d = 3);

struct ScaleAudit {
  std::vector<double> scales;
  std::vector<std::vector<double>> ratios;  // per scale, per probe
  double max_deviation = 0.0;
  bool pass = false;
};

/// Lengths scaled by s with h fixed: the dimensionless ratio is unchanged.
ScaleAudit scale_invariance_audit(const ScenarioConfig& cfg, std::vector<double> scales = {0.5, 1.0, 2.0},
                                  double tolerance = 1e-3);

}  // namespace fluxbound
