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
#include "fluxbound/operator.hpp"
#include "fluxbound/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fluxbound {

struct PathConfig {
  /// Time step at feature distance `length_scale`. The actual step is
  /// dt * clamp((feature distance / length_scale)^2, min_step_fraction, max_step_fraction),
  /// where features are the obstacle boundary, target spheres and the boundary of A.
  /// Where the operator has drift the step is also capped by
  /// dt (w / length_scale)^2 / min(1, w |drift|), w the operator length scale.
  double dt = 1e-3;
  double length_scale = 1.0;
  double min_step_fraction = 1e-2;
  double max_step_fraction = 1e6;
  /// Truncation radius N. Beyond it the path either escapes or re-enters B_M.
  double truncation_radius = 32.0;
  /// Re-entry sphere radius M; 0 selects N / 4. The operator must be the
  /// Laplacian outside B_M.
  double reentry_radius = 0.0;
  /// When false, paths are killed at N and a truncation bias bound is reported instead.
  bool exact_tail = true;
  /// Where the operator is the Laplacian and the ball of radius equal to the
  /// feature distance misses A, the path jumps to a uniform point on that
  /// sphere (the exact exit law) instead of taking time steps.
  bool sphere_jumps = true;
  /// Feature distance below which time steps are used; 0 selects
  /// 3 sqrt(2 dt min_step_fraction) length_scale.
  double jump_threshold = 0.0;
  std::uint64_t max_steps = 50'000'000;
  std::uint64_t seed = 1;
  std::uint64_t samples = 10'000;
  int threads = 1;
};

/// Ball {|y - center| <= outer} or origin-centred shell {inner <= |y| <= outer}.
struct Region {
  enum class Kind { ball, shell };
  Kind kind = Kind::ball;
  Point center;
  double inner = 0.0;
  double outer = 1.0;

  static Region ball(const Point& center, double radius);
  static Region shell(int d, double inner, double outer);

  bool contains(const Point& x) const;
  double boundary_distance(const Point& x) const;
  double max_radius() const;
  double min_radius() const;
  double volume() const;
};

/// Mergeable running mean and variance (Chan et al. pairwise update).
class Accumulator {
 public:
  void add(double x);
  void merge(const Accumulator& other);
  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / (n_ - 1) : 0.0; }
  double standard_error() const;

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct OccupationEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  /// True when the estimator targets N = infinity (exact re-entry or
  /// conditional hitting value); false when a bias bound applies.
  bool truncation_corrected = false;
  double truncation_bias_bound = 0.0;
  std::uint64_t escapes = 0;
  std::uint64_t reentries = 0;
  std::uint64_t budget_exhausted = 0;
  std::uint64_t steps = 0;
};

struct PathRecord {
  std::vector<Point> points;
  std::vector<double> times;
  bool escaped = false;
  bool budget_exhausted = false;
  std::uint64_t steps = 0;
  /// Largest penetration into D seen before reflection (always resolved).
  double max_penetration = 0.0;
};

/// One reflected path from `start`, recorded point by point, up to the time
/// horizon, escape beyond N (no re-entry), or the step budget. `dom` may be
/// null for free space.
PathRecord simulate_reflected_path(const Domain* dom, const OperatorSpec& op, const Point& start,
                                   const PathConfig& cfg, std::uint64_t path_index,
                                   double time_horizon = 0.0);

/// P_x(the diffusion reflected at D ever enters the closed ball of radius R_target).
OccupationEstimate estimate_hit_prob(const Domain* dom, const OperatorSpec& op, const Point& x,
                                     double target_radius, const PathConfig& cfg);

/// E_x of the total time spent in A by the diffusion reflected at D.
OccupationEstimate estimate_occupation(const Domain* dom, const OperatorSpec& op, const Point& x,
                                       const Region& a, const PathConfig& cfg);

/// Same, with the start drawn from the points with probabilities proportional to `weights`.
OccupationEstimate estimate_occupation_from(const Domain* dom, const OperatorSpec& op,
                                            const std::vector<Point>& starts,
                                            const std::vector<double>& weights, const Region& a,
                                            const PathConfig& cfg);

/// E_z of the time spent in A before entering the closed ball B_R (no obstacle).
OccupationEstimate estimate_green_dirichlet(const Point& z, const Region& a, double radius,
                                            const OperatorSpec& op, const PathConfig& cfg);

struct CircuitStats {
  double rho = 0.0;
  double radius = 0.0;
  std::uint64_t paths = 0;
  /// survival[n-1]: paths with tau_{2n-1} finite, n = 1..max_circuits.
  std::vector<std::uint64_t> survival;
  /// Mean over all paths of the time in A during [tau_{2n-1}, tau_{2n}], with standard errors.
  std::vector<double> circuit_occupation;
  std::vector<double> circuit_occupation_se;
  /// Time in A during the return legs [tau_{2n}, tau_{2n+1}]; zero by containment.
  double return_leg_occupation = 0.0;
  double total_occupation = 0.0;
  double total_occupation_se = 0.0;
  /// Largest |total - sum over circuits| over single paths.
  double max_partition_defect = 0.0;
  /// Entry points on the sphere of radius rho R, up to a fixed count per index.
  std::vector<std::vector<Point>> entry_points;
  std::uint64_t budget_exhausted = 0;

  double survival_frequency(int n) const;
  double survival_standard_error(int n) const;
};

/// Alternating hitting times of the spheres rho R (odd) and R (even) for the
/// diffusion reflected at D started at x on the boundary of D.
CircuitStats circuit_decomposition(const Domain& dom, const OperatorSpec& op, const Point& x, double rho,
                                   double radius, const Region& a, const PathConfig& cfg,
                                   int max_circuits = 6);

struct TwoSidedHittingReport {
  std::vector<int> index;
  std::vector<double> frequency;
  std::vector<double> standard_error;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> pass;
  std::vector<bool> skipped;
  bool all_pass = true;
};

/// Checks (min V)^{n-1} <= P_y(tau_{2n-1} < infinity) <= (max V)^{n-1}
/// within 3 standard errors, where V is over the sphere R'.
TwoSidedHittingReport verify_twosided_hitting(const CircuitStats& stats, double v_min, double v_max,
                                              std::uint64_t min_survivors = 100);

}  // namespace fluxbound
