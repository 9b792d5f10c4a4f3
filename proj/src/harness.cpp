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

#include "fluxbound/harness.hpp"

#include "fluxbound/closedform.hpp"
#include "fluxbound/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fluxbound {

namespace cf = closedform;

namespace {

constexpr double kPi = std::numbers::pi;

Point scenario_axis(const ScenarioConfig& cfg) {
  if (cfg.axis.empty()) return unit_vector(cfg.dimension, cfg.dimension - 1);
  if (static_cast<int>(cfg.axis.size()) != cfg.dimension) throw InvalidInput("axis: wrong number of components");
  Point a(cfg.dimension);
  for (int i = 0; i < cfg.dimension; ++i) a[i] = cfg.axis[i];
  return a;
}

Point embed(int d, std::initializer_list<double> c) {
  Point p = Point::Zero(d);
  int i = 0;
  for (double v : c) {
    if (i < d) p[i] = v;
    ++i;
  }
  return p;
}

double kernel_factor(int d) { return (d - 2) * cf::sphere_area(d); }

/// Flux integrals over the boundary nodes the solver keeps (nodes in enclosed
/// cavities are not part of the exterior problem).
struct ConnectedFlux {
  double plain = 0.0;
  double weighted = 0.0;
  std::vector<Point> starts;
  std::vector<double> weights;
};

ConnectedFlux connected_flux(const ExteriorSolver& solver, const FluxSpec& h) {
  ConnectedFlux f;
  const auto nodes = solver.domain().boundary();
  const auto unk = solver.node_unknowns();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (unk[k] < 0) continue;
    const double hw = h(nodes[k].position) * nodes[k].weight;
    f.plain += hw;
    f.weighted += hw * std::exp(solver.op().weight_exponent(nodes[k].position));
    if (hw > 0.0) {
      f.starts.push_back(nodes[k].position);
      f.weights.push_back(hw);
    }
  }
  return f;
}

SolverOptions finer(SolverOptions o) {
  o.mesh_scale *= 0.5;
  return o;
}

/// Truncation radius large enough that the exact tail applies to everything inside `extent`.
PathConfig with_tail_room(PathConfig mc, double extent) {
  const double m = mc.reentry_radius > 0.0 ? mc.reentry_radius : mc.truncation_radius / 4.0;
  if (m < extent * 1.05) {
    mc.reentry_radius = 0.0;
    mc.truncation_radius = 4.0 * extent * 1.05;
  }
  return mc;
}

double probe_tolerance(double fine, double coarse, double increment) {
  return std::abs(fine - coarse) + increment * std::abs(fine);
}

void finish(BoundReport& rep) {
  rep.all_pass = !rep.rows.empty();
  for (const auto& r : rep.rows) rep.all_pass = rep.all_pass && r.pass;
  if (rep.verdict.empty()) rep.verdict = rep.all_pass ? "pass" : "fail";
}

}  // namespace

Domain build_domain(const ScenarioConfig& cfg) {
  const int d = cfg.dimension;
  if (cfg.shape == "ball") return make_ball(cfg.inner_radius, d, cfg.bounding_radius, cfg.quadrature);
  if (cfg.shape == "shell") {
    return make_shell(cfg.inner_radius, cfg.outer_radius, d, cfg.bounding_radius, cfg.quadrature);
  }
  if (cfg.shape == "punctured_shell") {
    return make_punctured_shell(cfg.inner_radius, cfg.outer_radius, cfg.channel_radius, scenario_axis(cfg),
                                cfg.bounding_radius, d, cfg.quadrature);
  }
  throw InvalidInput("unknown shape '" + cfg.shape + "' (expected ball, shell or punctured_shell)");
}

OperatorSpec build_operator(const ScenarioConfig& cfg) {
  if (cfg.operator_kind == "laplacian") {
    OperatorSpec op = OperatorSpec::laplacian(cfg.dimension);
    return cfg.q_shift != 0.0 ? op.shifted(cfg.q_shift) : op;
  }
  if (cfg.operator_kind == "q_bump") {
    if (cfg.kappa == 0.0) {
      OperatorSpec op = OperatorSpec::laplacian(cfg.dimension);
      return cfg.q_shift != 0.0 ? op.shifted(cfg.q_shift) : op;
    }
    return OperatorSpec::q_bump(cfg.dimension, cfg.kappa, cfg.width_factor * cfg.bounding_radius, cfg.q_shift);
  }
  throw InvalidInput("unknown operator '" + cfg.operator_kind + "' (expected laplacian or q_bump)");
}

FluxSpec build_flux(const ScenarioConfig& cfg) {
  if (cfg.flux_kind == "uniform") return FluxSpec::uniform(cfg.flux_value);
  if (cfg.flux_kind == "hemisphere") return FluxSpec::hemisphere(scenario_axis(cfg), cfg.flux_value);
  throw InvalidInput("unknown flux '" + cfg.flux_kind + "' (expected uniform or hemisphere)");
}

double ball_integral(const std::function<double(const Point&)>& f, const Point& center, double radius,
                     int radial_nodes, QuadratureSpec sphere) {
  const int d = static_cast<int>(center.size());
  const Domain unit = make_ball(1.0, d, 1.0, sphere);
  std::vector<double> rn;
  std::vector<double> rw;
  gauss_legendre(radial_nodes, 0.0, radius, rn, rw);
  double total = 0.0;
  for (std::size_t i = 0; i < rn.size(); ++i) {
    double shell = 0.0;
    for (const auto& node : unit.boundary()) shell += node.weight * f(center + rn[i] * node.position);
    total += rw[i] * std::pow(rn[i], d - 1) * shell;
  }
  return total;
}

BoundReport verify_theorem1(const ScenarioConfig& cfg) {
  const Domain dom = build_domain(cfg);
  const OperatorSpec op = build_operator(cfg);
  if (!op.is_laplacian()) throw InvalidInput("theorem1 needs the Laplacian operator");
  const FluxSpec h = build_flux(cfg);
  h.validate(dom);
  const int d = cfg.dimension;
  const double big_r = cfg.bounding_radius;

  BoundReport rep;
  rep.scenario = cfg.name;
  rep.theorem = "theorem1";
  rep.dimension = d;

  std::vector<Point> probes;
  std::vector<std::pair<double, double>> where;
  for (double g : cfg.gammas) {
    if (!(g > 1.0)) throw InvalidInput("theorem1: gamma must exceed 1");
    for (double th : cfg.probe_angles) {
      probes.push_back(dom.from_polar(g * big_r, th));
      where.emplace_back(g, th);
    }
  }

  const ExteriorSolver coarse(dom, op, cfg.solver);
  const ExteriorSolver fine(dom, op, finer(cfg.solver));
  const MinimalSolution sc = coarse.solve_minimal(h, probes);
  const MinimalSolution sf = fine.solve_minimal(h, probes);
  const ConnectedFlux flux = connected_flux(coarse, h);
  rep.flux_integral = flux.plain;
  const double dropped = total_flux(dom, h) - flux.plain;
  if (dropped > 1e-12 * std::abs(flux.plain)) {
    rep.notes.push_back("flux " + std::to_string(dropped) +
                        " on boundary parts enclosed away from infinity is not part of the exterior problem");
  }

  const GreenMatrix green = coarse.discrete_green(sc.truncations.back(), probes);
  const std::vector<double> repr = boundary_representation(coarse, green, h);

  const std::vector<double>& uc = sc.probe_values.back();
  const std::vector<double>& uf = sf.probe_values.back();
  for (std::size_t k = 0; k < probes.size(); ++k) {
    ProbeRow row;
    row.x = probes[k];
    row.radius = probes[k].norm();
    row.gamma = where[k].first;
    row.angle = where[k].second;
    row.u = uf[k];
    row.u_coarse = uc[k];
    row.discretization_tol = probe_tolerance(uf[k], uc[k], sf.achieved_increment);
    row.u_representation = repr[k];
    const double factor = kernel_factor(d) * std::pow(row.radius, d - 2) / flux.plain;
    row.value = row.u * factor;
    row.tolerance = row.discretization_tol * factor;
    const auto bc = cf::bound_constants(row.radius / big_r, d);
    row.lower = bc.c_minus;
    row.upper = bc.c_plus;
    row.margin = std::min(row.value - row.lower, row.upper - row.value);
    const bool tol_ok = row.tolerance <= 0.05 * (row.upper - row.lower);
    row.pass = tol_ok && row.value >= row.lower - row.tolerance && row.value <= row.upper + row.tolerance;
    if (std::abs(repr[k] - sc.field.cell_value(probes[k])) > 1e-6 * std::abs(uc[k])) {
      row.pass = false;
      rep.notes.push_back("boundary representation disagrees with the direct solve at probe " + std::to_string(k));
    }
    if (!tol_ok) rep.notes.push_back("discretisation tolerance exceeds 5% of the envelope width at probe " + std::to_string(k));
    rep.rows.push_back(row);
  }

  if (cfg.mc_crosscheck) {
    // One probe per gamma: u(x) equals its mean over a ball A around x, and
    // by the symmetry of the kernel that mean is S / |A| times the expected
    // occupation of A for paths started on the boundary with density h.
    const std::size_t per_gamma = cfg.probe_angles.size();
    for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
      ProbeRow& row = rep.rows[g * per_gamma];
      const double a_radius = 0.5 * std::min(row.radius - dom.outer_extent(), big_r);
      const Region a = Region::ball(row.x, a_radius);
      PathConfig mc = with_tail_room(cfg.mc, a.max_radius());
      mc.samples = cfg.crosscheck_samples;
      mc.seed = cfg.mc.seed + 1000 + g;
      const OccupationEstimate est = estimate_occupation_from(&dom, op, flux.starts, flux.weights, a, mc);
      const double scale = flux.plain / a.volume();
      row.mc = est.mean * scale;
      row.mc_se = est.standard_error * scale;
      row.mc_pass = std::abs(row.mc - row.u) <= 3.0 * row.mc_se + row.discretization_tol;
      row.pass = row.pass && row.mc_pass;
    }
  }
  finish(rep);
  return rep;
}

BoundReport verify_theorem2(const ScenarioConfig& cfg) {
  const Domain dom = build_domain(cfg);
  const OperatorSpec op = build_operator(cfg);
  const FluxSpec h = build_flux(cfg);
  h.validate(dom);
  const int d = cfg.dimension;
  const double big_r = cfg.bounding_radius;
  const double r_prime = cfg.r_prime_factor * big_r;
  if (!(r_prime > big_r)) throw InvalidInput("theorem2: R' must exceed R");
  if (cfg.sphere_samples < 2) throw InvalidInput("theorem2: need at least 2 sphere samples");

  BoundReport rep;
  rep.scenario = cfg.name;
  rep.theorem = "theorem2";
  rep.dimension = d;
  rep.r_prime = r_prime;

  std::vector<Point> probes;
  for (double f : cfg.theorem2_radius_factors) {
    if (!(f * big_r > r_prime)) throw InvalidInput("theorem2: probes must satisfy |x| > R'");
    probes.push_back(dom.from_polar(f * big_r, 0.0));
  }
  const ExteriorSolver coarse(dom, op, cfg.solver);
  const ExteriorSolver fine(dom, op, finer(cfg.solver));
  const MinimalSolution sc = coarse.solve_minimal(h, probes);
  const MinimalSolution sf = fine.solve_minimal(h, probes);
  const ConnectedFlux flux = connected_flux(coarse, h);
  rep.flux_integral = flux.weighted;

  // V on the sphere R'.
  if (op.is_laplacian()) {
    rep.v_min = rep.v_max = std::pow(big_r / r_prime, d - 2);
  } else {
    const VSolution vc = solve_V(big_r, op, r_prime, cfg.solver);
    const VSolution vf = solve_V(big_r, op, r_prime, finer(cfg.solver));
    rep.v_min = vf.min_on_sphere;
    rep.v_max = vf.max_on_sphere;
    rep.v_tol = std::max(std::abs(vf.min_on_sphere - vc.min_on_sphere), std::abs(vf.max_on_sphere - vc.max_on_sphere)) +
                vf.solution.achieved_increment * vf.max_on_sphere;
  }
  const double lo_den = 1.0 - std::max(0.0, rep.v_min - rep.v_tol);
  const double hi_den = 1.0 - (rep.v_max + rep.v_tol);
  if (!(hi_den > 0.0)) throw NumericalFailure("theorem2: max V on the sphere R' is not below 1");

  // Sphere samples z_k at polar angles from the probe direction. The operator
  // is radial, so G(z, x) depends on the angle only and is extremal at 0 and pi.
  const Domain ref = make_ball(big_r, d, big_r, QuadratureSpec{2, 3, 1});
  std::vector<double> angles;
  for (int k = 0; k < cfg.sphere_samples; ++k) angles.push_back(kPi * k / (cfg.sphere_samples - 1));

  const std::vector<double>& uc = sc.probe_values.back();
  const std::vector<double>& uf = sf.probe_values.back();
  double worst_rel_se = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    ProbeRow row;
    row.x = probes[p];
    row.radius = probes[p].norm();
    row.gamma = row.radius / big_r;
    row.u = uf[p];
    row.u_coarse = uc[p];
    row.discretization_tol = probe_tolerance(uf[p], uc[p], sf.achieved_increment);
    row.value = row.u;
    const double weight = flux.weighted * std::exp(-op.weight_exponent(row.x));

    const Point pole = ref.from_polar(row.radius, 0.0);
    std::vector<Point> zs;
    for (double th : angles) zs.push_back(ref.from_polar(r_prime, th));
    const std::vector<double> g_pde = dirichlet_green_pde(big_r, op, pole, zs, cfg.solver);
    const auto [pmin, pmax] = std::minmax_element(g_pde.begin(), g_pde.end());
    row.lower_alt = weight * *pmin / lo_den;
    row.upper_alt = weight * *pmax / hi_den;

    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -gmin;
    if (op.is_laplacian()) {
      for (const Point& z : zs) {
        const double g = cf::dirichlet_green_exterior_ball(z, pole, big_r);
        gmin = std::min(gmin, g);
        gmax = std::max(gmax, g);
      }
    } else {
      const double a_radius = 0.5 * std::min(row.radius - r_prime, big_r);
      const Region a = Region::ball(pole, a_radius);
      PathConfig mc = with_tail_room(cfg.mc, std::max(a.max_radius(), op.free_radius()));
      for (std::size_t k = 0; k < zs.size(); ++k) {
        mc.seed = cfg.mc.seed + 2000 + 100 * p + k;
        const OccupationEstimate est = estimate_green_dirichlet(zs[k], a, big_r, op, mc);
        const double g = est.mean / a.volume();
        const double se = est.standard_error / a.volume();
        worst_rel_se = std::max(worst_rel_se, g > 0.0 ? se / g : 1.0);
        gmin = std::min(gmin, g - 3.0 * se);
        gmax = std::max(gmax, g + 3.0 * se);
        if (k == 0) {
          row.mc = g;
          row.mc_se = se;
        }
      }
      gmin = std::max(gmin, 0.0);
    }
    row.lower = weight * gmin / lo_den;
    row.upper = weight * gmax / hi_den;
    row.tolerance = row.discretization_tol;
    row.margin = std::min(row.value - row.lower, row.upper - row.value);
    const bool primary = row.value >= row.lower - row.tolerance && row.value <= row.upper + row.tolerance;
    const bool secondary = row.value >= row.lower_alt - row.tolerance && row.value <= row.upper_alt + row.tolerance;
    row.pass = primary && secondary;
    rep.rows.push_back(row);
  }
  finish(rep);
  if (!op.is_laplacian() && worst_rel_se > 0.1) {
    rep.verdict = "inconclusive";
    rep.notes.push_back("Monte Carlo relative standard error " + std::to_string(worst_rel_se) +
                        " too large; about " +
                        std::to_string(static_cast<long long>(cfg.mc.samples * std::pow(worst_rel_se / 0.05, 2))) +
                        " samples per sphere point are needed");
  }
  return rep;
}

BlowupReport run_blowup_study(const ScenarioConfig& cfg) {
  if (cfg.dimension != 3) throw InvalidInput("blow-up study: punctured shells need d = 3");
  const int d = cfg.dimension;
  const double big_r = cfg.bounding_radius;
  const OperatorSpec op = OperatorSpec::laplacian(d);
  const FluxSpec h = build_flux(cfg);
  const Point axis = scenario_axis(cfg);
  const double ext_radius = cfg.blowup_exterior_factor * big_r;

  BlowupReport rep;
  rep.surface_bound = 2.1 * cf::sphere_area(d) * std::pow(big_r, d - 1);
  std::vector<int> ns = cfg.blowup_n;
  std::sort(ns.begin(), ns.end());
  for (int n : ns) {
    if (n < 4) throw InvalidInput("blow-up study: n must be at least 4");
    BlowupRow row;
    row.n = n;
    row.inner = big_r * (1.0 - 2.0 / n);
    row.outer = big_r * (1.0 - 1.0 / n);
    row.channel = big_r / n;
    const Domain dom = make_punctured_shell(row.inner, row.outer, row.channel, axis, big_r, d, cfg.quadrature);
    row.surface = surface_measure(dom);

    // Interior probe, then 9 points on each exterior sphere; the reported
    // sup and envelope are those of the outer sphere, both spheres are checked.
    const std::vector<double> ext_radii{std::min(1.5, cfg.blowup_exterior_factor) * big_r, ext_radius};
    std::vector<Point> probes{dom.from_polar(big_r * (1.0 - 3.0 / n), kPi / 2)};
    for (double r : ext_radii) {
      for (int k = 0; k <= 8; ++k) probes.push_back(dom.from_polar(r, kPi * k / 8));
    }
    const ExteriorSolver coarse(dom, op, cfg.solver);
    const ExteriorSolver fine(dom, op, finer(cfg.solver));
    const MinimalSolution sc = coarse.solve_minimal(h, probes);
    const MinimalSolution sf = fine.solve_minimal(h, probes);
    const auto& uc = sc.probe_values.back();
    const auto& uf = sf.probe_values.back();
    row.flux_integral = connected_flux(fine, h).plain;
    row.interior_value = uf[0];
    row.interior_coarse = uc[0];
    row.trustworthy = std::abs(uf[0] - uc[0]) <= 0.1 * std::abs(uf[0]);
    row.exterior_pass = true;
    for (std::size_t s = 0; s < ext_radii.size(); ++s) {
      const double gamma = ext_radii[s] / big_r;
      const double envelope =
          row.flux_integral * cf::c_plus(gamma, d) * std::pow(ext_radii[s], 2 - d) / kernel_factor(d);
      for (int k = 0; k <= 8; ++k) {
        const std::size_t i = 1 + 9 * s + k;
        const double tol = probe_tolerance(uf[i], uc[i], sf.achieved_increment);
        row.exterior_pass = row.exterior_pass && uf[i] <= envelope + tol;
        if (s + 1 == ext_radii.size()) row.exterior_sup = std::max(row.exterior_sup, uf[i]);
      }
      row.exterior_envelope = envelope;
    }
    if (!rep.rows.empty()) row.growth = row.interior_value / rep.rows.back().interior_value;
    rep.rows.push_back(row);
  }
  rep.growth_pass = rep.rows.size() >= 2;
  rep.exterior_pass = !rep.rows.empty();
  rep.surface_pass = !rep.rows.empty();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    if (i > 0) rep.growth_pass = rep.growth_pass && r.growth >= 1.5;
    rep.exterior_pass = rep.exterior_pass && r.exterior_pass;
    rep.surface_pass = rep.surface_pass && r.surface <= rep.surface_bound;
    if (r.trustworthy && (i == 0 || rep.largest_trustworthy_n == rep.rows[i - 1].n)) rep.largest_trustworthy_n = r.n;
  }
  rep.all_pass = rep.growth_pass && rep.exterior_pass && rep.surface_pass;
  return rep;
}

SymmetryReport verify_green_symmetry(const ScenarioConfig& cfg) {
  const Domain dom = build_domain(cfg);
  const OperatorSpec op = build_operator(cfg);
  const double big_r = cfg.bounding_radius;
  std::vector<Point> probes;
  for (double f : {1.5, 2.0, 3.0}) {
    for (double th : {0.4, 2.2}) probes.push_back(dom.from_polar(f * big_r, th));
  }
  const ExteriorSolver solver(dom, op, cfg.solver);
  const auto& ns = solver.truncations();
  const GreenMatrix g = solver.discrete_green(ns[std::min<std::size_t>(2, ns.size() - 1)], probes);
  SymmetryReport rep;
  rep.probes = static_cast<int>(probes.size());
  rep.laplacian = op.is_laplacian();
  rep.asymmetry = g.asymmetry();
  rep.weighted_asymmetry = g.weighted_asymmetry();
  const Eigen::MatrixXd s = g.symmetric_kernel();
  rep.sym_kernel_asymmetry = (s - s.transpose()).norm() / s.norm();
  rep.tolerance = rep.laplacian ? 1e-10 : 1e-8;
  rep.pass = rep.laplacian ? rep.asymmetry < rep.tolerance
                           : rep.weighted_asymmetry < rep.tolerance && rep.sym_kernel_asymmetry < rep.tolerance;
  return rep;
}

HittingReport run_hitting_law(const ScenarioConfig& cfg) {
  const Domain dom = build_domain(cfg);
  const OperatorSpec op = build_operator(cfg);
  const int d = cfg.dimension;
  const double big_r = cfg.bounding_radius;
  const double rho = cfg.hitting_rho;
  const Point x = dom.from_polar(dom.outer_extent(), kPi / 2);
  const Region a = Region::ball(dom.from_polar((rho + 3.0) * big_r, 0.0), 0.5 * big_r);
  const double extent = std::max({rho * big_r, a.max_radius(), op.is_laplacian() ? 0.0 : op.free_radius()});
  const PathConfig mc = with_tail_room(cfg.mc, extent);

  HittingReport rep;
  rep.stats = circuit_decomposition(dom, op, x, rho, big_r, a, mc, cfg.hitting_circuits);
  double v_min = 0.0;
  double v_max = 0.0;
  if (op.is_laplacian()) {
    v_min = v_max = std::pow(rho, 2 - d);
  } else {
    const VSolution v = solve_V(big_r, op, rho * big_r, cfg.solver);
    v_min = v.min_on_sphere;
    v_max = v.max_on_sphere;
  }
  rep.twosided = verify_twosided_hitting(rep.stats, v_min, v_max);
  rep.all_pass = rep.twosided.all_pass && rep.stats.budget_exhausted == 0;
  for (int n = 1; n <= cfg.hitting_circuits; ++n) {
    const double expected = std::pow(v_max, n - 1);
    const double p = rep.stats.survival_frequency(n);
    const double se = rep.stats.survival_standard_error(n);
    const bool ok = op.is_laplacian() ? std::abs(p - expected) <= 3.0 * se + 1e-15 : rep.twosided.pass[n - 1];
    rep.expected.push_back(expected);
    rep.within.push_back(ok);
    rep.all_pass = rep.all_pass && ok;
    if (n > 1) rep.all_pass = rep.all_pass && rep.stats.survival[n - 1] <= rep.stats.survival[n - 2];
  }
  return rep;
}

std::vector<KernelCheck> verify_kernels(const PathConfig& mc_in, int d) {
  const OperatorSpec op = OperatorSpec::laplacian(d);
  const double big_r = 1.0;
  struct Case {
    const char* kind;
    Point z;
    Point c;
    double r;
  };
  const std::vector<Case> cases{
      {"dirichlet", embed(d, {2, 0, 0}), embed(d, {5, 0, 0}), 1.0},
      {"dirichlet", embed(d, {1.5, 0, 0}), embed(d, {0, 2.5, 0}), 0.5},
      {"dirichlet", embed(d, {3, 0, 0}), embed(d, {-3, 0, 0}), 1.0},
      {"free", embed(d, {0, 0, 0}), embed(d, {5, 0, 0}), 0.5},
      {"free", embed(d, {1, 0, 0}), embed(d, {0, 2, 0}), 0.5},
      {"free", embed(d, {0, 0, 1}), embed(d, {0, 0, -2}), 1.0},
  };
  std::vector<KernelCheck> out;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const Case& c = cases[k];
    const Region a = Region::ball(c.c, c.r);
    PathConfig mc = with_tail_room(mc_in, a.max_radius());
    mc.seed = mc_in.seed + 3000 + k;
    KernelCheck kc;
    kc.kind = c.kind;
    kc.z = c.z;
    kc.center = c.c;
    kc.radius = c.r;
    OccupationEstimate est;
    if (kc.kind == "dirichlet") {
      est = estimate_green_dirichlet(c.z, a, big_r, op, mc);
      kc.quadrature = ball_integral(
          [&](const Point& y) { return cf::dirichlet_green_exterior_ball(c.z, y, big_r); }, c.c, c.r);
    } else {
      est = estimate_occupation(nullptr, op, c.z, a, mc);
      kc.quadrature = ball_integral([&](const Point& y) { return cf::free_green(c.z, y); }, c.c, c.r);
    }
    kc.mc = est.mean;
    kc.se = est.standard_error;
    kc.pass = std::abs(kc.mc - kc.quadrature) <= 3.0 * kc.se && est.budget_exhausted == 0;
    out.push_back(kc);
  }
  return out;
}

ScaleAudit scale_invariance_audit(const ScenarioConfig& cfg, std::vector<double> scales, double tolerance) {
  ScaleAudit audit;
  audit.scales = scales;
  const int d = cfg.dimension;
  for (double s : scales) {
    if (!(s > 0.0)) throw InvalidInput("scale factors must be positive");
    ScenarioConfig c = cfg;
    c.inner_radius *= s;
    c.outer_radius *= s;
    c.channel_radius *= s;
    c.bounding_radius *= s;
    const Domain dom = build_domain(c);
    const OperatorSpec op = build_operator(c);
    const FluxSpec h = build_flux(c);
    std::vector<Point> probes;
    for (double g : c.gammas) {
      for (double th : c.probe_angles) probes.push_back(dom.from_polar(g * c.bounding_radius, th));
    }
    const ExteriorSolver solver(dom, op, c.solver);
    const MinimalSolution sol = solver.solve_minimal(h, probes);
    const double flux = connected_flux(solver, h).plain;
    std::vector<double> ratios;
    for (std::size_t k = 0; k < probes.size(); ++k) {
      ratios.push_back(sol.probe_values.back()[k] * kernel_factor(d) * std::pow(probes[k].norm(), d - 2) / flux);
    }
    audit.ratios.push_back(ratios);
  }
  for (std::size_t i = 1; i < audit.ratios.size(); ++i) {
    for (std::size_t k = 0; k < audit.ratios[i].size(); ++k) {
      const double ref = audit.ratios[0][k];
      audit.max_deviation = std::max(audit.max_deviation, std::abs(audit.ratios[i][k] - ref) / std::abs(ref));
    }
  }
  audit.pass = !audit.ratios.empty() && audit.max_deviation <= tolerance;
  return audit;
}

}  // namespace fluxbound
