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

// Acceptance run: one pass/fail line per criterion. Exit status 0 only when all pass.

#include "fluxbound/cli.hpp"
#include "fluxbound/closedform.hpp"
#include "fluxbound/config.hpp"
#include "fluxbound/harness.hpp"
#include "fluxbound/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace fluxbound;
namespace cf = fluxbound::closedform;
namespace fs = std::filesystem;

namespace {

ScenarioConfig scenario(const std::string& name) {
  return load_scenario(std::string(FLUXBOUND_SCENARIO_DIR) + "/" + name + ".cfg");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::vector<int> selected;  // empty: run all

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !o.pass;
  std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << title << "  [" << o.detail
            << "; " << num(secs) << " s]" << std::endl;
}

// 1: solve_minimal on the unit ball with h = 1 against R^2 / |x|.
Outcome radial_exactness() {
  const Domain b = make_ball(1.0, 3);
  const ExteriorSolver solver(b, OperatorSpec::laplacian(3));
  std::vector<Point> probes;
  for (double r : {2.0, 4.0, 8.0}) probes.push_back(b.from_polar(r, 1.0));
  const MinimalSolution sol = solver.solve_minimal(FluxSpec::uniform(1.0), probes);
  const double s = total_flux(b, FluxSpec::uniform(1.0));
  double worst_u = 0.0, worst_ratio = 0.0;
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const double r = probes[k].norm();
    const double u = sol.probe_values.back()[k];
    worst_u = std::max(worst_u, std::abs(u * r - 1.0));
    worst_ratio = std::max(worst_ratio, std::abs(u * 4.0 * std::numbers::pi * r / s - 1.0));
  }
  return {worst_u <= 0.01 && worst_ratio <= 0.01,
          "max rel error u " + num(worst_u) + ", ratio " + num(worst_ratio) + " (tol 0.01)"};
}

// 2: Theorem 1 sandwich on the ball, shell and punctured shell.
Outcome theorem1_sandwich() {
  int probes = 0, violations = 0, mc_bad = 0;
  double worst_tol = 0.0;
  for (const char* name : {"radial", "shell", "punctured"}) {
    ScenarioConfig c = scenario(name);
    const BoundReport rep = verify_theorem1(c);
    for (const auto& r : rep.rows) {
      ++probes;
      violations += !r.pass;
      mc_bad += !r.mc_pass;
      worst_tol = std::max(worst_tol, r.tolerance / (r.upper - r.lower));
    }
  }
  return {violations == 0 && probes == 27, std::to_string(probes) + " probes, " + std::to_string(violations) +
                                               " violations, " + std::to_string(mc_bad) +
                                               " MC disagreements, max tol/width " + num(worst_tol) + " (<= 0.05)"};
}

// 3: closed-form constants.
Outcome constants() {
  bool ok = std::abs(cf::c_plus(10, 3) - 2.1389) <= 1e-3 && std::abs(cf::c_minus(10, 3) - 0.6335) <= 1e-3;
  std::string detail = "c+(10) " + num(cf::c_plus(10, 3)) + ", c-(10) " + num(cf::c_minus(10, 3));
  double worst_rho = 0.0;
  for (double g : {4.0, 10.0, 100.0}) {
    double best = 1.0, fbest = -1.0;
    const int m = 1'000'000;
    for (int i = 1; i < m; ++i) {
      const double r = 1.0 + (g - 1.0) * i / m;
      const double f = (1.0 - 1.0 / r) * (g - r);
      if (f > fbest) fbest = f, best = r;
    }
    worst_rho = std::max({worst_rho, std::abs(best - std::sqrt(g)), std::abs(cf::rho_star(g, 3) - std::sqrt(g))});
  }
  ok = ok && worst_rho <= 1e-3;
  bool mono = true;
  for (int e = 1; e < 6; ++e) {
    const double g0 = std::pow(10.0, e), g1 = 10.0 * g0;
    mono = mono && cf::c_plus(g1, 3) < cf::c_plus(g0, 3) && cf::c_minus(g1, 3) > cf::c_minus(g0, 3);
  }
  const double gap = std::max(cf::c_plus(1e6, 3) - 1.0, 1.0 - cf::c_minus(1e6, 3));
  ok = ok && mono && gap < 0.01;
  return {ok, detail + ", rho* grid error " + num(worst_rho) + ", monotone " + (mono ? "yes" : "no") +
                  ", |c-1| at 1e6 " + num(gap)};
}

// 4: hitting law from the unit sphere with rho = 2.
Outcome hitting_law() {
  const ScenarioConfig c = scenario("hitting");
  const auto t0 = std::chrono::steady_clock::now();
  const HittingReport h = run_hitting_law(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string d = std::to_string(h.stats.paths) + " paths:";
  bool ok = h.stats.paths >= 100000 && secs <= 300.0;
  for (int n = 1; n <= 4; ++n) {
    const double p = h.stats.survival_frequency(n);
    const double se = h.stats.survival_standard_error(n);
    const double e = std::pow(0.5, n - 1);
    ok = ok && std::abs(p - e) <= 3.0 * se + 1e-15;
    d += " n=" + std::to_string(n) + " " + num(p) + "+-" + num(se);
  }
  return {ok && h.all_pass, d};
}

// 5: discrete Green's matrix symmetry.
Outcome green_symmetry() {
  const SymmetryReport lap = verify_green_symmetry(scenario("radial"));
  const SymmetryReport q = verify_green_symmetry(scenario("qbump"));
  return {lap.pass && q.pass && lap.asymmetry < 1e-10 && q.weighted_asymmetry < 1e-8 && lap.probes >= 6,
          "Laplacian asymmetry " + num(lap.asymmetry) + " (< 1e-10), Q-bump weighted " +
              num(q.weighted_asymmetry) + " (< 1e-8), plain " + num(q.asymmetry)};
}

// 6: Monte Carlo kernels against quadrature.
Outcome kernels() {
  PathConfig mc;
  mc.samples = 20000;
  mc.seed = 17;
  const auto checks = verify_kernels(mc, 3);
  int dir = 0, fr = 0;
  std::string d;
  for (const auto& k : checks) {
    (k.kind == "dirichlet" ? dir : fr) += k.pass;
    d += " " + k.kind.substr(0, 3) + " " + num((k.mc - k.quadrature) / k.se) + "se";
  }
  return {dir == 3 && fr == 3, std::to_string(dir) + "/3 Dirichlet, " + std::to_string(fr) + "/3 free;" + d};
}

// 7: punctured-shell blow-up with exterior bound.
Outcome blowup() {
  const BlowupReport b = run_blowup_study(scenario("blowup"));
  std::string d;
  for (const auto& r : b.rows) d += " n=" + std::to_string(r.n) + " u=" + num(r.interior_value);
  d += "; min growth ";
  double g = 1e300, surf = 0.0;
  for (const auto& r : b.rows) {
    if (std::isfinite(r.growth)) g = std::min(g, r.growth);
    surf = std::max(surf, r.surface);
  }
  d += num(g) + " (>= 1.5), max surface " + num(surf) + " <= " + num(b.surface_bound) +
       ", exterior " + (b.exterior_pass ? "bounded" : "EXCEEDS") + ", trustworthy to n=" +
       std::to_string(b.largest_trustworthy_n);
  return {b.all_pass && b.rows.size() == 4, d};
}

// 8: interior Neumann compatibility.
Outcome compatibility() {
  const auto bad = neumann_compatibility_check(1.0, 3, FluxSpec::uniform(1.0));
  const FluxSpec dipole("dipole", [](const Point& y) { return y[2] / y.norm(); });
  const auto good = neumann_compatibility_check(1.0, 3, dipole);
  std::string d = "uniform:";
  for (double v : bad.center_values) d += " " + num(v);
  d += " (" + bad.verdict + "); dipole:";
  for (double v : good.center_values) d += " " + num(v);
  d += " (" + good.verdict + ")";
  return {bad.verdict == "incompatible" && good.verdict == "compatible", d};
}

// 9: Theorem 2 bracket and its Q = 0 degeneration.
Outcome theorem2() {
  const BoundReport q = verify_theorem2(scenario("qbump"));
  std::string d = "verdict " + q.verdict + ":";
  for (const auto& r : q.rows) {
    d += " |x|=" + num(r.radius) + " u=" + num(r.u) + " in [" + num(r.lower) + "," + num(r.upper) + "] pde [" +
         num(r.lower_alt) + "," + num(r.upper_alt) + "]";
  }
  ScenarioConfig z = scenario("radial");
  z.operator_kind = "q_bump";
  z.kappa = 0.0;
  z.mc_crosscheck = false;
  const BoundReport q0 = verify_theorem2(z);
  ScenarioConfig t1cfg = scenario("radial");
  t1cfg.mc_crosscheck = false;
  const BoundReport t1 = verify_theorem1(t1cfg);
  const bool same = q0.all_pass == t1.all_pass;
  d += "; Q=0 verdict " + q0.verdict + " vs theorem 1 " + t1.verdict;
  return {q.verdict == "pass" && same && q0.all_pass, d};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Largest error over active cells of the truncated ball problem, whose exact
// solution is R^2 (1/r - 1/n).
double truncated_error(double mesh_scale, double n) {
  SolverOptions o;
  o.mesh_scale = mesh_scale;
  o.linear_tolerance = 1e-12;
  const Domain b = make_ball(1.0, 3);
  const ExteriorSolver solver(b, OperatorSpec::laplacian(3), o);
  const GridField f = solver.solve_truncated(FluxSpec::uniform(1.0), n);
  double err = 0.0;
  for (int i = 0; i < f.radial_cells(); ++i) {
    for (int j = 0; j < f.mesh().polar_cells(); ++j) {
      if (f.kind(i, j) == CellKind::inactive) continue;
      const double r = f.mesh().r_center(i);
      err = std::max(err, std::abs(f.value(i, j) - (1.0 / r - 1.0 / n)));
    }
  }
  return err;
}

// 10: determinism, grid convergence order, time-step sensitivity.
Outcome hygiene() {
  std::string d;
  // Byte-identical outputs for a fixed seed.
  const fs::path root = fs::path(FLUXBOUND_TEST_TMP) / "acceptance_determinism";
  fs::remove_all(root);
  const std::string cfg = std::string(FLUXBOUND_SCENARIO_DIR) + "/radial.cfg";
  std::ostringstream sink;
  const int c1 = dispatch({"verify", "--scenario", cfg, "--seed", "7", "--out", (root / "a").string()}, sink, sink);
  const int c2 = dispatch({"verify", "--scenario", cfg, "--seed", "7", "--out", (root / "b").string()}, sink, sink);
  bool same = c1 == 0 && c2 == 0;
  for (const char* f : {"bounds.csv", "envelope.svg"}) {
    same = same && slurp(root / "a" / "radial" / f) == slurp(root / "b" / "radial" / f);
  }
  same = same && reproducible_part(load_manifest((root / "a" / "radial" / "manifest.json").string())) ==
                     reproducible_part(load_manifest((root / "b" / "radial" / "manifest.json").string()));
  d += std::string("seed 7 twice: ") + (same ? "identical" : "DIFFERENT");

  // Grid convergence on the radial problem.
  const double n = 8.0;
  const double e1 = truncated_error(1.0, n);
  const double e2 = truncated_error(0.5, n);
  const double e4 = truncated_error(0.25, n);
  const double order = std::log2(e1 / e2);
  const double order2 = std::log2(e2 / e4);
  d += "; grid errors " + num(e1) + ", " + num(e2) + ", " + num(e4) + " order " + num(order) + ", " + num(order2);
  const bool conv = order >= 1.8 && order2 >= 1.8;

  // Halving dt: Monte Carlo benchmarks move by less than 2 combined standard errors.
  const Domain b = make_ball(1.0, 3);
  PathConfig mc;
  mc.samples = 40000;
  mc.seed = 23;
  PathConfig half = mc;
  half.dt *= 0.5;
  const Region a = Region::ball(make_point({0, 0, 2.5}), 0.5);
  struct Bench {
    std::string name;
    std::function<OccupationEstimate(const PathConfig&)> run;
  };
  const OperatorSpec lap = OperatorSpec::laplacian(3);
  const OperatorSpec bump = OperatorSpec::q_bump(3, 0.5, 1.0);
  const std::vector<Bench> benches{
      {"hit", [&](const PathConfig& c) { return estimate_hit_prob(&b, lap, b.from_polar(3.0, 1.0), 1.5, c); }},
      {"occ", [&](const PathConfig& c) { return estimate_occupation(&b, lap, b.from_polar(1.0, 0.5), a, c); }},
      {"qhit", [&](const PathConfig& c) { return estimate_hit_prob(&b, bump, b.from_polar(3.0, 1.0), 1.5, c); }},
  };
  bool dt_ok = true;
  for (const auto& bench : benches) {
    const auto x = bench.run(mc);
    const auto y = bench.run(half);
    const double z = std::abs(x.mean - y.mean) / std::hypot(x.standard_error, y.standard_error);
    dt_ok = dt_ok && z < 2.0;
    d += "; " + bench.name + " shift " + num(z) + " se";
  }
  return {same && conv && dt_ok, d};
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  std::cout << "fluxbound acceptance run" << std::endl;
  criterion(1, "radial exactness", radial_exactness);
  criterion(2, "Theorem 1 sandwich on ball, shell, punctured shell", theorem1_sandwich);
  criterion(3, "envelope constants", constants);
  criterion(4, "hitting law at rho = 2", hitting_law);
  criterion(5, "Green symmetry", green_symmetry);
  criterion(6, "kernel agreement", kernels);
  criterion(7, "blow-up with exterior boundedness", blowup);
  criterion(8, "compatibility divergence", compatibility);
  criterion(9, "Theorem 2 bracket", theorem2);
  criterion(10, "determinism and convergence hygiene", hygiene);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
