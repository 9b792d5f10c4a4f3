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

#include "fluxbound/closedform.hpp"
#include "fluxbound/pde_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fluxbound;
using std::numbers::pi;

TEST_SUITE("pde_solver") {
  TEST_CASE("radial oracle: u = R^2 / |x| for the unit ball with unit flux") {
    const Domain b = make_ball(1.0, 3);
    const ExteriorSolver solver(b, OperatorSpec::laplacian(3));
    const std::vector<Point> probes{b.from_polar(2.0, 0.3), b.from_polar(4.0, 1.5), b.from_polar(8.0, 2.9)};
    const MinimalSolution sol = solver.solve_minimal(FluxSpec::uniform(1.0), probes);
    for (std::size_t k = 0; k < probes.size(); ++k) {
      CHECK(sol.probe_values.back()[k] == doctest::Approx(1.0 / probes[k].norm()).epsilon(1e-2));
    }
    CHECK(sol.achieved_increment <= 1e-4);
  }

  TEST_CASE("discrete maximum principle and monotone truncation") {
    const Domain s = make_punctured_shell(0.5, 0.9, 0.1, unit_vector(3, 2), 1.0);
    const ExteriorSolver solver(s, OperatorSpec::laplacian(3));
    const FluxSpec h = FluxSpec::uniform(1.0);
    const double n = solver.truncations().front();
    const GridField u1 = solver.solve_truncated(h, n);
    const GridField u2 = solver.solve_truncated(h, 2 * n);
    const GridField u4 = solver.solve_truncated(h, 4 * n);
    for (const GridField* f : {&u1, &u2, &u4}) CHECK(f->max_value().second == CellKind::flux_boundary);
    int violations = 0;
    for (int i = 0; i < u1.radial_cells(); ++i) {
      for (int j = 0; j < u1.mesh().polar_cells(); ++j) {
        if (u1.kind(i, j) == CellKind::inactive) continue;
        violations += u1.value(i, j) > u2.value(i, j) + 1e-12;
        violations += u2.value(i, j) > u4.value(i, j) + 1e-12;
      }
    }
    CHECK(violations == 0);
    CHECK(u1.min_value() >= 0.0);
  }

  TEST_CASE("Green matrix symmetry") {
    std::vector<Point> probes;
    const Domain b = make_ball(1.0, 3);
    for (double r : {1.5, 2.0, 3.0}) {
      for (double t : {0.4, 2.2}) probes.push_back(b.from_polar(r, t));
    }
    const ExteriorSolver lap(b, OperatorSpec::laplacian(3));
    const GreenMatrix g = lap.discrete_green(lap.truncations()[1], probes);
    CHECK(g.asymmetry() < 1e-10);

    const ExteriorSolver bump(b, OperatorSpec::q_bump(3, 0.5, 1.0));
    const GreenMatrix gq = bump.discrete_green(bump.truncations()[1], probes);
    CHECK(gq.weighted_asymmetry() < 1e-8);
    CHECK(gq.asymmetry() > 1e-4);
    const Eigen::MatrixXd s = gq.symmetric_kernel();
    CHECK((s - s.transpose()).norm() / s.norm() < 1e-8);
  }

  TEST_CASE("boundary representation reproduces the direct solve") {
    const Domain b = make_shell(0.5, 0.9, 3, 1.0);
    const ExteriorSolver solver(b, OperatorSpec::laplacian(3));
    const std::vector<Point> probes{b.from_polar(2.0, 0.2), b.from_polar(4.0, 2.0)};
    const FluxSpec h = FluxSpec::hemisphere(unit_vector(3, 2), 1.0);
    const double n = solver.truncations()[1];
    const GridField u = solver.solve_truncated(h, n);
    const GreenMatrix g = solver.discrete_green(n, probes);
    const auto rep = boundary_representation(solver, g, h);
    for (std::size_t k = 0; k < probes.size(); ++k) {
      CHECK(rep[k] == doctest::Approx(u.cell_value(probes[k])).epsilon(1e-8));
    }
  }

  TEST_CASE("shell cavity flux is dropped") {
    const Domain s = make_shell(0.5, 0.9, 3, 1.0);
    const ExteriorSolver solver(s, OperatorSpec::laplacian(3));
    CHECK(solver.dropped_flux(FluxSpec::uniform(1.0)) == doctest::Approx(4.0 * pi * 0.25).epsilon(1e-10));
  }

  TEST_CASE("hitting function V of the ball") {
    const VSolution v = solve_V(1.0, OperatorSpec::laplacian(3), 2.0);
    CHECK(v.min_on_sphere == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(v.max_on_sphere == doctest::Approx(0.5).epsilon(1e-2));
    const VSolution vq = solve_V(1.0, OperatorSpec::q_bump(3, 0.5, 1.0), 1.5);
    CHECK(vq.min_on_sphere > 0.0);
    CHECK(vq.max_on_sphere < 1.0);
  }

  TEST_CASE("exterior-ball Green's function against the image formula") {
    const Point pole = make_point({0, 0, 3.0});
    const std::vector<Point> zs{make_point({0, 0, 1.5}), make_point({1.5, 0, 0}), make_point({0, 0, -1.5})};
    const auto g = dirichlet_green_pde(1.0, OperatorSpec::laplacian(3), pole, zs);
    for (std::size_t k = 0; k < zs.size(); ++k) {
      CHECK(g[k] == doctest::Approx(closedform::dirichlet_green_exterior_ball(zs[k], pole, 1.0)).epsilon(3e-2));
    }
  }

  TEST_CASE("constant shift of Q leaves u unchanged") {
    const Domain b = make_ball(1.0, 3);
    const std::vector<Point> probes{b.from_polar(3.0, 0.0), b.from_polar(5.0, 1.0)};
    const OperatorSpec q0 = OperatorSpec::q_bump(3, 0.5, 1.0);
    const OperatorSpec q1 = OperatorSpec::q_bump(3, 0.5, 1.0, 1.7);
    const FluxSpec h = FluxSpec::uniform(1.0);
    const auto u0 = ExteriorSolver(b, q0).solve_minimal(h, probes).probe_values.back();
    const auto u1 = ExteriorSolver(b, q1).solve_minimal(h, probes).probe_values.back();
    for (std::size_t k = 0; k < probes.size(); ++k) CHECK(u1[k] == doctest::Approx(u0[k]).epsilon(1e-9));
    auto q0f = [&](const Point& x) { return q0.weight_exponent(x); };
    auto q1f = [&](const Point& x) { return q1.weight_exponent(x); };
    const double s0 = weighted_total_flux(b, h, q0f) * std::exp(-q0.weight_exponent(probes[0]));
    const double s1 = weighted_total_flux(b, h, q1f) * std::exp(-q1.weight_exponent(probes[0]));
    CHECK(s1 == doctest::Approx(s0).epsilon(1e-12));
  }

  TEST_CASE("compatibility: non-zero total flux diverges, dipole converges") {
    const auto bad = neumann_compatibility_check(1.0, 3, FluxSpec::uniform(1.0));
    CHECK(bad.verdict == "incompatible");
    const FluxSpec dipole("dipole", [](const Point& y) { return y[2] / y.norm(); });
    const auto good = neumann_compatibility_check(1.0, 3, dipole);
    CHECK(good.verdict == "compatible");
  }
}
