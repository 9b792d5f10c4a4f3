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
#include "fluxbound/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fluxbound;
namespace cf = fluxbound::closedform;

namespace {

ScenarioConfig ball_scenario() {
  ScenarioConfig c;
  c.name = "ball";
  c.mc_crosscheck = false;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("builders reject unknown selectors") {
    ScenarioConfig c = ball_scenario();
    c.shape = "torus";
    CHECK_THROWS_AS(build_domain(c), InvalidInput);
    c = ball_scenario();
    c.operator_kind = "heat";
    CHECK_THROWS_AS(build_operator(c), InvalidInput);
    c = ball_scenario();
    c.flux_kind = "random";
    CHECK_THROWS_AS(build_flux(c), InvalidInput);
  }

  TEST_CASE("ball integral of simple functions") {
    const Point c = make_point({1, 2, 3});
    CHECK(ball_integral([](const Point&) { return 1.0; }, c, 0.5) ==
          doctest::Approx(cf::unit_ball_volume(3) * 0.125).epsilon(1e-12));
    CHECK(ball_integral([&](const Point& y) { return (y - c).squaredNorm(); }, c, 1.0) ==
          doctest::Approx(4.0 * std::numbers::pi / 5.0).epsilon(1e-10));
  }

  TEST_CASE("theorem 1 on the unit ball: ratio equals one inside the envelope") {
    const BoundReport rep = verify_theorem1(ball_scenario());
    REQUIRE(rep.rows.size() == 9);
    CHECK(rep.all_pass);
    CHECK(rep.verdict == "pass");
    for (const auto& r : rep.rows) {
      CHECK(r.value == doctest::Approx(1.0).epsilon(1e-2));
      CHECK(r.lower == doctest::Approx(cf::c_minus(r.gamma, 3)));
      CHECK(r.upper == doctest::Approx(cf::c_plus(r.gamma, 3)));
      CHECK(r.margin > 0.0);
    }
  }

  TEST_CASE("doubling h doubles u and keeps verdicts") {
    ScenarioConfig c = ball_scenario();
    c.flux_kind = "hemisphere";
    c.gammas = {2.0, 4.0};
    const BoundReport a = verify_theorem1(c);
    c.flux_value = 2.0;
    const BoundReport b = verify_theorem1(c);
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      CHECK(b.rows[k].u == doctest::Approx(2.0 * a.rows[k].u).epsilon(1e-9));
      CHECK(b.rows[k].pass == a.rows[k].pass);
    }
  }

  TEST_CASE("envelope width shrinks along the gamma grid") {
    double prev = 1e300;
    for (double g : ball_scenario().gammas) {
      const auto bc = cf::bound_constants(g, 3);
      CHECK(bc.c_plus - bc.c_minus < prev);
      prev = bc.c_plus - bc.c_minus;
    }
  }

  TEST_CASE("theorem 2 with Q = 0 reduces to the Laplacian bracket") {
    ScenarioConfig c = ball_scenario();
    c.operator_kind = "q_bump";
    c.kappa = 0.0;
    const BoundReport rep = verify_theorem2(c);
    CHECK(rep.v_min == doctest::Approx(std::pow(1.0 / 1.5, 1.0)));
    CHECK(rep.all_pass);
    for (const auto& r : rep.rows) {
      CHECK(r.lower <= r.u);
      CHECK(r.u <= r.upper);
    }
  }

  TEST_CASE("scale invariance of the normalised ratio") {
    ScenarioConfig c = ball_scenario();
    c.shape = "shell";
    c.inner_radius = 0.5;
    c.outer_radius = 0.9;
    c.gammas = {2.0, 4.0};
    c.probe_angles = {0.3};
    const ScaleAudit a = scale_invariance_audit(c);
    CHECK(a.pass);
    CHECK(a.max_deviation < 1e-3);
  }

  TEST_CASE("Green symmetry report") {
    const SymmetryReport s = verify_green_symmetry(ball_scenario());
    CHECK(s.probes >= 6);
    CHECK(s.pass);
  }
}
