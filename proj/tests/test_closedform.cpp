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

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fluxbound;
namespace cf = fluxbound::closedform;
using std::numbers::pi;

TEST_SUITE("closedform") {
  TEST_CASE("sphere areas and ball volumes") {
    CHECK(cf::sphere_area(3) == doctest::Approx(4.0 * pi).epsilon(1e-14));
    CHECK(cf::sphere_area(4) == doctest::Approx(2.0 * pi * pi).epsilon(1e-14));
    CHECK(cf::sphere_area(5) == doctest::Approx(8.0 * pi * pi / 3.0).epsilon(1e-14));
    CHECK(cf::unit_ball_volume(3) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
    for (int d = 3; d <= 8; ++d) CHECK(cf::unit_ball_volume(d) == doctest::Approx(cf::sphere_area(d) / d));
    CHECK_THROWS_AS(cf::sphere_area(2), InvalidInput);
  }

  TEST_CASE("free kernel") {
    CHECK(cf::free_green(make_point({0, 0, 0}), make_point({1, 0, 0})) == doctest::Approx(1.0 / (4.0 * pi)));
    CHECK(cf::free_green(make_point({0, 0, 0}), make_point({0, 2, 0})) == doctest::Approx(1.0 / (8.0 * pi)));
    CHECK(cf::free_green(make_point({0, 0, 0, 0}), make_point({1, 0, 0, 0})) ==
          doctest::Approx(1.0 / (4.0 * pi * pi)));
  }

  TEST_CASE("exterior-ball kernel vanishes on the sphere and is symmetric") {
    const Point x = make_point({2.0, 0.3, -0.4});
    const Point y = make_point({-1.1, 2.5, 0.7});
    const Point s = make_point({0.6, 0.0, 0.8});
    CHECK(std::abs(cf::dirichlet_green_exterior_ball(Point((1.0 + 1e-10) * s), y, 1.0)) < 1e-10);
    CHECK_THROWS_AS(cf::dirichlet_green_exterior_ball(0.5 * s, y, 1.0), InvalidInput);
    CHECK(cf::dirichlet_green_exterior_ball(x, y, 1.0) == doctest::Approx(cf::dirichlet_green_exterior_ball(y, x, 1.0)));
    CHECK(cf::dirichlet_green_exterior_ball(x, y, 1.0) > 0.0);
    CHECK(cf::dirichlet_green_exterior_ball(x, y, 1.0) < cf::free_green(x, y));
  }

  TEST_CASE("hitting probabilities") {
    CHECK(cf::hit_prob_ball(2.0, 1.0, 3) == doctest::Approx(0.5));
    CHECK(cf::hit_prob_ball(3.0, 1.5, 4) == doctest::Approx(0.25));
    CHECK(cf::annulus_hit_prob(2.0, 1.0, 4.0, 3) == doctest::Approx(1.0 / 3.0));
    CHECK(cf::annulus_hit_prob(1.0, 1.0, 4.0, 3) == doctest::Approx(1.0));
    CHECK(cf::annulus_hit_prob(4.0, 1.0, 4.0, 3) == doctest::Approx(0.0));
  }

  TEST_CASE("envelope constants at gamma 10") {
    CHECK(cf::rho_star(10.0, 3) == doctest::Approx(std::sqrt(10.0)).epsilon(1e-9));
    CHECK(std::abs(cf::c_plus(10.0, 3) - 2.1389) < 1e-3);
    CHECK(std::abs(cf::c_minus(10.0, 3) - 0.6335) < 1e-3);
    const auto bc = cf::bound_constants(10.0, 3);
    CHECK(bc.c_minus_closed_form);
    CHECK(bc.c_plus == doctest::Approx(cf::c_plus(10.0, 3)));
  }

  TEST_CASE("rho_star maximises the circuit factor") {
    for (double g : {4.0, 10.0, 100.0}) {
      auto f = [g](double r) { return (1.0 - 1.0 / r) * (g - r); };
      double best = 1.0, fbest = -1.0;
      for (int i = 1; i < 200000; ++i) {
        const double r = 1.0 + (g - 1.0) * i / 200000.0;
        if (f(r) > fbest) fbest = f(r), best = r;
      }
      CHECK(std::abs(best - cf::rho_star(g, 3)) < 1e-3);
      CHECK(std::abs(best - std::sqrt(g)) < 1e-3);
    }
  }

  TEST_CASE("constants tend to one monotonically") {
    double prev_plus = 1e300, prev_minus = -1.0;
    for (int e = 1; e <= 6; ++e) {
      const double g = std::pow(10.0, e);
      const double cp = cf::c_plus(g, 3);
      const double cm = cf::c_minus(g, 3);
      CHECK(cp > 1.0);
      CHECK(cm < 1.0);
      CHECK(cp < prev_plus);
      CHECK(cm > prev_minus);
      prev_plus = cp;
      prev_minus = cm;
    }
    CHECK(prev_plus - 1.0 < 0.01);
    CHECK(1.0 - prev_minus < 0.01);
  }

  TEST_CASE("lower constant stays positive below gamma0") {
    const double g0 = cf::gamma0(3);
    CHECK(g0 > 1.0);
    CHECK(cf::c_minus_closed_form(g0 * 1.01, 3) > 0.0);
    CHECK(cf::c_minus_closed_form(1.0 + 0.5 * (g0 - 1.0), 3) <= 0.0);
    for (double g : {1.1, 1.5, 0.5 * (1.0 + g0)}) {
      CHECK(cf::c_minus(g, 3) > 0.0);
      CHECK_FALSE(cf::bound_constants(g, 3).c_minus_closed_form);
    }
  }

  TEST_CASE("pointwise lower envelope holds") {
    for (double g : {4.0, 10.0, 30.0}) {
      const double rho = cf::rho_star(g, 3);
      const double lower = cf::lower_envelope_ratio(g, rho, 3);
      for (double yr : {g, 1.5 * g, 4.0 * g}) {
        for (double a : {0.0, 0.7, 1.9, 3.14159}) {
          const Point z = make_point({rho, 0, 0});
          const Point y = make_point({yr * std::cos(a), yr * std::sin(a), 0});
          const double v = 4.0 * pi * cf::dirichlet_green_exterior_ball(z, y, 1.0) * yr;
          CHECK(v >= lower - 1e-12);
        }
      }
    }
  }

  TEST_CASE("radial kernel shell integral") {
    CHECK(cf::radial_kernel_shell_integral(1.0, 2.0, 3) == doctest::Approx(1.5));
    CHECK(cf::radial_kernel_shell_integral(0.0, 1.0, 4) == doctest::Approx(0.25));
  }
}
