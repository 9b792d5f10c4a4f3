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

#include "fluxbound/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace fluxbound;
using std::numbers::pi;

TEST_SUITE("geometry") {
  TEST_CASE("ball surface and signed distance") {
    const Domain b = make_ball(1.0, 3);
    CHECK(surface_measure(b) == doctest::Approx(4.0 * pi).epsilon(1e-12));
    CHECK(b.signed_distance(make_point({2, 0, 0})) == doctest::Approx(1.0));
    CHECK(b.signed_distance(make_point({0, 0.5, 0})) == doctest::Approx(-0.5));
    CHECK(b.outer_extent() == doctest::Approx(1.0));
    const Domain b5 = make_ball(2.0, 5);
    CHECK(surface_measure(b5) == doctest::Approx(8.0 * pi * pi / 3.0 * 16.0).epsilon(1e-10));
  }

  TEST_CASE("shell surface counts both spheres") {
    const Domain s = make_shell(0.5, 0.9, 3, 1.0);
    CHECK(surface_measure(s) == doctest::Approx(4.0 * pi * (0.25 + 0.81)).epsilon(1e-12));
    CHECK(s.signed_distance(make_point({0, 0, 0})) == doctest::Approx(0.5));
    CHECK(s.signed_distance(make_point({0.7, 0, 0})) == doctest::Approx(-0.2));
    CHECK_FALSE(exterior_connected(s, 0.02));
  }

  TEST_CASE("punctured shell surface and connectivity") {
    const double r1 = 0.5, r2 = 0.9, eps = 0.1;
    const Domain p = make_punctured_shell(r1, r2, eps, unit_vector(3, 2), 1.0);
    auto cap = [eps](double rho) { return 2.0 * pi * rho * rho * (1.0 - std::sqrt(1.0 - eps * eps / (rho * rho))); };
    const double wall = 2.0 * pi * eps * (std::sqrt(r2 * r2 - eps * eps) - std::sqrt(r1 * r1 - eps * eps));
    const double expected = 4.0 * pi * (r1 * r1 + r2 * r2) - cap(r1) - cap(r2) + wall;
    CHECK(surface_measure(p) == doctest::Approx(expected).epsilon(2e-3));
    CHECK(exterior_connected(p, 0.01));
    // The channel is open: points on its axis between the spheres are outside D.
    CHECK(p.signed_distance(make_point({0, 0, 0.7})) > 0.0);
    CHECK(p.signed_distance(make_point({0, 0, -0.7})) < 0.0);
  }

  TEST_CASE("boundary normals point away from D") {
    const Domain p = make_punctured_shell(0.5, 0.9, 0.1, unit_vector(3, 2), 1.0, 3, QuadratureSpec{16, 16, 8});
    for (const auto& node : p.boundary()) {
      CHECK(std::abs(node.normal.norm() - 1.0) < 1e-12);
      CHECK(p.signed_distance(node.position + 1e-6 * node.normal) > 0.0);
      CHECK(node.weight > 0.0);
    }
  }

  TEST_CASE("polar coordinates round trip") {
    const Domain b = make_ball(1.0, 4);
    const Point x = b.from_polar(2.5, 1.1);
    const auto [r, th] = b.to_polar(x);
    CHECK(r == doctest::Approx(2.5));
    CHECK(th == doctest::Approx(1.1));
  }

  TEST_CASE("flux specifications") {
    const Domain b = make_ball(1.0, 3);
    CHECK(total_flux(b, FluxSpec::uniform(2.0)) == doctest::Approx(8.0 * pi).epsilon(1e-12));
    CHECK(total_flux(b, FluxSpec::hemisphere(unit_vector(3, 2), 1.0)) == doctest::Approx(2.0 * pi).epsilon(5e-3));
    CHECK_THROWS_AS(FluxSpec::uniform(-1.0).validate(b), InvalidInput);
    CHECK_THROWS_AS(FluxSpec::uniform(0.0).validate(b), InvalidInput);
  }

  TEST_CASE("invalid shapes are rejected") {
    CHECK_THROWS_AS(make_ball(-1.0, 3), InvalidInput);
    CHECK_THROWS_AS(make_shell(0.9, 0.5, 3), InvalidInput);
    CHECK_THROWS_AS(make_punctured_shell(0.5, 0.9, 0.6, unit_vector(3, 2), 1.0), InvalidInput);
    CHECK_THROWS_AS(make_punctured_shell(0.5, 0.9, 0.1, unit_vector(4, 3), 1.0, 4), InvalidInput);
    CHECK_THROWS_AS(make_ball(1.0, 2), InvalidInput);
  }

  TEST_CASE("boundary dump has one line per node") {
    const Domain b = make_ball(1.0, 3, 1.0, QuadratureSpec{4, 6, 1});
    std::ostringstream out;
    dump_boundary(b, out);
    int lines = 0;
    for (char c : out.str()) lines += c == '\n';
    CHECK(lines >= static_cast<int>(b.boundary().size()));
  }
}
