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
#include "fluxbound/montecarlo.hpp"

#include <doctest.h>

#include <cmath>

using namespace fluxbound;
namespace cf = fluxbound::closedform;

TEST_SUITE("montecarlo") {
  TEST_CASE("quadratic variation of free paths is 2 d t") {
    const OperatorSpec op = OperatorSpec::laplacian(3);
    PathConfig cfg;
    cfg.sphere_jumps = false;
    cfg.seed = 11;
    Accumulator acc;
    const Point x = make_point({0.3, -0.2, 0.1});
    for (std::uint64_t i = 0; i < 4000; ++i) {
      const PathRecord rec = simulate_reflected_path(nullptr, op, x, cfg, i, 1.0);
      REQUIRE(rec.times.back() == doctest::Approx(1.0));
      acc.add((rec.points.back() - x).squaredNorm());
    }
    CHECK(std::abs(acc.mean() - 6.0) < 3.0 * acc.standard_error());
  }

  TEST_CASE("reflected paths stay outside the obstacle") {
    const Domain b = make_ball(1.0, 3);
    const OperatorSpec op = OperatorSpec::laplacian(3);
    PathConfig cfg;
    for (std::uint64_t i = 0; i < 20; ++i) {
      const PathRecord rec = simulate_reflected_path(&b, op, b.from_polar(1.0, 0.5), cfg, i, 2.0);
      for (const Point& p : rec.points) CHECK(b.signed_distance(p) >= -1e-9);
    }
  }

  TEST_CASE("hit probability of the unit ball from radius 2") {
    const Domain b = make_ball(1.0, 3);
    PathConfig cfg;
    cfg.samples = 20000;
    const auto est = estimate_hit_prob(&b, OperatorSpec::laplacian(3), b.from_polar(2.0, 1.0), 1.0, cfg);
    CHECK(std::abs(est.mean - 0.5) < 3.0 * est.standard_error);
    CHECK(est.truncation_corrected);
    CHECK(est.budget_exhausted == 0);
  }

  TEST_CASE("estimates are deterministic and independent of the thread count") {
    const Domain b = make_ball(1.0, 3);
    PathConfig cfg;
    cfg.samples = 3000;
    cfg.seed = 5;
    const Point x = b.from_polar(3.0, 0.0);
    const auto a1 = estimate_hit_prob(&b, OperatorSpec::laplacian(3), x, 2.0, cfg);
    cfg.threads = 3;
    const auto a3 = estimate_hit_prob(&b, OperatorSpec::laplacian(3), x, 2.0, cfg);
    CHECK(a1.mean == a3.mean);
    CHECK(a1.standard_error == a3.standard_error);
    cfg.seed = 6;
    const auto b1 = estimate_hit_prob(&b, OperatorSpec::laplacian(3), x, 2.0, cfg);
    CHECK(a1.mean != b1.mean);
  }

  TEST_CASE("free occupation matches the free kernel") {
    PathConfig cfg;
    cfg.samples = 20000;
    cfg.seed = 3;
    const Region a = Region::ball(make_point({2.0, 0, 0}), 0.5);
    const Point z = make_point({0, 0, 0});
    const auto est = estimate_occupation(nullptr, OperatorSpec::laplacian(3), z, a, cfg);
    const double exact = ball_integral([&](const Point& y) { return cf::free_green(z, y); }, a.center, 0.5);
    CHECK(std::abs(est.mean - exact) < 3.0 * est.standard_error);
  }

  TEST_CASE("circuit survival halves per circuit at rho = 2") {
    const Domain b = make_ball(1.0, 3);
    PathConfig cfg;
    cfg.samples = 4000;
    cfg.seed = 9;
    const Region a = Region::ball(b.from_polar(5.0, 0.0), 0.5);
    const CircuitStats st = circuit_decomposition(b, OperatorSpec::laplacian(3), b.from_polar(1.0, 1.0), 2.0, 1.0, a, cfg, 3);
    CHECK(st.survival_frequency(1) == 1.0);
    for (int n = 2; n <= 3; ++n) {
      CHECK(std::abs(st.survival_frequency(n) - std::pow(0.5, n - 1)) < 3.0 * st.survival_standard_error(n));
    }
    CHECK(st.return_leg_occupation == 0.0);
    CHECK(st.max_partition_defect < 1e-9);
    const auto two = verify_twosided_hitting(st, 0.5, 0.5);
    CHECK(two.all_pass);
  }

  TEST_CASE("region helpers") {
    const Region s = Region::shell(3, 1.0, 2.0);
    CHECK(s.contains(make_point({1.5, 0, 0})));
    CHECK_FALSE(s.contains(make_point({0.5, 0, 0})));
    CHECK(s.volume() == doctest::Approx(4.0 / 3.0 * 3.141592653589793 * 7.0));
    const Region b = Region::ball(make_point({3, 0, 0}), 1.0);
    CHECK(b.max_radius() == doctest::Approx(4.0));
    CHECK(b.min_radius() == doctest::Approx(2.0));
  }

  TEST_CASE("invalid inputs") {
    const Domain b = make_ball(1.0, 3);
    PathConfig cfg;
    CHECK_THROWS_AS(estimate_hit_prob(&b, OperatorSpec::laplacian(3), b.from_polar(0.5, 0.0), 1.0, cfg), InvalidInput);
    cfg.dt = -1.0;
    CHECK_THROWS_AS(estimate_hit_prob(&b, OperatorSpec::laplacian(3), b.from_polar(2.0, 0.0), 1.0, cfg), InvalidInput);
  }
}
