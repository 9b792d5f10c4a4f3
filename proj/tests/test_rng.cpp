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

#include "fluxbound/rng.hpp"
#include "fluxbound/montecarlo.hpp"

#include <doctest.h>

#include <cmath>

using namespace fluxbound;

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known answers") {
    using B = Philox4x32::Block;
    CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(Philox4x32::bijection(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(Philox4x32::bijection(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("streams are reproducible and distinct") {
    Philox4x32 a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 100; ++i) {
      const double x = a.uniform();
      CHECK(x == b.uniform());
      CHECK(x != c.uniform());
      CHECK(x > 0.0);
      CHECK(x < 1.0);
    }
  }

  TEST_CASE("normal moments") {
    Philox4x32 g(1, 0);
    Accumulator m1, m2;
    for (int i = 0; i < 200000; ++i) {
      const double z = g.normal();
      m1.add(z);
      m2.add(z * z);
    }
    CHECK(std::abs(m1.mean()) < 4.0 * m1.standard_error());
    CHECK(std::abs(m2.mean() - 1.0) < 4.0 * m2.standard_error());
  }

  TEST_CASE("accumulator merge equals sequential accumulation") {
    Accumulator all, left, right;
    for (int i = 0; i < 1000; ++i) {
      const double v = std::sin(0.37 * i) * i;
      all.add(v);
      (i < 377 ? left : right).add(v);
    }
    left.merge(right);
    CHECK(left.count() == all.count());
    CHECK(left.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
    CHECK(left.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
  }
}
