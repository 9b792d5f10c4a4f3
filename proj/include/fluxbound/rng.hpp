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

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fluxbound {

/// Philox4x32-10 counter-based generator. A stream is identified by
/// (seed, stream id); draws advance the upper half of the counter, so
/// streams never overlap and need no shared state.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        counter_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0, 0} {}

  static Block bijection(Block ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

  Block next_block() {
    const Block out = bijection(counter_, key_);
    if (++counter_[2] == 0) ++counter_[3];
    return out;
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() {
    if (buffered_uniforms_ == 0) {
      const Block b = next_block();
      uniform_buffer_[0] = to_unit(b[0], b[1]);
      uniform_buffer_[1] = to_unit(b[2], b[3]);
      buffered_uniforms_ = 2;
    }
    return uniform_buffer_[--buffered_uniforms_];
  }

  /// Standard normal by Box-Muller.
  double normal() {
    if (has_normal_) {
      has_normal_ = false;
      return spare_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_normal_ = true;
    return radius * std::cos(angle);
  }

 private:
  static double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
  Block counter_;
  double uniform_buffer_[2] = {0.0, 0.0};
  int buffered_uniforms_ = 0;
  double spare_normal_ = 0.0;
  bool has_normal_ = false;
};

}  // namespace fluxbound
