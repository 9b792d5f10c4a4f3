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

#include "fluxbound/harness.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fluxbound {

/// Malformed scenario file, missing required key or bad value. The message names the key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a sectioned key = value scenario file. Keys carry their unit or kind
/// as a suffix (inner_radius_length, dt_time, gammas_ratio, ...); the accepted
/// keys are listed in README.md. Unknown sections and keys are rejected.
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

/// Canonical text form: every key, fixed order, values printed round-trip exact.
/// parse_scenario(format_scenario(c)) reproduces c.
std::string format_scenario(const ScenarioConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

}  // namespace fluxbound
