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

#include <iosfwd>
#include <string>
#include <vector>

namespace fluxbound {

/// Subcommands: bounds, solve, mc, verify, blowup, report.
/// Returns 0 when every check passes, 1 on a failed check or numerical
/// failure, 2 on a usage or configuration error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Environment variable naming the default output root.
inline constexpr const char* kOutputEnv = "FLUXBOUND_OUT";

}  // namespace fluxbound
