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

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fluxbound {

/// Everything one scenario produced. Suites that did not run stay empty.
struct ScenarioResults {
  ScenarioConfig config;
  std::vector<BoundReport> bounds;
  std::optional<BlowupReport> blowup;
  std::optional<SymmetryReport> symmetry;
  std::optional<HittingReport> hitting;
  std::vector<KernelCheck> kernels;
  std::optional<ScaleAudit> scale;
  /// Shrinking-puncture checks for the scenario flux and for a zero-mean dipole flux.
  std::optional<CompatibilityReport> compatibility;
  std::optional<CompatibilityReport> compatibility_dipole;

  bool all_pass() const;
};

/// Runs the suites listed in cfg.suites.
ScenarioResults run_suites(const ScenarioConfig& cfg);

struct RunInfo {
  std::string subcommand;
  int threads = 1;
  double wall_time_seconds = 0.0;
};

/// Run manifest: schema tag, tool version, subcommand, canonical config text
/// and its FNV-1a hash, seeds, resolutions, tolerances, results, the list of
/// emitted files and the wall time. Layout documented in README.md.
nlohmann::json make_manifest(const ScenarioResults& results, const RunInfo& info);

/// Writes, for each manifest, the files of its scenario into out_dir/<name>/:
/// bounds.csv and envelope.svg (bound suites), blowup.csv and blowup.svg,
/// hitting.csv and hitting.svg, checks.csv (symmetry, kernels, scale,
/// compatibility) and manifest.json. Everything is rendered before anything is
/// written. Throws InvalidInput on an empty list and std::runtime_error when the
/// directory cannot be written. Returns the written paths.
std::vector<std::string> emit_report(const std::vector<nlohmann::json>& manifests, const std::string& out_dir);

/// Reads a manifest.json written by emit_report.
nlohmann::json load_manifest(const std::string& path);

/// The manifest with the wall time removed, for reproducibility comparisons.
nlohmann::json reproducible_part(nlohmann::json manifest);

}  // namespace fluxbound
