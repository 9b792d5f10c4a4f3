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

#include "fluxbound/cli.hpp"

#include "fluxbound/closedform.hpp"
#include "fluxbound/config.hpp"
#include "fluxbound/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fluxbound {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string scenario;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool needs_scenario) {
  auto* s = cmd->add_option("--scenario", c.scenario, "scenario config file");
  if (needs_scenario) s->required();
  cmd->add_option("--seed", c.seed, "base seed for Monte Carlo paths")->each([&c](const std::string&) {
    c.seed_set = true;
  });
  cmd->add_option("--threads", c.threads, "worker threads (results depend on the count only through chunking)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "output root directory");
}

ScenarioConfig scenario_from(const Common& c) {
  ScenarioConfig cfg = load_scenario(c.scenario);
  if (c.seed_set) cfg.mc.seed = c.seed;
  if (c.threads > 0) cfg.mc.threads = c.threads;
  return cfg;
}

std::string output_root(const Common& c, const ScenarioConfig* cfg) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
  if (cfg && !cfg->output_dir.empty()) return cfg->output_dir;
  return "fluxbound-out";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string exact(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (ec || !out) throw std::runtime_error("output directory not writable: " + path.parent_path().string());
  out << body;
}

json base_manifest(const ScenarioConfig& cfg, const std::string& sub, const std::vector<std::string>& files) {
  const std::string text = format_scenario(cfg);
  return {{"schema", "fluxbound-manifest/1"},
          {"tool_version", FLUXBOUND_VERSION},
          {"subcommand", sub},
          {"scenario", cfg.name},
          {"config_hash", hex64(fnv1a(text))},
          {"config", text},
          {"seeds", {{"montecarlo", cfg.mc.seed}}},
          {"threads", cfg.mc.threads},
          {"resolutions",
           {{"mesh_scale", cfg.solver.mesh_scale},
            {"relative_spacing", cfg.solver.relative_spacing},
            {"polar_spacing", cfg.solver.polar_spacing},
            {"dt", cfg.mc.dt},
            {"truncation_radius", cfg.mc.truncation_radius},
            {"samples", cfg.mc.samples}}},
          {"files", files}};
}

std::vector<Point> theorem1_probes(const ScenarioConfig& cfg, const Domain& dom) {
  std::vector<Point> probes;
  for (double g : cfg.gammas) {
    for (double th : cfg.probe_angles) probes.push_back(dom.from_polar(g * cfg.bounding_radius, th));
  }
  return probes;
}

int run_bounds(int d, const std::vector<double>& gammas, std::ostream& out) {
  out << "gamma,rho_star,c_minus,c_plus,c_minus_closed_form\n";
  for (double g : gammas) {
    const auto bc = closedform::bound_constants(g, d);
    out << g6(g) << "," << g6(bc.rho_star) << "," << g6(bc.c_minus) << "," << g6(bc.c_plus) << ","
        << (bc.c_minus_closed_form ? "yes" : "no") << "\n";
  }
  return 0;
}

int run_solve(const Common& c, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = scenario_from(c);
  const Domain dom = build_domain(cfg);
  const OperatorSpec op = build_operator(cfg);
  const FluxSpec h = build_flux(cfg);
  h.validate(dom);
  const std::vector<Point> probes = theorem1_probes(cfg, dom);
  const ExteriorSolver solver(dom, op, cfg.solver);
  const MinimalSolution sol = solver.solve_minimal(h, probes);

  std::ostringstream csv;
  csv << "truncation,increment";
  for (std::size_t k = 0; k < probes.size(); ++k) csv << ",u" << k;
  csv << "\n";
  for (std::size_t t = 0; t < sol.truncations.size(); ++t) {
    csv << exact(sol.truncations[t]) << "," << (t == 0 ? std::string("nan") : exact(sol.increments[t - 1]));
    for (double v : sol.probe_values[t]) csv << "," << exact(v);
    csv << "\n";
  }
  std::ostringstream field;
  sol.field.write_table(field);

  json m = base_manifest(cfg, "solve", {"solve.csv", "field.txt", "manifest.json"});
  json diag = json::array();
  for (const auto& s : sol.stats) diag.push_back({{"iterations", s.iterations}, {"residual", s.relative_residual}});
  m["diagnostics"] = {{"truncations", sol.truncations},
                      {"increments", sol.increments},
                      {"achieved_increment", sol.achieved_increment},
                      {"linear_solves", diag}};
  json pr = json::array();
  for (std::size_t k = 0; k < probes.size(); ++k) {
    pr.push_back({{"radius", probes[k].norm()}, {"u", sol.probe_values.back()[k]}});
  }
  m["results"] = {{"probes", pr}};
  m["wall_time_s"] = seconds_since(t0);

  const fs::path dir = fs::path(output_root(c, &cfg)) / cfg.name;
  write_file(dir / "solve.csv", csv.str());
  write_file(dir / "field.txt", field.str());
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  out << "solve " << cfg.name << ": " << sol.truncations.size() << " truncations, final n = "
      << sol.truncations.back() << ", increment " << sol.achieved_increment << "\n";
  for (std::size_t k = 0; k < probes.size(); ++k) {
    out << "  |x| = " << probes[k].norm() << "  u = " << sol.probe_values.back()[k] << "\n";
  }
  out << "wrote " << dir.string() << "\n";
  return 0;
}

int run_mc(const Common& c, int dump_paths, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioConfig cfg = scenario_from(c);
  const Domain dom = build_domain(cfg);
  const OperatorSpec op = build_operator(cfg);
  const int d = cfg.dimension;
  const double big_r = cfg.bounding_radius;

  std::ostringstream csv;
  csv << "radius,target_radius,estimate,standard_error,reference,pass,escapes,reentries,budget_exhausted,steps\n";
  bool all = true;
  json rows = json::array();
  for (std::size_t g = 0; g < cfg.gammas.size(); ++g) {
    const Point x = dom.from_polar(cfg.gammas[g] * big_r, cfg.probe_angles.empty() ? 0.0 : cfg.probe_angles[0]);
    PathConfig mc = cfg.mc;
    mc.seed = cfg.mc.seed + g;
    const OccupationEstimate est = estimate_hit_prob(&dom, op, x, big_r, mc);
    const bool has_ref = op.is_laplacian();
    const double ref = has_ref ? closedform::hit_prob_ball(x.norm(), big_r, d) : std::nan("");
    const bool pass = est.budget_exhausted == 0 && (!has_ref || std::abs(est.mean - ref) <= 3.0 * est.standard_error);
    all = all && pass;
    csv << exact(x.norm()) << "," << exact(big_r) << "," << exact(est.mean) << "," << exact(est.standard_error)
        << "," << (has_ref ? exact(ref) : "nan") << "," << (pass ? "pass" : "fail") << "," << est.escapes << ","
        << est.reentries << "," << est.budget_exhausted << "," << est.steps << "\n";
    rows.push_back({{"radius", x.norm()},
                    {"estimate", est.mean},
                    {"standard_error", est.standard_error},
                    {"escapes", est.escapes},
                    {"reentries", est.reentries},
                    {"budget_exhausted", est.budget_exhausted},
                    {"pass", pass}});
    out << "P(hit B_R) from |x| = " << x.norm() << ": " << est.mean << " +- " << est.standard_error;
    if (has_ref) out << "  (exact " << ref << ")";
    out << (pass ? "  pass\n" : "  FAIL\n");
  }
  std::vector<std::string> files{"mc.csv"};
  std::ostringstream paths;
  if (dump_paths > 0) {
    files.push_back("paths.txt");
    const Point x = dom.from_polar(cfg.gammas.empty() ? 2.0 * big_r : cfg.gammas[0] * big_r, 0.0);
    for (int k = 0; k < dump_paths; ++k) {
      const PathRecord rec = simulate_reflected_path(&dom, op, x, cfg.mc, static_cast<std::uint64_t>(k), 10.0);
      paths << "# path " << k << " steps " << rec.steps << "\n";
      for (std::size_t i = 0; i < rec.points.size(); ++i) {
        paths << exact(rec.times[i]);
        for (Eigen::Index j = 0; j < rec.points[i].size(); ++j) paths << " " << exact(rec.points[i][j]);
        paths << "\n";
      }
      paths << "\n";
    }
  }
  files.push_back("manifest.json");
  json m = base_manifest(cfg, "mc", files);
  m["results"] = {{"hit_prob", rows}, {"all_pass", all}};
  m["wall_time_s"] = seconds_since(t0);
  const fs::path dir = fs::path(output_root(c, &cfg)) / cfg.name;
  write_file(dir / "mc.csv", csv.str());
  if (dump_paths > 0) write_file(dir / "paths.txt", paths.str());
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  out << "wrote " << dir.string() << "\n";
  return all ? 0 : 1;
}

void summarize(const ScenarioResults& r, std::ostream& out) {
  for (const auto& b : r.bounds) {
    out << b.theorem << " " << r.config.name << ": " << b.verdict << "\n";
    for (const auto& row : b.rows) {
      out << "  gamma " << row.gamma << " angle " << row.angle << "  value " << row.value << " in [" << row.lower
          << ", " << row.upper << "] tol " << row.tolerance << (row.pass ? "  pass" : "  FAIL") << "\n";
    }
    for (const auto& n : b.notes) out << "  note: " << n << "\n";
  }
  if (r.blowup) {
    out << "blowup " << r.config.name << ": " << (r.blowup->all_pass ? "pass" : "FAIL") << "\n";
    for (const auto& row : r.blowup->rows) {
      out << "  n " << row.n << "  interior " << row.interior_value << "  growth " << row.growth
          << "  exterior sup " << row.exterior_sup << " <= " << row.exterior_envelope << "  surface " << row.surface
          << (row.trustworthy ? "" : "  (unresolved)") << "\n";
    }
  }
  if (r.symmetry) {
    out << "symmetry: asymmetry " << r.symmetry->asymmetry << " weighted " << r.symmetry->weighted_asymmetry
        << (r.symmetry->pass ? "  pass" : "  FAIL") << "\n";
  }
  if (r.hitting) {
    out << "hitting: " << (r.hitting->all_pass ? "pass" : "FAIL") << "\n";
    for (std::size_t i = 0; i < r.hitting->expected.size(); ++i) {
      const int n = static_cast<int>(i) + 1;
      out << "  n " << n << "  " << r.hitting->stats.survival_frequency(n) << " +- "
          << r.hitting->stats.survival_standard_error(n) << "  expected " << r.hitting->expected[i] << "\n";
    }
  }
  for (const auto& k : r.kernels) {
    out << "kernel " << k.kind << ": mc " << k.mc << " +- " << k.se << " quadrature " << k.quadrature
        << (k.pass ? "  pass" : "  FAIL") << "\n";
  }
  if (r.scale) out << "scale audit: max deviation " << r.scale->max_deviation << (r.scale->pass ? "  pass\n" : "  FAIL\n");
  if (r.compatibility) {
    out << "compatibility: flux " << r.compatibility->verdict << ", dipole " << r.compatibility_dipole->verdict
        << "\n";
  }
}

int run_verify(const Common& c, const std::string& sub, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg = scenario_from(c);
  if (sub == "blowup") cfg.suites = {"blowup"};
  const ScenarioResults r = run_suites(cfg);
  summarize(r, out);
  const json m = make_manifest(r, {sub, cfg.mc.threads, seconds_since(t0)});
  const auto files = emit_report({m}, output_root(c, &cfg));
  for (const auto& f : files) out << "wrote " << f << "\n";
  const bool pass = r.all_pass();
  out << (pass ? "all checks passed\n" : "some checks FAILED\n");
  return pass ? 0 : 1;
}

int run_report(const std::vector<std::string>& from, const Common& c, std::ostream& out) {
  std::vector<json> manifests;
  for (const auto& p : from) manifests.push_back(load_manifest(fs::is_directory(p) ? (fs::path(p) / "manifest.json").string() : p));
  for (const auto& m : manifests) {
    const std::string sub = m.value("subcommand", "");
    if (sub != "verify" && sub != "blowup") {
      throw InvalidInput("report: manifest from '" + sub + "' has no stored report (only verify and blowup do)");
    }
  }
  bool pass = true;
  for (const auto& m : manifests) pass = pass && m.value("all_pass", false);
  const auto files = emit_report(manifests, output_root(c, nullptr));
  for (const auto& f : files) out << "wrote " << f << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fluxbound: envelopes for exterior flux problems"};
  app.set_version_flag("--version", std::string(FLUXBOUND_VERSION));
  app.require_subcommand(1);

  int d = 3;
  std::vector<double> gammas{1.5, 2.0, 4.0, 10.0, 100.0};
  auto* bounds = app.add_subcommand("bounds", "print rho*, c-, c+ for a gamma grid as CSV");
  bounds->add_option("--d", d, "dimension")->check(CLI::Range(3, kMaxDim));
  bounds->add_option("--gamma", gammas, "gamma values (> 1)")->check(CLI::PositiveNumber);

  Common solve_c, mc_c, verify_c, blowup_c, report_c;
  auto* solve = app.add_subcommand("solve", "minimal solution at the scenario probes");
  add_common(solve, solve_c, true);
  int dump_paths = 0;
  auto* mc = app.add_subcommand("mc", "Monte Carlo hitting estimates at the scenario probes");
  add_common(mc, mc_c, true);
  mc->add_option("--dump-paths", dump_paths, "write the first K paths as polylines")->check(CLI::NonNegativeNumber);
  auto* verify = app.add_subcommand("verify", "run the suites listed in the scenario and write the report");
  add_common(verify, verify_c, true);
  auto* blowup = app.add_subcommand("blowup", "punctured-shell growth study");
  add_common(blowup, blowup_c, true);
  std::vector<std::string> from;
  auto* report = app.add_subcommand("report", "regenerate report files from stored manifests");
  report->add_option("--from", from, "manifest.json files or directories holding one")->required();
  report->add_option("--out", report_c.out, "output root directory");

  if (args.empty()) {
    err << app.help();
    return 2;
  }
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << FLUXBOUND_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    } else {
      err << app.help();
    }
    return 2;
  }

  try {
    if (bounds->parsed()) {
      for (double g : gammas) {
        if (!(g > 1.0)) throw InvalidInput("--gamma: values must exceed 1");
      }
      return run_bounds(d, gammas, out);
    }
    if (solve->parsed()) return run_solve(solve_c, out);
    if (mc->parsed()) return run_mc(mc_c, dump_paths, out);
    if (verify->parsed()) return run_verify(verify_c, "verify", out);
    if (blowup->parsed()) return run_verify(blowup_c, "blowup", out);
    if (report->parsed()) return run_report(from, report_c, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace fluxbound
