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

#include "fluxbound/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fluxbound {

namespace {

namespace pt = boost::property_tree;

std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& s) {
  const std::string t = boost::trim_copy(s);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  const std::string t = boost::trim_copy(s);
  // Accept 1e5-style counts as long as they are exact integers.
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec == std::errc() && res.ptr == t.data() + t.size()) return v;
  const double d = to_double(key, s);
  if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e18) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a non-negative integer");
  }
  return static_cast<std::uint64_t>(d);
}

int to_int(const std::string& key, const std::string& s) {
  const std::uint64_t v = to_u64(key, s);
  if (v > 1'000'000'000ULL) throw ConfigError("key '" + key + "': value too large");
  return static_cast<int>(v);
}

bool to_bool(const std::string& key, const std::string& s) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(s));
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

struct Binding {
  std::string section;
  std::string key;
  bool required = false;
  std::function<void(ScenarioConfig&, const std::string&, const std::string&)> read;
  std::function<std::string(const ScenarioConfig&)> write;
};

template <class F>
Binding num(std::string sec, std::string key, F field, bool required = false) {
  return {sec, key, required,
          [field](ScenarioConfig& c, const std::string& k, const std::string& v) { field(c) = to_double(k, v); },
          [field](const ScenarioConfig& c) { return fmt_double(field(const_cast<ScenarioConfig&>(c))); }};
}

template <class F>
Binding integer(std::string sec, std::string key, F field) {
  return {sec, key, false,
          [field](ScenarioConfig& c, const std::string& k, const std::string& v) {
            using T = std::remove_reference_t<decltype(field(c))>;
            if constexpr (std::is_same_v<T, int>) {
              field(c) = to_int(k, v);
            } else {
              field(c) = static_cast<T>(to_u64(k, v));
            }
          },
          [field](const ScenarioConfig& c) { return std::to_string(field(const_cast<ScenarioConfig&>(c))); }};
}

template <class F>
Binding text(std::string sec, std::string key, F field, bool required = false) {
  return {sec, key, required,
          [field](ScenarioConfig& c, const std::string&, const std::string& v) { field(c) = boost::trim_copy(v); },
          [field](const ScenarioConfig& c) { return field(const_cast<ScenarioConfig&>(c)); }};
}

template <class F>
Binding flag(std::string sec, std::string key, F field) {
  return {sec, key, false,
          [field](ScenarioConfig& c, const std::string& k, const std::string& v) { field(c) = to_bool(k, v); },
          [field](const ScenarioConfig& c) {
            return std::string(field(const_cast<ScenarioConfig&>(c)) ? "true" : "false");
          }};
}

template <class F>
Binding num_list(std::string sec, std::string key, F field) {
  return {sec, key, false,
          [field](ScenarioConfig& c, const std::string& k, const std::string& v) {
            auto& out = field(c);
            out.clear();
            for (const auto& p : split_list(v)) out.push_back(to_double(k, p));
          },
          [field](const ScenarioConfig& c) {
            std::string s;
            for (double v : field(const_cast<ScenarioConfig&>(c))) s += (s.empty() ? "" : ", ") + fmt_double(v);
            return s;
          }};
}

const std::vector<Binding>& bindings() {
  using C = ScenarioConfig;
  static const std::vector<Binding> b{
      text("scenario", "name", [](C& c) -> std::string& { return c.name; }, true),
      integer("scenario", "dimension_count", [](C& c) -> int& { return c.dimension; }),
      {"scenario", "suites_list", false,
       [](C& c, const std::string&, const std::string& v) { c.suites = split_list(v); },
       [](const C& c) { return boost::join(c.suites, ", "); }},

      text("geometry", "shape", [](C& c) -> std::string& { return c.shape; }, true),
      num("geometry", "inner_radius_length", [](C& c) -> double& { return c.inner_radius; }, true),
      num("geometry", "outer_radius_length", [](C& c) -> double& { return c.outer_radius; }),
      num("geometry", "channel_radius_length", [](C& c) -> double& { return c.channel_radius; }),
      num("geometry", "bounding_radius_length", [](C& c) -> double& { return c.bounding_radius; }),
      num_list("geometry", "axis_vector", [](C& c) -> std::vector<double>& { return c.axis; }),
      integer("geometry", "polar_nodes_count", [](C& c) -> int& { return c.quadrature.polar_nodes; }),
      integer("geometry", "azimuth_nodes_count", [](C& c) -> int& { return c.quadrature.azimuth_nodes; }),
      integer("geometry", "channel_axial_nodes_count",
              [](C& c) -> int& { return c.quadrature.channel_axial_nodes; }),

      text("operator", "kind", [](C& c) -> std::string& { return c.operator_kind; }),
      num("operator", "kappa_amplitude", [](C& c) -> double& { return c.kappa; }),
      num("operator", "width_ratio", [](C& c) -> double& { return c.width_factor; }),
      num("operator", "q_shift_amplitude", [](C& c) -> double& { return c.q_shift; }),

      text("flux", "kind", [](C& c) -> std::string& { return c.flux_kind; }),
      num("flux", "value_density", [](C& c) -> double& { return c.flux_value; }),

      num_list("probes", "gammas_ratio", [](C& c) -> std::vector<double>& { return c.gammas; }),
      num_list("probes", "angles_rad", [](C& c) -> std::vector<double>& { return c.probe_angles; }),
      num("probes", "r_prime_ratio", [](C& c) -> double& { return c.r_prime_factor; }),
      num_list("probes", "theorem2_radii_ratio",
               [](C& c) -> std::vector<double>& { return c.theorem2_radius_factors; }),
      integer("probes", "sphere_samples_count", [](C& c) -> int& { return c.sphere_samples; }),

      num("solver", "mesh_scale_ratio", [](C& c) -> double& { return c.solver.mesh_scale; }),
      num("solver", "relative_spacing_ratio", [](C& c) -> double& { return c.solver.relative_spacing; }),
      num("solver", "polar_spacing_rad", [](C& c) -> double& { return c.solver.polar_spacing; }),
      num("solver", "first_truncation_length", [](C& c) -> double& { return c.solver.first_truncation; }),
      integer("solver", "max_doublings_count", [](C& c) -> int& { return c.solver.max_doublings; }),
      num("solver", "tolerance_relative", [](C& c) -> double& { return c.solver.tolerance; }),
      num("solver", "linear_tolerance_relative", [](C& c) -> double& { return c.solver.linear_tolerance; }),

      num("montecarlo", "dt_time", [](C& c) -> double& { return c.mc.dt; }),
      num("montecarlo", "length_scale_length", [](C& c) -> double& { return c.mc.length_scale; }),
      num("montecarlo", "min_step_ratio", [](C& c) -> double& { return c.mc.min_step_fraction; }),
      num("montecarlo", "max_step_ratio", [](C& c) -> double& { return c.mc.max_step_fraction; }),
      num("montecarlo", "truncation_radius_length", [](C& c) -> double& { return c.mc.truncation_radius; }),
      num("montecarlo", "reentry_radius_length", [](C& c) -> double& { return c.mc.reentry_radius; }),
      flag("montecarlo", "exact_tail", [](C& c) -> bool& { return c.mc.exact_tail; }),
      flag("montecarlo", "sphere_jumps", [](C& c) -> bool& { return c.mc.sphere_jumps; }),
      num("montecarlo", "jump_threshold_length", [](C& c) -> double& { return c.mc.jump_threshold; }),
      integer("montecarlo", "max_steps_count", [](C& c) -> std::uint64_t& { return c.mc.max_steps; }),
      integer("montecarlo", "seed", [](C& c) -> std::uint64_t& { return c.mc.seed; }),
      integer("montecarlo", "samples_count", [](C& c) -> std::uint64_t& { return c.mc.samples; }),
      integer("montecarlo", "threads_count", [](C& c) -> int& { return c.mc.threads; }),
      flag("montecarlo", "crosscheck", [](C& c) -> bool& { return c.mc_crosscheck; }),
      integer("montecarlo", "crosscheck_samples_count", [](C& c) -> std::uint64_t& { return c.crosscheck_samples; }),
      num("montecarlo", "hitting_rho_ratio", [](C& c) -> double& { return c.hitting_rho; }),
      integer("montecarlo", "hitting_circuits_count", [](C& c) -> int& { return c.hitting_circuits; }),

      {"blowup", "n_list", false,
       [](C& c, const std::string& k, const std::string& v) {
         c.blowup_n.clear();
         for (const auto& p : split_list(v)) c.blowup_n.push_back(to_int(k, p));
       },
       [](const C& c) {
         std::string s;
         for (int n : c.blowup_n) s += (s.empty() ? "" : ", ") + std::to_string(n);
         return s;
       }},
      num("blowup", "exterior_ratio", [](C& c) -> double& { return c.blowup_exterior_factor; }),

      text("output", "dir_path", [](C& c) -> std::string& { return c.output_dir; }),
  };
  return b;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("malformed scenario file: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  std::map<std::string, const Binding*> known;
  std::set<std::string> sections;
  for (const auto& b : bindings()) {
    known[b.section + "." + b.key] = &b;
    sections.insert(b.section);
  }
  ScenarioConfig cfg;
  std::set<std::string> seen;
  for (const auto& [sec, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + sec + "' is outside any section");
    if (!sections.count(sec)) throw ConfigError("unknown section [" + sec + "]");
    for (const auto& [key, value] : body) {
      const std::string full = sec + "." + key;
      const auto it = known.find(full);
      if (it == known.end()) throw ConfigError("unknown key '" + full + "'");
      it->second->read(cfg, full, value.data());
      seen.insert(full);
    }
  }
  for (const auto& b : bindings()) {
    if (b.required && !seen.count(b.section + "." + b.key)) {
      throw ConfigError("missing required key '" + b.section + "." + b.key + "'");
    }
  }
  if (cfg.shape != "ball" && !seen.count("geometry.outer_radius_length")) {
    throw ConfigError("missing required key 'geometry.outer_radius_length' for shape " + cfg.shape);
  }
  if (cfg.shape == "punctured_shell" && !seen.count("geometry.channel_radius_length")) {
    throw ConfigError("missing required key 'geometry.channel_radius_length' for shape punctured_shell");
  }
  if (!seen.count("geometry.bounding_radius_length")) {
    cfg.bounding_radius = cfg.shape == "ball" ? cfg.inner_radius : cfg.outer_radius;
  }
  if (cfg.dimension < 3 || cfg.dimension > kMaxDim) {
    throw ConfigError("key 'scenario.dimension_count': need 3 <= d <= " + std::to_string(kMaxDim));
  }
  static const std::set<std::string> suites{"theorem1", "theorem2", "symmetry", "hitting",
                                            "blowup",   "kernels",  "scale",    "compatibility"};
  for (const auto& s : cfg.suites) {
    if (!suites.count(s)) throw ConfigError("key 'scenario.suites_list': unknown suite '" + s + "'");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string format_scenario(const ScenarioConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& b : bindings()) {
    if (b.section != section) {
      out += (section.empty() ? "[" : "\n[") + b.section + "]\n";
      section = b.section;
    }
    out += b.key + " = " + b.write(cfg) + "\n";
  }
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace fluxbound
