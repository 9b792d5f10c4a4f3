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

#include "fluxbound/report.hpp"

#include "fluxbound/closedform.hpp"
#include "fluxbound/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace fluxbound {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- JSON I/O

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double get_num(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return kNaN;
  return it->get<double>();
}

json point_json(const Point& p) {
  json a = json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

json to_json(const ProbeRow& r) {
  return {{"x", point_json(r.x)},
          {"radius", r.radius},
          {"gamma", r.gamma},
          {"angle", r.angle},
          {"u", r.u},
          {"u_coarse", r.u_coarse},
          {"discretization_tol", r.discretization_tol},
          {"u_representation", num(r.u_representation)},
          {"mc", num(r.mc)},
          {"mc_se", num(r.mc_se)},
          {"mc_pass", r.mc_pass},
          {"value", r.value},
          {"lower", num(r.lower)},
          {"upper", num(r.upper)},
          {"tolerance", r.tolerance},
          {"margin", num(r.margin)},
          {"lower_alt", num(r.lower_alt)},
          {"upper_alt", num(r.upper_alt)},
          {"pass", r.pass}};
}

json to_json(const BoundReport& b) {
  json rows = json::array();
  for (const auto& r : b.rows) rows.push_back(to_json(r));
  return {{"theorem", b.theorem},     {"dimension", b.dimension}, {"flux_integral", b.flux_integral},
          {"r_prime", b.r_prime},     {"v_min", b.v_min},         {"v_max", b.v_max},
          {"v_tol", b.v_tol},         {"rows", rows},             {"all_pass", b.all_pass},
          {"verdict", b.verdict},     {"notes", b.notes}};
}

json to_json(const BlowupReport& b) {
  json rows = json::array();
  for (const auto& r : b.rows) {
    rows.push_back({{"n", r.n},
                    {"inner", r.inner},
                    {"outer", r.outer},
                    {"channel", r.channel},
                    {"surface", r.surface},
                    {"flux_integral", r.flux_integral},
                    {"interior_value", r.interior_value},
                    {"interior_coarse", r.interior_coarse},
                    {"exterior_sup", r.exterior_sup},
                    {"exterior_envelope", r.exterior_envelope},
                    {"growth", num(r.growth)},
                    {"exterior_pass", r.exterior_pass},
                    {"trustworthy", r.trustworthy}});
  }
  return {{"rows", rows},
          {"surface_bound", b.surface_bound},
          {"growth_pass", b.growth_pass},
          {"exterior_pass", b.exterior_pass},
          {"surface_pass", b.surface_pass},
          {"largest_trustworthy_n", b.largest_trustworthy_n},
          {"all_pass", b.all_pass}};
}

json to_json(const HittingReport& h) {
  json rows = json::array();
  for (std::size_t i = 0; i < h.expected.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    rows.push_back({{"n", n},
                    {"survivors", h.stats.survival[i]},
                    {"frequency", h.stats.survival_frequency(n)},
                    {"standard_error", h.stats.survival_standard_error(n)},
                    {"expected", h.expected[i]},
                    {"lower", h.twosided.lower[i]},
                    {"upper", h.twosided.upper[i]},
                    {"circuit_occupation", h.stats.circuit_occupation[i]},
                    {"circuit_occupation_se", h.stats.circuit_occupation_se[i]},
                    {"pass", static_cast<bool>(h.within[i])}});
  }
  return {{"rho", h.stats.rho},
          {"radius", h.stats.radius},
          {"paths", h.stats.paths},
          {"rows", rows},
          {"total_occupation", h.stats.total_occupation},
          {"total_occupation_se", h.stats.total_occupation_se},
          {"return_leg_occupation", h.stats.return_leg_occupation},
          {"max_partition_defect", h.stats.max_partition_defect},
          {"budget_exhausted", h.stats.budget_exhausted},
          {"all_pass", h.all_pass}};
}

json to_json(const CompatibilityReport& c) {
  return {{"k", c.k}, {"center_values", c.center_values}, {"verdict", c.verdict}};
}

json checks_json(const ScenarioResults& r) {
  json c = json::object();
  if (r.symmetry) {
    const auto& s = *r.symmetry;
    c["symmetry"] = {{"probes", s.probes},
                     {"laplacian", s.laplacian},
                     {"asymmetry", s.asymmetry},
                     {"weighted_asymmetry", s.weighted_asymmetry},
                     {"sym_kernel_asymmetry", s.sym_kernel_asymmetry},
                     {"tolerance", s.tolerance},
                     {"pass", s.pass}};
  }
  if (!r.kernels.empty()) {
    json k = json::array();
    for (const auto& kc : r.kernels) {
      k.push_back({{"kind", kc.kind},
                   {"z", point_json(kc.z)},
                   {"center", point_json(kc.center)},
                   {"radius", kc.radius},
                   {"mc", kc.mc},
                   {"se", kc.se},
                   {"quadrature", kc.quadrature},
                   {"pass", kc.pass}});
    }
    c["kernels"] = k;
  }
  if (r.scale) {
    c["scale"] = {{"scales", r.scale->scales},
                  {"ratios", r.scale->ratios},
                  {"max_deviation", r.scale->max_deviation},
                  {"pass", r.scale->pass}};
  }
  if (r.compatibility) {
    c["compatibility"] = {{"flux", to_json(*r.compatibility)},
                          {"dipole", to_json(*r.compatibility_dipole)},
                          {"pass", r.compatibility->verdict == "incompatible" &&
                                       r.compatibility_dipole->verdict == "compatible"}};
  }
  return c;
}

// ---------------------------------------------------------------- text output

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(const json& j) {
  if (j.is_null()) return "nan";
  if (j.is_boolean()) return j.get<bool>() ? "pass" : "fail";
  if (j.is_number_integer() || j.is_number_unsigned()) return j.dump();
  if (j.is_number()) return fmt(j.get<double>());
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  }
  return out;
}

std::string bounds_csv(const json& m) {
  const std::vector<std::string> cols{"radius", "gamma", "angle", "u", "u_coarse", "discretization_tol",
                                      "u_representation", "mc", "mc_se", "value", "lower", "upper",
                                      "tolerance", "margin", "lower_alt", "upper_alt", "pass"};
  std::vector<std::string> header{"scenario", "theorem", "probe"};
  header.insert(header.end(), cols.begin(), cols.end());
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : m["results"]["bounds"]) {
    int k = 0;
    for (const auto& r : b["rows"]) {
      std::vector<std::string> line{m["scenario"].get<std::string>(), b["theorem"].get<std::string>(),
                                    std::to_string(k++)};
      for (const auto& c : cols) line.push_back(fmt(r[c]));
      rows.push_back(line);
    }
  }
  return csv_table(header, rows);
}

std::string blowup_csv(const json& b) {
  const std::vector<std::string> cols{"n",           "inner",           "outer",           "channel",
                                      "surface",     "flux_integral",   "interior_value",  "interior_coarse",
                                      "growth",      "exterior_sup",    "exterior_envelope", "exterior_pass",
                                      "trustworthy"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : b["rows"]) {
    std::vector<std::string> line;
    for (const auto& c : cols) line.push_back(fmt(r[c]));
    rows.push_back(line);
  }
  return csv_table(cols, rows);
}

std::string hitting_csv(const json& h) {
  const std::vector<std::string> cols{"n",     "survivors", "frequency",          "standard_error",        "expected",
                                      "lower", "upper",     "circuit_occupation", "circuit_occupation_se", "pass"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : h["rows"]) {
    std::vector<std::string> line;
    for (const auto& c : cols) line.push_back(fmt(r[c]));
    rows.push_back(line);
  }
  return csv_table(cols, rows);
}

std::string checks_csv(const json& c) {
  std::vector<std::vector<std::string>> rows;
  if (c.contains("symmetry")) {
    const auto& s = c["symmetry"];
    rows.push_back({"symmetry", "asymmetry", fmt(s["asymmetry"]), fmt(s["tolerance"]), fmt(s["pass"])});
    rows.push_back({"symmetry", "weighted_asymmetry", fmt(s["weighted_asymmetry"]), fmt(s["tolerance"]),
                    fmt(s["pass"])});
    rows.push_back({"symmetry", "sym_kernel_asymmetry", fmt(s["sym_kernel_asymmetry"]), fmt(s["tolerance"]),
                    fmt(s["pass"])});
  }
  if (c.contains("kernels")) {
    int k = 0;
    for (const auto& kc : c["kernels"]) {
      const std::string name = kc["kind"].get<std::string>() + "_" + std::to_string(k++);
      rows.push_back({"kernels", name + "_mc", fmt(kc["mc"]), fmt(3.0 * kc["se"].get<double>()), fmt(kc["pass"])});
      rows.push_back({"kernels", name + "_quadrature", fmt(kc["quadrature"]), "", fmt(kc["pass"])});
    }
  }
  if (c.contains("scale")) {
    rows.push_back({"scale", "max_deviation", fmt(c["scale"]["max_deviation"]), "", fmt(c["scale"]["pass"])});
  }
  if (c.contains("compatibility")) {
    for (const char* which : {"flux", "dipole"}) {
      const auto& r = c["compatibility"][which];
      for (std::size_t i = 0; i < r["k"].size(); ++i) {
        rows.push_back({"compatibility", std::string(which) + "_k" + fmt(r["k"][i]), fmt(r["center_values"][i]),
                        r["verdict"].get<std::string>(), fmt(c["compatibility"]["pass"])});
      }
    }
  }
  return csv_table({"suite", "quantity", "value", "tolerance", "verdict"}, rows);
}

// ---------------------------------------------------------------- SVG

struct Series {
  Series(std::string l, std::string c) : label(std::move(l)), color(std::move(c)) {}
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
  std::vector<double> lo;  // optional error bars
  std::vector<double> hi;
};

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series, bool logx, bool logy) {
  const double w = 640;
  const double h = 420;
  const double left = 70;
  const double right = 170;
  const double top = 40;
  const double bottom = 50;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto grow = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y) || (logx && x <= 0) || (logy && y <= 0)) return;
    x0 = std::min(x0, tx(x));
    x1 = std::max(x1, tx(x));
    y0 = std::min(y0, ty(y));
    y1 = std::max(y1, ty(y));
  };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      grow(s.x[i], s.y[i]);
      if (!s.lo.empty()) grow(s.x[i], s.lo[i]);
      if (!s.hi.empty()) grow(s.x[i], s.hi[i]);
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double px = 0.05 * (x1 - x0);
  const double py = 0.08 * (y1 - y0);
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  const double pw = w - left - right;
  const double ph = h - top - bottom;
  auto sx = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto sy = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << f2(left) << "\" y=\"22\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << f2(left) << "\" y=\"" << f2(top) << "\" width=\"" << f2(pw) << "\" height=\"" << f2(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4;
    const double yv = y0 + (y1 - y0) * i / 4;
    const double gx = left + pw * i / 4;
    const double gy = top + ph - ph * i / 4;
    o << "<line x1=\"" << f2(gx) << "\" y1=\"" << f2(top + ph) << "\" x2=\"" << f2(gx) << "\" y2=\""
      << f2(top + ph + 5) << "\" stroke=\"black\"/>";
    o << "<text x=\"" << f2(gx) << "\" y=\"" << f2(top + ph + 18) << "\" text-anchor=\"middle\">"
      << tick_label(logx ? std::pow(10.0, xv) : xv) << "</text>\n";
    o << "<line x1=\"" << f2(left - 5) << "\" y1=\"" << f2(gy) << "\" x2=\"" << f2(left) << "\" y2=\"" << f2(gy)
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << f2(left - 8) << "\" y=\"" << f2(gy + 4) << "\" text-anchor=\"end\">"
      << tick_label(logy ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  o << "<text x=\"" << f2(left + pw / 2) << "\" y=\"" << f2(h - 10) << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << f2(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << f2(top + ph / 2) << ")\">" << ylabel << "</text>\n";

  int legend = 0;
  for (const auto& s : series) {
    auto ok = [&](std::size_t i) {
      return std::isfinite(s.x[i]) && std::isfinite(s.y[i]) && !(logx && s.x[i] <= 0) && !(logy && s.y[i] <= 0);
    };
    if (s.markers) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!ok(i)) continue;
        if (!s.lo.empty() && std::isfinite(s.lo[i]) && std::isfinite(s.hi[i]) && !(logy && s.lo[i] <= 0)) {
          o << "<line x1=\"" << f2(sx(s.x[i])) << "\" y1=\"" << f2(sy(s.lo[i])) << "\" x2=\"" << f2(sx(s.x[i]))
            << "\" y2=\"" << f2(sy(s.hi[i])) << "\" stroke=\"" << s.color << "\"/>\n";
        }
        o << "<circle cx=\"" << f2(sx(s.x[i])) << "\" cy=\"" << f2(sy(s.y[i])) << "\" r=\"3.5\" fill=\"" << s.color
          << "\"/>\n";
      }
    } else {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!ok(i)) continue;
        o << (first ? "" : " ") << f2(sx(s.x[i])) << "," << f2(sy(s.y[i]));
        first = false;
      }
      o << "\"/>\n";
    }
    const double ly = top + 10 + 18 * legend++;
    o << "<rect x=\"" << f2(w - right + 12) << "\" y=\"" << f2(ly - 8) << "\" width=\"12\" height=\"8\" fill=\""
      << s.color << "\"/>";
    o << "<text x=\"" << f2(w - right + 30) << "\" y=\"" << f2(ly) << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<double> column(const json& rows, const char* key) {
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(r[key].is_null() ? kNaN : r[key].get<double>());
  return v;
}

std::string envelope_svg(const json& b, const std::string& scenario) {
  const json& rows = b["rows"];
  const int d = b["dimension"].get<int>();
  std::vector<Series> series;
  if (b["theorem"] == "theorem1") {
    double gmin = 1e300, gmax = 0;
    for (const auto& r : rows) {
      gmin = std::min(gmin, r["gamma"].get<double>());
      gmax = std::max(gmax, r["gamma"].get<double>());
    }
    Series up{"c+", "#c0392b"}, lo{"c-", "#2471a3"};
    const int m = 60;
    for (int i = 0; i <= m; ++i) {
      const double g = gmin * std::pow(gmax / gmin, static_cast<double>(i) / m);
      up.x.push_back(g);
      up.y.push_back(closedform::c_plus(g, d));
      lo.x.push_back(g);
      lo.y.push_back(closedform::c_minus(g, d));
    }
    Series pts{"u |x|^(d-2) (d-2) w / S", "black"};
    pts.markers = true;
    pts.x = column(rows, "gamma");
    pts.y = column(rows, "value");
    const auto tol = column(rows, "tolerance");
    for (std::size_t i = 0; i < pts.y.size(); ++i) {
      pts.lo.push_back(pts.y[i] - tol[i]);
      pts.hi.push_back(pts.y[i] + tol[i]);
    }
    series = {up, lo, pts};
    return svg_plot(scenario + ": normalised u against the envelope", "gamma = |x| / R", "ratio", series, true,
                    false);
  }
  Series pts{"u |x|^(d-2)", "black"}, up{"upper |x|^(d-2)", "#c0392b"}, lo{"lower |x|^(d-2)", "#2471a3"};
  pts.markers = up.markers = lo.markers = true;
  for (const auto& r : rows) {
    const double s = std::pow(r["radius"].get<double>(), d - 2);
    const double g = r["gamma"].get<double>();
    pts.x.push_back(g);
    up.x.push_back(g);
    lo.x.push_back(g);
    pts.y.push_back(r["u"].get<double>() * s);
    up.y.push_back(get_num(r, "upper") * s);
    lo.y.push_back(get_num(r, "lower") * s);
  }
  return svg_plot(scenario + ": weighted bracket", "gamma = |x| / R", "u |x|^(d-2)", {up, lo, pts}, false, false);
}

std::string blowup_svg(const json& b, const std::string& scenario) {
  Series in{"interior u", "black"}, ext{"exterior sup", "#2471a3"}, env{"exterior envelope", "#c0392b"};
  in.markers = ext.markers = true;
  in.x = ext.x = env.x = column(b["rows"], "n");
  in.y = column(b["rows"], "interior_value");
  ext.y = column(b["rows"], "exterior_sup");
  env.y = column(b["rows"], "exterior_envelope");
  return svg_plot(scenario + ": punctured shell growth", "n", "u", {in, ext, env}, true, true);
}

std::string hitting_svg(const json& h, const std::string& scenario) {
  Series f{"frequency", "black"}, e{"expected", "#c0392b"};
  f.markers = true;
  f.x = e.x = column(h["rows"], "n");
  f.y = column(h["rows"], "frequency");
  e.y = column(h["rows"], "expected");
  const auto se = column(h["rows"], "standard_error");
  for (std::size_t i = 0; i < f.y.size(); ++i) {
    f.lo.push_back(f.y[i] - 3 * se[i]);
    f.hi.push_back(f.y[i] + 3 * se[i]);
  }
  return svg_plot(scenario + ": circuit survival", "n", "P(tau_{2n-1} finite)", {e, f}, false, true);
}

}  // namespace

bool ScenarioResults::all_pass() const {
  bool ok = true;
  for (const auto& b : bounds) ok = ok && b.all_pass;
  if (blowup) ok = ok && blowup->all_pass;
  if (symmetry) ok = ok && symmetry->pass;
  if (hitting) ok = ok && hitting->all_pass;
  for (const auto& k : kernels) ok = ok && k.pass;
  if (scale) ok = ok && scale->pass;
  if (compatibility) {
    ok = ok && compatibility->verdict == "incompatible" && compatibility_dipole->verdict == "compatible";
  }
  return ok;
}

ScenarioResults run_suites(const ScenarioConfig& cfg) {
  ScenarioResults r;
  r.config = cfg;
  for (const auto& s : cfg.suites) {
    if (s == "theorem1") {
      r.bounds.push_back(verify_theorem1(cfg));
    } else if (s == "theorem2") {
      r.bounds.push_back(verify_theorem2(cfg));
    } else if (s == "symmetry") {
      r.symmetry = verify_green_symmetry(cfg);
    } else if (s == "hitting") {
      r.hitting = run_hitting_law(cfg);
    } else if (s == "blowup") {
      r.blowup = run_blowup_study(cfg);
    } else if (s == "kernels") {
      r.kernels = verify_kernels(cfg.mc, cfg.dimension);
    } else if (s == "scale") {
      r.scale = scale_invariance_audit(cfg);
    } else if (s == "compatibility") {
      const FluxSpec h = build_flux(cfg);
      const Point axis = unit_vector(cfg.dimension, cfg.dimension - 1);
      const FluxSpec dipole("dipole", [axis](const Point& y) { return y.dot(axis) / y.norm(); });
      r.compatibility = neumann_compatibility_check(cfg.bounding_radius, cfg.dimension, h);
      r.compatibility_dipole = neumann_compatibility_check(cfg.bounding_radius, cfg.dimension, dipole);
    } else {
      throw InvalidInput("unknown suite '" + s + "'");
    }
  }
  return r;
}

json make_manifest(const ScenarioResults& r, const RunInfo& info) {
  const ScenarioConfig& c = r.config;
  const std::string text = format_scenario(c);
  json results = json::object();
  json bounds = json::array();
  for (const auto& b : r.bounds) bounds.push_back(to_json(b));
  results["bounds"] = bounds;
  if (r.blowup) results["blowup"] = to_json(*r.blowup);
  if (r.hitting) results["hitting"] = to_json(*r.hitting);
  const json checks = checks_json(r);
  if (!checks.empty()) results["checks"] = checks;

  json files = json::array();
  if (!r.bounds.empty()) {
    files.push_back("bounds.csv");
    files.push_back("envelope.svg");
    const bool t1 = std::any_of(r.bounds.begin(), r.bounds.end(), [](const auto& b) { return b.theorem == "theorem1"; });
    const bool t2 = std::any_of(r.bounds.begin(), r.bounds.end(), [](const auto& b) { return b.theorem == "theorem2"; });
    if (t1 && t2) files.push_back("envelope_theorem2.svg");
  }
  if (r.blowup) files.push_back("blowup.csv"), files.push_back("blowup.svg");
  if (r.hitting) files.push_back("hitting.csv"), files.push_back("hitting.svg");
  if (!checks.empty()) files.push_back("checks.csv");
  files.push_back("manifest.json");

  return {{"schema", "fluxbound-manifest/1"},
          {"tool_version", FLUXBOUND_VERSION},
          {"subcommand", info.subcommand},
          {"scenario", c.name},
          {"config_hash", hex64(fnv1a(text))},
          {"config", text},
          {"seeds", {{"montecarlo", c.mc.seed}}},
          {"threads", info.threads},
          {"resolutions",
           {{"mesh_scale", c.solver.mesh_scale},
            {"mesh_scale_fine", 0.5 * c.solver.mesh_scale},
            {"relative_spacing", c.solver.relative_spacing},
            {"polar_spacing", c.solver.polar_spacing},
            {"quadrature", {c.quadrature.polar_nodes, c.quadrature.azimuth_nodes, c.quadrature.channel_axial_nodes}},
            {"dt", c.mc.dt},
            {"truncation_radius", c.mc.truncation_radius},
            {"samples", c.mc.samples},
            {"crosscheck_samples", c.crosscheck_samples}}},
          {"tolerances",
           {{"truncation_increment", c.solver.tolerance},
            {"linear_solver", c.solver.linear_tolerance},
            {"statistical_sigmas", 3},
            {"envelope_width_fraction", 0.05}}},
          {"all_pass", r.all_pass()},
          {"results", results},
          {"files", files},
          {"wall_time_s", info.wall_time_seconds}};
}

json reproducible_part(json manifest) {
  manifest.erase("wall_time_s");
  return manifest;
}

json load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest '" + path + "'");
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw InvalidInput("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("schema") || m["schema"] != "fluxbound-manifest/1") {
    throw InvalidInput("manifest '" + path + "' has no fluxbound schema tag");
  }
  return m;
}

std::vector<std::string> emit_report(const std::vector<json>& manifests, const std::string& out_dir) {
  if (manifests.empty()) throw InvalidInput("emit_report: no completed scenarios");
  std::vector<std::pair<fs::path, std::string>> pending;
  for (const auto& m : manifests) {
    const std::string name = m.at("scenario").get<std::string>();
    if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..") {
      throw InvalidInput("scenario name '" + name + "' is not usable as a directory name");
    }
    const fs::path dir = fs::path(out_dir) / name;
    const json& res = m.at("results");
    for (const auto& f : m.at("files")) {
      const std::string file = f.get<std::string>();
      std::string body;
      if (file == "bounds.csv") {
        body = bounds_csv(m);
      } else if (file == "envelope.svg") {
        body = envelope_svg(res["bounds"][0], name);
      } else if (file == "envelope_theorem2.svg") {
        for (const auto& b : res["bounds"]) {
          if (b["theorem"] == "theorem2") body = envelope_svg(b, name);
        }
      } else if (file == "blowup.csv") {
        body = blowup_csv(res["blowup"]);
      } else if (file == "blowup.svg") {
        body = blowup_svg(res["blowup"], name);
      } else if (file == "hitting.csv") {
        body = hitting_csv(res["hitting"]);
      } else if (file == "hitting.svg") {
        body = hitting_svg(res["hitting"], name);
      } else if (file == "checks.csv") {
        body = checks_csv(res["checks"]);
      } else if (file == "manifest.json") {
        body = m.dump(2) + "\n";
      } else {
        throw InvalidInput("manifest lists unknown file '" + file + "'");
      }
      pending.emplace_back(dir / file, std::move(body));
    }
  }
  std::vector<std::string> written;
  for (const auto& [path, body] : pending) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (ec || !out) throw std::runtime_error("output directory not writable: " + path.parent_path().string());
    out << body;
    if (!out) throw std::runtime_error("write failed: " + path.string());
    written.push_back(path.string());
  }
  return written;
}

}  // namespace fluxbound
