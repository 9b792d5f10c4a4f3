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

#include "fluxbound/montecarlo.hpp"

#include "fluxbound/closedform.hpp"
#include "fluxbound/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace fluxbound {

namespace cf = closedform;

Region Region::ball(const Point& center, double radius) {
  if (!(radius > 0.0)) throw InvalidInput("region ball radius must be positive");
  Region r;
  r.kind = Kind::ball;
  r.center = center;
  r.outer = radius;
  return r;
}

Region Region::shell(int d, double inner, double outer) {
  if (!(inner >= 0.0) || !(outer > inner)) throw InvalidInput("region shell needs 0 <= inner < outer");
  Region r;
  r.kind = Kind::shell;
  r.center = Point::Zero(d);
  r.inner = inner;
  r.outer = outer;
  return r;
}

bool Region::contains(const Point& x) const {
  if (kind == Kind::ball) return (x - center).squaredNorm() <= outer * outer;
  const double r2 = x.squaredNorm();
  return r2 >= inner * inner && r2 <= outer * outer;
}

double Region::boundary_distance(const Point& x) const {
  if (kind == Kind::ball) return std::abs((x - center).norm() - outer);
  const double r = x.norm();
  return std::min(std::abs(r - inner), std::abs(r - outer));
}

double Region::max_radius() const { return kind == Kind::ball ? center.norm() + outer : outer; }

double Region::min_radius() const {
  return kind == Kind::ball ? std::max(0.0, center.norm() - outer) : inner;
}

double Region::volume() const {
  const int d = static_cast<int>(center.size());
  const double vd = cf::unit_ball_volume(d);
  if (kind == Kind::ball) return vd * std::pow(outer, d);
  return vd * (std::pow(outer, d) - std::pow(inner, d));
}

void Accumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void Accumulator::merge(const Accumulator& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double delta = o.mean_ - mean_;
  mean_ += delta * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double Accumulator::standard_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

double CircuitStats::survival_frequency(int n) const {
  if (n < 1 || n > static_cast<int>(survival.size()) || paths == 0) return 0.0;
  return static_cast<double>(survival[n - 1]) / static_cast<double>(paths);
}

double CircuitStats::survival_standard_error(int n) const {
  const double p = survival_frequency(n);
  return paths > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(paths)) : 0.0;
}

namespace {

constexpr std::uint64_t kChunk = 1024;
constexpr std::size_t kEntryPointCap = 2000;
constexpr double kInf = std::numeric_limits<double>::infinity();

double reentry_radius(const PathConfig& cfg) {
  return cfg.reentry_radius > 0.0 ? cfg.reentry_radius : cfg.truncation_radius / 4.0;
}

void validate(const PathConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw InvalidInput("path config: dt must be positive");
  if (!(cfg.length_scale > 0.0)) throw InvalidInput("path config: length scale must be positive");
  if (!(cfg.min_step_fraction > 0.0) || !(cfg.max_step_fraction >= cfg.min_step_fraction)) {
    throw InvalidInput("path config: step fractions out of order");
  }
  if (cfg.samples < 1) throw InvalidInput("path config: zero samples");
  if (cfg.max_steps < 1) throw InvalidInput("path config: zero step budget");
  const double m = reentry_radius(cfg);
  if (!(cfg.truncation_radius > 0.0) || !(m > 0.0) || !(m < cfg.truncation_radius)) {
    throw InvalidInput("path config: need 0 < reentry radius < truncation radius");
  }
}

/// Euler-Maruyama step with co-normal reflection at the obstacle.
class Stepper {
 public:
  Stepper(const Domain* dom, const OperatorSpec& op, const PathConfig& cfg)
      : dom_(dom), op_(op), cfg_(cfg), d_(op.dimension()), laplacian_(op.is_laplacian()),
        constant_diffusion_(op.has_constant_diffusion()),
        drift_radius_(op.is_laplacian() ? 0.0 : op.free_radius()) {
    if (dom && dom->dimension() != d_) throw InvalidInput("domain and operator dimensions differ");
    const double w = op.length_scale() / cfg.length_scale;
    drift_cap_ = cfg.dt * w * w;
    jump_threshold_ = cfg.jump_threshold > 0.0
                          ? cfg.jump_threshold
                          : 3.0 * std::sqrt(2.0 * cfg.dt * cfg.min_step_fraction) * cfg.length_scale;
  }

  int dimension() const { return d_; }

  double step_size(const Point& x, double feature_distance) const {
    const double f = feature_distance / cfg_.length_scale;
    double dt = cfg_.dt * std::clamp(f * f, cfg_.min_step_fraction, cfg_.max_step_fraction);
    if (in_drift_region(x)) {
      // The cap relaxes where the drift is weak on its own length scale.
      const double strength = op_.length_scale() * op_.drift(x).norm();
      dt = std::min(dt, drift_cap_ * std::max(1.0, 1.0 / std::max(strength, 1e-12)));
    }
    return dt;
  }

  /// Distance scale used when no feature is nearby.
  double free_distance(const Point& x) const { return std::max(x.norm(), cfg_.length_scale); }

  double normal_diffusivity(const Point& x, const Point& n) const {
    if (constant_diffusion_) return 1.0;
    return n.dot(op_.diffusion(x) * n);
  }

  /// Moves x by one sphere jump of radius `feature_distance` (returns 0) or
  /// one time step no longer than dt_cap (returns the step).
  double advance(Point& x, double feature_distance, double dt_cap, bool may_jump, Philox4x32& rng,
                 double& penetration, bool obstacle = true) const {
    if (may_jump && cfg_.sphere_jumps && feature_distance >= jump_threshold_ &&
        (laplacian_ || x.norm() - feature_distance >= drift_radius_)) {
      Point u(d_);
      for (int i = 0; i < d_; ++i) u[i] = rng.normal();
      x += (feature_distance / u.norm()) * u;
      return 0.0;
    }
    double dt = std::min(step_size(x, feature_distance), dt_cap);
    x = step(x, dt, rng, penetration, obstacle);
    return dt;
  }

  /// One step of length dt from x; reflection resolves endpoints inside D.
  /// dt may be reduced when the reflection does not resolve.
  /// With obstacle = false the step ignores D (used when a stopping sphere encloses it).
  Point step(const Point& x, double& dt, Philox4x32& rng, double& penetration,
             bool obstacle = true) const {
    for (int attempt = 0; attempt < 8; ++attempt) {
      Point xi(d_);
      for (int i = 0; i < d_; ++i) xi[i] = rng.normal();
      Point y = x;
      if (in_drift_region(x)) y += op_.drift(x) * dt;
      const double s = std::sqrt(2.0 * dt);
      if (constant_diffusion_) {
        y += s * xi;
      } else {
        y += s * (op_.diffusion_sqrt(x) * xi);
      }
      if (!dom_ || !obstacle) return y;
      if (reflect(y, penetration)) return y;
      dt *= 0.25;
    }
    throw NumericalFailure("reflection did not resolve after 8 step reductions; dt too large for the obstacle");
  }

 private:
  bool in_drift_region(const Point& x) const {
    return !laplacian_ && x.squaredNorm() < drift_radius_ * drift_radius_;
  }

  bool reflect(Point& y, double& penetration) const {
    for (int k = 0; k < 8; ++k) {
      const double s = dom_->signed_distance(y);
      if (s >= 0.0) return true;
      if (k == 0) penetration = std::max(penetration, -s);
      const Point g = dom_->signed_distance_gradient(y);
      const Point an = constant_diffusion_ ? g : Point(op_.diffusion(y) * g);
      y -= (2.0 * s / g.dot(an)) * an;
    }
    return dom_->signed_distance(y) >= 0.0;
  }

  const Domain* dom_;
  const OperatorSpec& op_;
  const PathConfig& cfg_;
  int d_;
  bool laplacian_;
  bool constant_diffusion_;
  double drift_radius_;
  double drift_cap_ = 0.0;
  double jump_threshold_ = 0.0;
};

/// True when the step from radius r0 to r1 touched the sphere of radius s:
/// either the endpoints straddle it or a Brownian bridge between them crossed.
bool crosses_sphere(double r0, double r1, double s, double ann, double dt, Philox4x32& rng) {
  const double d0 = r0 - s;
  const double d1 = r1 - s;
  if (d0 * d1 <= 0.0) return true;
  if (dt == 0.0) return false;
  const double p = std::exp(-d0 * d1 / (ann * dt));
  return p > 1e-14 && rng.uniform() < p;
}

/// Entry point on the sphere |y| = m from x outside it, drawn from harmonic
/// measure by rejection from the uniform distribution.
Point harmonic_entry(const Point& x, double m, Philox4x32& rng) {
  const int d = static_cast<int>(x.size());
  const double rx = x.norm();
  for (int tries = 0; tries < 100000; ++tries) {
    Point y(d);
    for (int i = 0; i < d; ++i) y[i] = rng.normal();
    y *= m / y.norm();
    const double accept = std::pow((rx - m) / (x - y).norm(), d);
    if (rng.uniform() < accept) return y;
  }
  throw NumericalFailure("harmonic measure sampling did not accept");
}

/// Outcome of crossing the truncation sphere with exact re-entry: true and
/// x moved onto the re-entry sphere, or false for escape.
bool tail_reentry(Point& x, double m, Philox4x32& rng) {
  const int d = static_cast<int>(x.size());
  const double p = std::pow(m / x.norm(), d - 2);
  if (rng.uniform() >= p) return false;
  x = harmonic_entry(x, m, rng);
  return true;
}

void require_exact_tail(const Domain* dom, const OperatorSpec& op, const PathConfig& cfg,
                        double inner_extent, const char* what) {
  const double m = reentry_radius(cfg);
  const double free = op.is_laplacian() ? 0.0 : op.free_radius();
  const double ext = dom ? dom->outer_extent() : 0.0;
  if (std::max({free, ext, inner_extent}) > m) {
    throw InvalidInput(std::string(what) +
                       ": exact tail needs the obstacle, the target set and the non-Laplacian "
                       "region inside the re-entry sphere; raise the truncation radius or "
                       "disable exact_tail");
  }
}

/// Time-step cap inside A and in a band around it. The same cap on both sides
/// of the boundary keeps the left-point occupation sum free of a one-sided bias.
double region_step_cap(const Region& a, const PathConfig& cfg) {
  const double size = (a.kind == Region::Kind::ball ? a.outer : a.outer - a.inner) / cfg.length_scale;
  return cfg.dt * size * size;
}

void check_region(const Domain* dom, const Region& a, int d) {
  if (a.center.size() != d) throw InvalidInput("region dimension differs from the operator");
  if (!dom) return;
  if (a.kind == Region::Kind::ball) {
    if (dom->signed_distance(a.center) < a.outer) throw InvalidInput("region A overlaps the obstacle D");
  } else if (a.inner < dom->outer_extent()) {
    throw InvalidInput("region A overlaps the obstacle D");
  }
}

/// Upper bound on the occupation of A lost by killing paths at |x| = N
/// (Laplacian kernel, mass of A rearranged into a centred ball).
double occupation_bias_bound(const Region& a, const PathConfig& cfg, int d) {
  const double ra = a.max_radius();
  const double rho = std::pow(a.volume() / cf::unit_ball_volume(d), 1.0 / d);
  return std::pow(ra / cfg.truncation_radius, d - 2) * cf::radial_kernel_shell_integral(0.0, rho, d);
}

struct PathOutcome {
  double value = 0.0;
  bool escaped = false;
  bool budget = false;
  std::uint64_t reentries = 0;
  std::uint64_t steps = 0;
};

struct ScalarResult {
  Accumulator acc;
  std::uint64_t escapes = 0;
  std::uint64_t reentries = 0;
  std::uint64_t budget = 0;
  std::uint64_t steps = 0;

  void add(const PathOutcome& o) {
    acc.add(o.value);
    escapes += o.escaped;
    reentries += o.reentries;
    budget += o.budget;
    steps += o.steps;
  }
  void merge(const ScalarResult& o) {
    acc.merge(o.acc);
    escapes += o.escapes;
    reentries += o.reentries;
    budget += o.budget;
    steps += o.steps;
  }
};

/// Runs per_path(index, result) over all samples in fixed chunks, merging the
/// chunk results in chunk order so the output does not depend on scheduling.
template <class Result, class Fn>
Result run_paths(std::uint64_t samples, int threads, Fn&& per_path) {
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<Result> results(chunks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        const std::uint64_t end = std::min(samples, (c + 1) * kChunk);
        for (std::uint64_t i = c * kChunk; i < end; ++i) per_path(i, results[c]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  const int n = std::max(1, threads);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  Result total;
  for (const auto& r : results) total.merge(r);
  return total;
}

OccupationEstimate to_estimate(const ScalarResult& r) {
  OccupationEstimate e;
  e.mean = r.acc.mean();
  e.standard_error = r.acc.standard_error();
  e.samples = r.acc.count();
  e.escapes = r.escapes;
  e.reentries = r.reentries;
  e.budget_exhausted = r.budget;
  e.steps = r.steps;
  return e;
}

/// Occupation of A for one path; optionally killed on entering B_kill.
PathOutcome occupation_path(const Stepper& stepper, const Domain* dom, const Region& a, Point x,
                            double kill_radius, const PathConfig& cfg, bool exact_tail,
                            Philox4x32& rng) {
  PathOutcome out;
  const double n_radius = cfg.truncation_radius;
  const double m = reentry_radius(cfg);
  const double a_cap = region_step_cap(a, cfg);
  const double a_band = 4.0 * std::sqrt(2.0 * a_cap);
  double penetration = 0.0;
  while (true) {
    if (out.steps >= cfg.max_steps) {
      out.budget = true;
      return out;
    }
    const double r0 = x.norm();
    const bool inside = a.contains(x);
    const bool near_a = inside || a.boundary_distance(x) < a_band;
    double ell = stepper.free_distance(x);
    if (!near_a) ell = std::min(ell, a.boundary_distance(x));
    if (dom) ell = std::min(ell, std::max(0.0, dom->signed_distance(x)));
    if (kill_radius > 0.0) ell = std::min(ell, r0 - kill_radius);
    Point y = x;
    const double dt = stepper.advance(y, ell, near_a ? a_cap : kInf, !near_a, rng, penetration);
    ++out.steps;
    if (inside) out.value += dt;
    const double r1 = y.norm();
    if (kill_radius > 0.0) {
      const double ann = stepper.normal_diffusivity(x, x / r0);
      if (crosses_sphere(r0, r1, kill_radius, ann, dt, rng)) return out;
    }
    if (r1 >= n_radius) {
      if (exact_tail && tail_reentry(y, m, rng)) {
        ++out.reentries;
      } else {
        out.escaped = true;
        return out;
      }
    }
    x = y;
  }
}

}  // namespace

PathRecord simulate_reflected_path(const Domain* dom, const OperatorSpec& op, const Point& start,
                                   const PathConfig& cfg, std::uint64_t path_index,
                                   double time_horizon) {
  validate(cfg);
  if (start.size() != op.dimension()) throw InvalidInput("start point has the wrong dimension");
  if (dom && dom->signed_distance(start) < -dom->geometric_tolerance()) {
    throw InvalidInput("start point lies inside the obstacle");
  }
  Stepper stepper(dom, op, cfg);
  Philox4x32 rng(cfg.seed, path_index);
  PathRecord rec;
  Point x = start;
  double t = 0.0;
  rec.points.push_back(x);
  rec.times.push_back(t);
  while (true) {
    if (time_horizon > 0.0 && t >= time_horizon) return rec;
    if (rec.steps >= cfg.max_steps) {
      rec.budget_exhausted = true;
      return rec;
    }
    double ell = stepper.free_distance(x);
    if (dom) ell = std::min(ell, std::max(0.0, dom->signed_distance(x)));
    double dt = stepper.step_size(x, ell);
    if (time_horizon > 0.0) dt = std::min(dt, time_horizon - t);
    x = stepper.step(x, dt, rng, rec.max_penetration);
    t += dt;
    ++rec.steps;
    rec.points.push_back(x);
    rec.times.push_back(t);
    if (x.norm() >= cfg.truncation_radius) {
      rec.escaped = true;
      return rec;
    }
  }
}

OccupationEstimate estimate_hit_prob(const Domain* dom, const OperatorSpec& op, const Point& x,
                                     double target_radius, const PathConfig& cfg) {
  validate(cfg);
  const int d = op.dimension();
  if (x.size() != d) throw InvalidInput("start point has the wrong dimension");
  if (!(target_radius > 0.0) || !(x.norm() > target_radius)) {
    throw InvalidInput("hit probability needs |x| > R_target > 0");
  }
  if (!(x.norm() < cfg.truncation_radius)) throw InvalidInput("start point beyond the truncation radius");
  const double ext = dom ? dom->outer_extent() : 0.0;
  const bool free_outside =
      (op.is_laplacian() || op.free_radius() <= target_radius) && ext <= target_radius;
  if (!free_outside && cfg.exact_tail) require_exact_tail(dom, op, cfg, target_radius, "estimate_hit_prob");
  const double m = reentry_radius(cfg);
  const bool encloses = ext <= target_radius;
  Stepper stepper(dom, op, cfg);

  auto path = [&](std::uint64_t i, ScalarResult& res) {
    Philox4x32 rng(cfg.seed, i);
    PathOutcome out;
    Point p = x;
    double penetration = 0.0;
    while (true) {
      if (out.steps >= cfg.max_steps) {
        out.budget = true;
        break;
      }
      const double r0 = p.norm();
      double ell = std::min(r0 - target_radius, stepper.free_distance(p));
      if (dom) ell = std::min(ell, std::max(0.0, dom->signed_distance(p)));
      Point y = p;
      const double dt = stepper.advance(y, ell, kInf, true, rng, penetration, !encloses);
      ++out.steps;
      const double r1 = y.norm();
      if (crosses_sphere(r0, r1, target_radius, stepper.normal_diffusivity(p, p / r0), dt, rng)) {
        out.value = 1.0;
        break;
      }
      if (r1 >= cfg.truncation_radius) {
        if (free_outside) {
          out.value = std::pow(target_radius / r1, d - 2);
          out.escaped = true;
          break;
        }
        if (cfg.exact_tail && tail_reentry(y, m, rng)) {
          ++out.reentries;
        } else {
          out.escaped = true;
          break;
        }
      }
      p = y;
    }
    res.add(out);
  };
  ScalarResult r = run_paths<ScalarResult>(cfg.samples, cfg.threads, path);
  OccupationEstimate e = to_estimate(r);
  e.truncation_corrected = free_outside || cfg.exact_tail;
  if (!e.truncation_corrected) e.truncation_bias_bound = std::pow(target_radius / cfg.truncation_radius, d - 2);
  return e;
}

OccupationEstimate estimate_occupation(const Domain* dom, const OperatorSpec& op, const Point& x,
                                       const Region& a, const PathConfig& cfg) {
  return estimate_occupation_from(dom, op, std::vector<Point>{x}, std::vector<double>{1.0}, a, cfg);
}

OccupationEstimate estimate_occupation_from(const Domain* dom, const OperatorSpec& op,
                                            const std::vector<Point>& starts,
                                            const std::vector<double>& weights, const Region& a,
                                            const PathConfig& cfg) {
  validate(cfg);
  const int d = op.dimension();
  if (starts.empty() || starts.size() != weights.size()) {
    throw InvalidInput("start points and weights must be non-empty and of equal length");
  }
  check_region(dom, a, d);
  std::vector<double> cumulative(weights.size());
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0)) throw InvalidInput("start weights must be non-negative");
    total += weights[k];
    cumulative[k] = total;
  }
  if (!(total > 0.0)) throw InvalidInput("start weights sum to zero");
  for (const Point& s : starts) {
    if (s.size() != d) throw InvalidInput("start point has the wrong dimension");
    if (!(s.norm() < cfg.truncation_radius)) throw InvalidInput("start point beyond the truncation radius");
    if (dom && dom->signed_distance(s) < -dom->geometric_tolerance()) {
      throw InvalidInput("start point lies inside the obstacle");
    }
  }
  if (cfg.exact_tail) require_exact_tail(dom, op, cfg, a.max_radius(), "estimate_occupation");
  Stepper stepper(dom, op, cfg);

  auto path = [&](std::uint64_t i, ScalarResult& res) {
    Philox4x32 rng(cfg.seed, i);
    std::size_t k = 0;
    if (starts.size() > 1) {
      const double u = rng.uniform() * total;
      k = std::min<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin(),
                                starts.size() - 1);
    }
    res.add(occupation_path(stepper, dom, a, starts[k], 0.0, cfg, cfg.exact_tail, rng));
  };
  ScalarResult r = run_paths<ScalarResult>(cfg.samples, cfg.threads, path);
  OccupationEstimate e = to_estimate(r);
  e.truncation_corrected = cfg.exact_tail;
  if (!cfg.exact_tail) e.truncation_bias_bound = occupation_bias_bound(a, cfg, d);
  return e;
}

OccupationEstimate estimate_green_dirichlet(const Point& z, const Region& a, double radius,
                                            const OperatorSpec& op, const PathConfig& cfg) {
  validate(cfg);
  const int d = op.dimension();
  if (z.size() != d) throw InvalidInput("start point has the wrong dimension");
  if (!(radius > 0.0) || !(z.norm() > radius)) throw InvalidInput("Dirichlet Green estimate needs |z| > R > 0");
  if (!(z.norm() < cfg.truncation_radius)) throw InvalidInput("start point beyond the truncation radius");
  check_region(nullptr, a, d);
  if (a.min_radius() < radius) throw InvalidInput("region A must lie outside the Dirichlet ball");
  if (cfg.exact_tail) require_exact_tail(nullptr, op, cfg, std::max(a.max_radius(), radius), "estimate_green_dirichlet");
  Stepper stepper(nullptr, op, cfg);

  auto path = [&](std::uint64_t i, ScalarResult& res) {
    Philox4x32 rng(cfg.seed, i);
    res.add(occupation_path(stepper, nullptr, a, z, radius, cfg, cfg.exact_tail, rng));
  };
  ScalarResult r = run_paths<ScalarResult>(cfg.samples, cfg.threads, path);
  OccupationEstimate e = to_estimate(r);
  e.truncation_corrected = cfg.exact_tail;
  if (!cfg.exact_tail) e.truncation_bias_bound = occupation_bias_bound(a, cfg, d);
  return e;
}

namespace {

struct CircuitResult {
  std::vector<std::uint64_t> survival;
  std::vector<Accumulator> circuit;
  Accumulator total;
  double return_leg = 0.0;
  double max_defect = 0.0;
  std::vector<std::vector<Point>> entries;
  std::uint64_t budget = 0;
  std::uint64_t paths = 0;

  void init(int k) {
    if (!survival.empty()) return;
    survival.assign(k, 0);
    circuit.assign(k, Accumulator{});
    entries.assign(k, {});
  }
  void merge(const CircuitResult& o) {
    if (o.survival.empty()) return;
    init(static_cast<int>(o.survival.size()));
    for (std::size_t n = 0; n < survival.size(); ++n) {
      survival[n] += o.survival[n];
      circuit[n].merge(o.circuit[n]);
      for (const Point& p : o.entries[n]) {
        if (entries[n].size() >= kEntryPointCap) break;
        entries[n].push_back(p);
      }
    }
    total.merge(o.total);
    return_leg += o.return_leg;
    max_defect = std::max(max_defect, o.max_defect);
    budget += o.budget;
    paths += o.paths;
  }
};

}  // namespace

CircuitStats circuit_decomposition(const Domain& dom, const OperatorSpec& op, const Point& x, double rho,
                                   double radius, const Region& a, const PathConfig& cfg,
                                   int max_circuits) {
  validate(cfg);
  const int d = op.dimension();
  if (x.size() != d) throw InvalidInput("start point has the wrong dimension");
  if (std::abs(dom.signed_distance(x)) > 1e-6 * dom.bounding_radius()) {
    throw InvalidInput("circuit decomposition must start on the boundary of D");
  }
  if (!(rho > 1.0)) throw InvalidInput("circuit decomposition needs rho > 1");
  if (!(radius >= dom.outer_extent())) throw InvalidInput("circuit radius R must enclose D");
  if (max_circuits < 1) throw InvalidInput("max_circuits must be positive");
  check_region(&dom, a, d);
  const double outer = rho * radius;
  require_exact_tail(&dom, op, cfg, std::max(outer, a.max_radius()), "circuit_decomposition");
  const double m = reentry_radius(cfg);
  const double a_cap = region_step_cap(a, cfg);
  const double a_band = 4.0 * std::sqrt(2.0 * a_cap);
  Stepper stepper(&dom, op, cfg);

  auto path = [&](std::uint64_t i, CircuitResult& res) {
    res.init(max_circuits);
    ++res.paths;
    Philox4x32 rng(cfg.seed, i);
    std::vector<double> occ(max_circuits, 0.0);
    double leg0 = 0.0;
    double total = 0.0;
    int circuits = 0;
    bool outward = true;  // heading to the sphere rho R, else to R
    Point p = x;
    double penetration = 0.0;
    std::uint64_t steps = 0;
    while (true) {
      if (steps >= cfg.max_steps) {
        ++res.budget;
        break;
      }
      const double r0 = p.norm();
      const bool inside = a.contains(p);
      const bool near_a = inside || a.boundary_distance(p) < a_band;
      double ell = near_a ? stepper.free_distance(p) : std::min(a.boundary_distance(p), stepper.free_distance(p));
      if (outward) {
        ell = std::min({ell, outer - r0, std::max(0.0, dom.signed_distance(p))});
      } else {
        ell = std::min(ell, r0 - radius);
      }
      Point y = p;
      const double dt = stepper.advance(y, ell, near_a ? a_cap : kInf, !near_a, rng, penetration, outward);
      ++steps;
      if (inside) {
        total += dt;
        if (outward) {
          leg0 += dt;
        } else {
          occ[std::min(circuits, max_circuits) - 1] += dt;
        }
      }
      const double r1 = y.norm();
      const double target = outward ? outer : radius;
      if (crosses_sphere(r0, r1, target, stepper.normal_diffusivity(p, p / r0), dt, rng)) {
        y *= target / r1;
        if (outward) {
          ++circuits;
          if (circuits <= max_circuits) {
            ++res.survival[circuits - 1];
            if (res.entries[circuits - 1].size() < kEntryPointCap) res.entries[circuits - 1].push_back(y);
          }
        }
        outward = !outward;
      } else if (r1 >= cfg.truncation_radius) {
        if (!tail_reentry(y, m, rng)) break;
      }
      p = y;
    }
    double sum = leg0;
    for (int n = 0; n < max_circuits; ++n) {
      res.circuit[n].add(occ[n]);
      sum += occ[n];
    }
    res.total.add(total);
    res.return_leg += leg0;
    res.max_defect = std::max(res.max_defect, std::abs(total - sum));
  };
  CircuitResult r = run_paths<CircuitResult>(cfg.samples, cfg.threads, path);

  CircuitStats s;
  s.rho = rho;
  s.radius = radius;
  s.paths = r.paths;
  s.survival = r.survival;
  for (const auto& acc : r.circuit) {
    s.circuit_occupation.push_back(acc.mean());
    s.circuit_occupation_se.push_back(acc.standard_error());
  }
  s.return_leg_occupation = r.paths ? r.return_leg / static_cast<double>(r.paths) : 0.0;
  s.total_occupation = r.total.mean();
  s.total_occupation_se = r.total.standard_error();
  s.max_partition_defect = r.max_defect;
  s.entry_points = std::move(r.entries);
  s.budget_exhausted = r.budget;
  return s;
}

TwoSidedHittingReport verify_twosided_hitting(const CircuitStats& stats, double v_min, double v_max,
                                              std::uint64_t min_survivors) {
  if (!(v_min >= 0.0) || !(v_max >= v_min) || !(v_max <= 1.0)) {
    throw InvalidInput("two-sided hitting check needs 0 <= min V <= max V <= 1");
  }
  TwoSidedHittingReport rep;
  for (int n = 1; n <= static_cast<int>(stats.survival.size()); ++n) {
    const double p = stats.survival_frequency(n);
    const double se = stats.survival_standard_error(n);
    const double lo = std::pow(v_min, n - 1);
    const double hi = std::pow(v_max, n - 1);
    const bool skip = stats.survival[n - 1] < min_survivors;
    const bool ok = skip || (p >= lo - 3.0 * se && p <= hi + 3.0 * se);
    rep.index.push_back(n);
    rep.frequency.push_back(p);
    rep.standard_error.push_back(se);
    rep.lower.push_back(lo);
    rep.upper.push_back(hi);
    rep.skipped.push_back(skip);
    rep.pass.push_back(ok);
    rep.all_pass = rep.all_pass && ok;
  }
  return rep;
}

}  // namespace fluxbound
