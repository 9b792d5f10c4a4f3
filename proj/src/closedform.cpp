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

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fluxbound::closedform {

namespace {

void require_dimension(int d) {
  if (d < 3) throw InvalidInput("dimension must be >= 3 (got " + std::to_string(d) + ")");
}

void require_gamma(double gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw InvalidInput("gamma must be a finite number > 1");
  }
}

// Golden-section minimisation of a unimodal function on [a, b].
template <class F>
double golden_min(F&& f, double a, double b, double* arg_out, int iterations = 80) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int k = 0; k < iterations; ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  if (arg_out) *arg_out = x;
  return f(x);
}

}  // namespace

double unit_sphere_area_any(int d) {
  if (d < 1) throw InvalidInput("sphere dimension must be >= 1");
  // omega_{k+2} = 2 pi omega_k / k, seeded with omega_1 = 2 and omega_2 = 2 pi.
  double w = (d % 2 == 1) ? 2.0 : 2.0 * std::numbers::pi;
  for (int k = (d % 2 == 1) ? 1 : 2; k < d; k += 2) w *= 2.0 * std::numbers::pi / k;
  return w;
}

double sphere_area(int d) {
  require_dimension(d);
  return unit_sphere_area_any(d);
}

double unit_ball_volume(int d) { return unit_sphere_area_any(d) / d; }

double free_green(const Point& x, const Point& y) {
  const int d = static_cast<int>(x.size());
  require_dimension(d);
  const double r = (x - y).norm();
  if (r == 0.0) throw InvalidInput("free_green: coincident points");
  return std::pow(r, 2.0 - d) / ((d - 2) * sphere_area(d));
}

double dirichlet_green_exterior_ball(const Point& x, const Point& y, double radius) {
  const int d = static_cast<int>(x.size());
  require_dimension(d);
  if (!(radius > 0.0)) throw InvalidInput("dirichlet_green_exterior_ball: radius must be > 0");
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx <= radius || ny <= radius) {
    throw InvalidInput("dirichlet_green_exterior_ball: arguments must lie outside the closed ball");
  }
  const double direct = (x - y).norm();
  if (direct == 0.0) throw InvalidInput("dirichlet_green_exterior_ball: coincident points");
  const double image = ((ny / radius) * x - (radius / ny) * y).norm();
  const double k = 1.0 / ((d - 2) * sphere_area(d));
  return k * (std::pow(direct, 2.0 - d) - std::pow(image, 2.0 - d));
}

double hit_prob_ball(double r, double radius, int d) {
  require_dimension(d);
  if (!(radius > 0.0) || r < radius) throw InvalidInput("hit_prob_ball: need r >= R > 0");
  return std::pow(radius / r, d - 2.0);
}

double annulus_hit_prob(double r, double inner, double outer, int d) {
  require_dimension(d);
  if (!(inner > 0.0) || r < inner || r > outer || !(outer > inner)) {
    throw InvalidInput("annulus_hit_prob: need 0 < inner <= r <= outer, inner < outer");
  }
  const double e = 2.0 - d;
  return (std::pow(r, e) - std::pow(outer, e)) / (std::pow(inner, e) - std::pow(outer, e));
}

double c_plus(double gamma, int d) {
  require_gamma(gamma);
  require_dimension(d);
  const double p = (d - 2.0) / (d - 1.0);
  const double gp = std::pow(gamma, p);
  const double root = std::pow(gamma, 1.0 / (d - 1.0));
  return gp * std::pow(gamma, d - 2.0) / ((gp - 1.0) * std::pow(gamma - root, d - 2.0));
}

double c_minus_closed_form(double gamma, int d) {
  require_gamma(gamma);
  require_dimension(d);
  const double dm = d - 1.0;
  const double first = std::pow(gamma / (gamma + std::pow(gamma, 1.0 / dm)), d - 2.0);
  const double second = std::pow(gamma / (std::pow(gamma, d / dm) - 1.0), d - 2.0);
  return (first - second) / (1.0 - std::pow(gamma, (2.0 - d) / dm));
}

double gamma0(int d) {
  require_dimension(d);
  // Negative as gamma -> 1+, positive for large gamma: bracket, then bisect.
  double lo = 1.0 + std::sqrt(2.0);
  while (c_minus_closed_form(lo, d) > 0.0) lo = 1.0 + 0.5 * (lo - 1.0);
  double hi = 2.0 * lo;
  while (c_minus_closed_form(hi, d) <= 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 200 && hi - lo > 1e-14 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (c_minus_closed_form(mid, d) > 0.0 ? hi : lo) = mid;
  }
  return hi;
}

double c_minus_fallback(double gamma, int d) {
  require_gamma(gamma);
  require_dimension(d);
  const double rho = 0.5 * (1.0 + gamma);
  const double e = d - 2.0;
  // (d-2) omega_d G_Dir(z, y) |y|^{d-2} with R = 1, |z| = rho, |y| = gamma / t and
  // angle psi between z and y; t = 0 is the |y| -> infinity limit.
  auto kernel = [&](double t, double psi) {
    const double c = std::cos(psi);
    const double u = t / gamma;
    const double direct = rho * rho * u * u + 1.0 - 2.0 * rho * u * c;
    const double image = rho * rho + u * u - 2.0 * rho * u * c;
    return std::pow(direct, -0.5 * e) - std::pow(image, -0.5 * e);
  };
  constexpr int nt = 201;
  constexpr int npsi = 181;
  double best = kernel(0.0, 0.0);
  double best_t = 0.0;
  double best_psi = 0.0;
  for (int i = 0; i < nt; ++i) {
    const double t = static_cast<double>(i) / (nt - 1);
    for (int j = 0; j < npsi; ++j) {
      const double psi = std::numbers::pi * j / (npsi - 1);
      const double v = kernel(t, psi);
      if (v < best) {
        best = v;
        best_t = t;
        best_psi = psi;
      }
    }
  }
  // Coordinate-wise golden-section polish inside the neighbouring grid cells.
  const double dt = 1.0 / (nt - 1);
  const double dpsi = std::numbers::pi / (npsi - 1);
  for (int sweep = 0; sweep < 4; ++sweep) {
    double arg = best_t;
    double v = golden_min([&](double t) { return kernel(t, best_psi); },
                          std::max(0.0, best_t - dt), std::min(1.0, best_t + dt), &arg);
    if (v < best) {
      best = v;
      best_t = arg;
    }
    v = golden_min([&](double p) { return kernel(best_t, p); },
                   std::max(0.0, best_psi - dpsi), std::min(std::numbers::pi, best_psi + dpsi),
                   &arg);
    if (v < best) {
      best = v;
      best_psi = arg;
    }
  }
  return best / (1.0 - std::pow(rho, -e));
}

double c_minus(double gamma, int d) {
  require_gamma(gamma);
  require_dimension(d);
  if (gamma >= gamma0(d)) return c_minus_closed_form(gamma, d);
  return c_minus_fallback(gamma, d);
}

double rho_star(double gamma, int d) {
  require_gamma(gamma);
  require_dimension(d);
  return std::pow(gamma, 1.0 / (d - 1.0));
}

double lower_envelope_ratio(double gamma, double rho, int d) {
  require_dimension(d);
  if (!(rho > 1.0) || !(rho < gamma)) {
    throw InvalidInput("lower_envelope_ratio: need 1 < rho < gamma");
  }
  return std::pow(gamma / (gamma + rho), d - 2.0) - std::pow(gamma / (gamma * rho - 1.0), d - 2.0);
}

BoundConstants bound_constants(double gamma, int d) {
  BoundConstants b;
  b.gamma = gamma;
  b.dimension = d;
  b.rho_star = rho_star(gamma, d);
  b.c_plus = c_plus(gamma, d);
  b.gamma0 = gamma0(d);
  b.c_minus_closed_form = gamma >= b.gamma0;
  b.c_minus = c_minus(gamma, d);
  return b;
}

double radial_kernel_shell_integral(double a, double b, int d) {
  require_dimension(d);
  if (!(a >= 0.0) || !(b >= a)) throw InvalidInput("radial_kernel_shell_integral: need 0 <= a <= b");
  return (b * b - a * a) / (2.0 * (d - 2.0));
}

}  // namespace fluxbound::closedform
