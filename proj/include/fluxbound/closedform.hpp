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

#include "fluxbound/types.hpp"

namespace fluxbound::closedform {

/// Hyper-surface measure of the unit sphere S^{d-1} in R^d, d >= 3.
double sphere_area(int d);

/// Same as sphere_area but accepts any d >= 1 (omega_1 = 2, omega_2 = 2*pi).
/// Used for lower-dimensional azimuthal factors in axisymmetric reductions.
double unit_sphere_area_any(int d);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

/// Free-space Green's function of the Laplacian in R^d: |x-y|^{2-d} / ((d-2) omega_d).
double free_green(const Point& x, const Point& y);

/// Dirichlet Green's function of the Laplacian in the exterior of the ball B_R,
/// built from the Kelvin image of the pole.
double dirichlet_green_exterior_ball(const Point& x, const Point& y, double radius);

/// Probability that Brownian motion started at radius r ever hits the closed ball B_R.
double hit_prob_ball(double r, double radius, int d);

/// Probability of hitting the sphere of radius `inner` before the sphere of radius
/// `outer`, starting at radius r with inner <= r <= outer.
double annulus_hit_prob(double r, double inner, double outer, int d);

/// Upper envelope constant for |y| >= gamma R. Strictly greater than 1; tends to 1.
double c_plus(double gamma, int d);

/// The closed-form lower envelope expression at rho = gamma^{1/(d-1)}. May be
/// non-positive for gamma close to 1; c_minus() handles that range.
double c_minus_closed_form(double gamma, int d);

/// Smallest gamma at which c_minus_closed_form becomes positive (bisection).
double gamma0(int d);

/// Lower envelope constant, positive for every gamma > 1. Uses the closed form
/// for gamma >= gamma0(d) and the pointwise Dirichlet-kernel infimum below it.
double c_minus(double gamma, int d);

/// Lower constant obtained from the infimum of the exterior-ball Dirichlet kernel
/// over |z| = rho R and |y| >= gamma R, with rho = (1 + gamma) / 2.
double c_minus_fallback(double gamma, int d);

/// Maximiser of (1 - rho^{2-d}) (gamma - rho)^{d-2} over rho in (1, gamma).
double rho_star(double gamma, int d);

/// (gamma/(gamma+rho))^{d-2} - (gamma/(gamma rho - 1))^{d-2}, a lower bound on
/// (d-2) omega_d G_Dir(z, y) |y|^{d-2} for |z| = rho R, |y| >= gamma R.
double lower_envelope_ratio(double gamma, double rho, int d);

struct BoundConstants {
  double gamma = 0.0;
  int dimension = 3;
  double rho_star = 0.0;
  double c_plus = 0.0;
  double c_minus = 0.0;
  double gamma0 = 0.0;
  bool c_minus_closed_form = true;
};

BoundConstants bound_constants(double gamma, int d);

/// Integral of |y|^{2-d} / ((d-2) omega_d) over the shell a <= |y| <= b.
double radial_kernel_shell_integral(double a, double b, int d);

}  // namespace fluxbound::closedform
