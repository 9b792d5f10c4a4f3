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

#include "fluxbound/operator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace fluxbound {

namespace {

// Radius beyond which amplitude * exp(-r^2/w^2) is below 1e-15.
double gaussian_support(double amplitude, double width) {
  const double a = std::abs(amplitude);
  if (a <= 1e-15) return 0.0;
  return width * std::sqrt(std::log(a / 1e-15));
}

}  // namespace

OperatorSpec::OperatorSpec(std::string name, int dimension, MatrixField a, ScalarField q,
                           VectorField grad_q, double free_radius, double length_scale)
    : name_(std::move(name)),
      dim_(dimension),
      a_(std::move(a)),
      q_(std::move(q)),
      grad_q_(std::move(grad_q)),
      free_radius_(free_radius),
      length_scale_(length_scale) {
  if (dim_ < 3 || dim_ > kMaxDim) throw InvalidInput("operator dimension must be in [3, 8]");
  if (!(length_scale_ > 0.0)) throw InvalidInput("operator length scale must be positive");
}

OperatorSpec OperatorSpec::laplacian(int d) {
  return OperatorSpec("laplacian", d, nullptr, nullptr, nullptr, 0.0, 1.0);
}

OperatorSpec OperatorSpec::q_bump(int d, double amplitude, double width, double shift) {
  if (!(width > 0.0) || !std::isfinite(amplitude)) {
    throw InvalidInput("q_bump: width must be positive and amplitude finite");
  }
  const double w2 = width * width;
  auto q = [amplitude, w2, shift](const Point& x) {
    return shift + amplitude * std::exp(-x.squaredNorm() / w2);
  };
  auto grad = [amplitude, w2](const Point& x) -> Point {
    return (-2.0 * amplitude / w2 * std::exp(-x.squaredNorm() / w2)) * x;
  };
  std::string name = "q_bump(kappa=" + std::to_string(amplitude) + ", w=" + std::to_string(width) + ")";
  OperatorSpec op(std::move(name), d, nullptr, q, grad, gaussian_support(amplitude, width), width);
  op.shift_ = shift;
  return op;
}

OperatorSpec OperatorSpec::isotropic_bump(int d, double beta, double width, double q_amplitude) {
  if (!(width > 0.0) || !(beta > -1.0)) {
    throw InvalidInput("isotropic_bump: need width > 0 and beta > -1");
  }
  const double w2 = width * width;
  auto a = [beta, w2, d](const Point& x) -> SmallMatrix {
    return (1.0 + beta * std::exp(-x.squaredNorm() / w2)) * SmallMatrix::Identity(d, d);
  };
  OperatorSpec bump = q_bump(d, q_amplitude, width);
  const double support = std::max(gaussian_support(beta, width), bump.free_radius_);
  return OperatorSpec("isotropic_bump(beta=" + std::to_string(beta) + ")", d, a, bump.q_,
                      bump.grad_q_, support, width);
}

SmallMatrix OperatorSpec::diffusion(const Point& x) const {
  if (!a_) return SmallMatrix::Identity(dim_, dim_);
  return a_(x);
}

SmallMatrix OperatorSpec::diffusion_sqrt(const Point& x) const {
  if (!a_) return SmallMatrix::Identity(dim_, dim_);
  Eigen::LLT<SmallMatrix> llt(a_(x));
  if (llt.info() != Eigen::Success) throw NumericalFailure("diffusion matrix is not positive definite");
  return llt.matrixL();
}

double OperatorSpec::weight_exponent(const Point& x) const { return q_ ? q_(x) : shift_; }

Point OperatorSpec::weight_gradient(const Point& x) const {
  if (!q_) return Point::Zero(dim_);
  if (grad_q_) return grad_q_(x);
  const double h = 1e-5 * length_scale_;
  Point g(dim_);
  for (int i = 0; i < dim_; ++i) {
    Point e = unit_vector(dim_, i) * h;
    g[i] = (q_(x + e) - q_(x - e)) / (2.0 * h);
  }
  return g;
}

Point OperatorSpec::diffusion_divergence(const Point& x) const {
  Point div = Point::Zero(dim_);
  if (!a_) return div;
  const double h = 1e-5 * length_scale_;
  for (int j = 0; j < dim_; ++j) {
    Point e = unit_vector(dim_, j) * h;
    const SmallMatrix dp = a_(x + e);
    const SmallMatrix dm = a_(x - e);
    for (int i = 0; i < dim_; ++i) div[i] += (dp(i, j) - dm(i, j)) / (2.0 * h);
  }
  return div;
}

Point OperatorSpec::drift(const Point& x) const {
  if (is_laplacian()) return Point::Zero(dim_);
  return diffusion_divergence(x) + diffusion(x) * weight_gradient(x);
}

Point OperatorSpec::first_order_coefficient(const Point& x) const { return -drift(x); }

OperatorSpec OperatorSpec::shifted(double c) const {
  OperatorSpec op = *this;
  if (q_) {
    auto base = q_;
    op.q_ = [base, c](const Point& x) { return base(x) + c; };
  } else {
    op.q_ = [s = shift_ + c](const Point&) { return s; };
    op.grad_q_ = [d = dim_](const Point&) -> Point { return Point::Zero(d); };
  }
  op.shift_ = shift_ + c;
  op.name_ = name_ + "+" + std::to_string(c);
  return op;
}

std::pair<double, double> OperatorSpec::ellipticity(std::span<const Point> samples) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Point& x : samples) {
    const SmallMatrix a = diffusion(x);
    if ((a - a.transpose()).norm() > 1e-12 * a.norm()) {
      throw NumericalFailure("diffusion matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(a, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
    hi = std::max(hi, es.eigenvalues().maxCoeff());
  }
  return {lo, hi};
}

double OperatorSpec::drift_identity_residual(const Point& x, const Point& c, const SmallMatrix& m,
                                             double h) const {
  auto flux = [&](const Point& y) -> Point {
    return std::exp(weight_exponent(y)) * (diffusion(y) * (c + 2.0 * m * y));
  };
  double div = 0.0;
  for (int i = 0; i < dim_; ++i) {
    Point e = unit_vector(dim_, i) * h;
    div += (flux(x + e)[i] - flux(x - e)[i]) / (2.0 * h);
  }
  const double divergence_form = std::exp(-weight_exponent(x)) * div;
  const double second = (diffusion(x) * (2.0 * m)).trace();
  const double first = drift(x).dot(c + 2.0 * m * x);
  return std::abs(divergence_form - (second + first));
}

}  // namespace fluxbound
