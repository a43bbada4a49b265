// Copyright 2026 The otflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "otflow/random.hpp"
#include "otflow/sample.hpp"
#include "otflow/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace otflow {

enum class FeatureKind
{
  erf_radial,
  inverse_multiquadric
};

const char* to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

//! Penalty lambda on y-motion in the cost (lambda |y - y'|^2 + |x - x'|^2) / 2.
//! The infinite penalty is represented exactly and freezes y.
class Penalty
{
public:
  //! Throws InvalidArgument unless lambda > 0; +inf gives the infinite penalty.
  explicit Penalty(double lambda);
  static Penalty infinite() { return Penalty(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return std::isinf(lambda_); }
  double value() const { return lambda_; }
  //! 1 / lambda, exactly 0 for the infinite penalty.
  double y_scale() const { return is_infinite() ? 0.0 : 1.0 / lambda_; }

  friend bool operator==(const Penalty&, const Penalty&) = default;

private:
  double lambda_;
};

//! One radial basis element F(|z - center|) with bandwidth alpha.
struct Feature
{
  FeatureKind kind = FeatureKind::erf_radial;
  Vector center;
  double bandwidth = 1.0;

  Index dim() const { return center.size(); }
  void validate() const;
};

//! Ordered features sharing one ambient dimension.
class FeatureSet
{
public:
  FeatureSet() = default;
  explicit FeatureSet(std::vector<Feature> features);

  Index size() const { return static_cast<Index>(features_.size()); }
  Index dim() const { return features_.empty() ? 0 : features_.front().dim(); }
  const Feature& operator[](Index j) const { return features_[static_cast<std::size_t>(j)]; }
  const std::vector<Feature>& features() const { return features_; }
  auto begin() const { return features_.begin(); }
  auto end() const { return features_.end(); }

private:
  std::vector<Feature> features_;
};

// ---------------------------------------------------------------------------
// Radial profiles, templated on the scalar so that tests can evaluate them in
// extended precision.
// ---------------------------------------------------------------------------

//! F(r).
//!   erf_radial:            r erf(r/a) + a exp(-(r/a)^2) / sqrt(pi)
//!   inverse_multiquadric:  (1 + (r/a)^2)^(-1/2)
template <typename Scalar>
Scalar radial_value(FeatureKind kind, const Scalar& r, const Scalar& a)
{
  using std::erf;
  using std::exp;
  using std::sqrt;
  const Scalar u = r / a;
  if (kind == FeatureKind::erf_radial) {
    const Scalar inv_sqrt_pi = Scalar(1) / sqrt(Scalar(std::numbers::pi));
    return r * erf(u) + a * exp(-u * u) * inv_sqrt_pi;
  }
  return Scalar(1) / sqrt(Scalar(1) + u * u);
}

//! F'(r).
template <typename Scalar>
Scalar radial_slope(FeatureKind kind, const Scalar& r, const Scalar& a)
{
  using std::erf;
  using std::sqrt;
  const Scalar u = r / a;
  if (kind == FeatureKind::erf_radial) {
    return erf(u);
  }
  const Scalar s = Scalar(1) + u * u;
  return -(r / (a * a)) / (s * sqrt(s));
}

//! F'(r) / r, continuously extended to r = 0. The gradient is this times
//! (z - center).
template <typename Scalar>
Scalar radial_slope_over_r(FeatureKind kind, const Scalar& r, const Scalar& a)
{
  using std::erf;
  using std::sqrt;
  if (kind == FeatureKind::erf_radial) {
    if (r == Scalar(0)) {
      return Scalar(2) / (a * sqrt(Scalar(std::numbers::pi)));
    }
    return erf(r / a) / r;
  }
  const Scalar u = r / a;
  const Scalar s = Scalar(1) + u * u;
  return -Scalar(1) / (a * a * s * sqrt(s));
}

//! (F''(r) - F'(r)/r) / r^2, continuously extended to r = 0. The Hessian is
//! slope_over_r * I + this * (z - c)(z - c)^T.
template <typename Scalar>
Scalar radial_hessian_coeff(FeatureKind kind, const Scalar& r, const Scalar& a)
{
  using std::erf;
  using std::exp;
  using std::sqrt;
  const Scalar u = r / a;
  if (kind == FeatureKind::erf_radial) {
    const Scalar two_over_sqrt_pi = Scalar(2) / sqrt(Scalar(std::numbers::pi));
    if (u < Scalar(1e-3)) {
      // series of (exp(-u^2) - erf(u)/(u sqrt(pi)/2)) / u^2
      const Scalar u2 = u * u;
      return two_over_sqrt_pi / (a * a * a) *
             (Scalar(-2) / Scalar(3) + Scalar(2) / Scalar(5) * u2 -
              u2 * u2 / Scalar(7));
    }
    const Scalar second = two_over_sqrt_pi / a * exp(-u * u);
    return (second - erf(u) / r) / (r * r);
  }
  const Scalar s = Scalar(1) + u * u;
  return Scalar(3) / (a * a * a * a * s * s * sqrt(s));
}

// ---------------------------------------------------------------------------
// Point evaluation
// ---------------------------------------------------------------------------

double eval_feature(const Feature& f, const Eigen::Ref<const Vector>& z);
Vector grad_feature(const Feature& f, const Eigen::Ref<const Vector>& z);
Eigen::MatrixXd hessian_feature(const Feature& f, const Eigen::Ref<const Vector>& z);

//! (d_y F / lambda, d_x F), where the first `y_dim` coordinates are y.
//! The y block is exactly zero for the infinite penalty.
Vector rescaled_grad(const Feature& f,
                     const Eigen::Ref<const Vector>& z,
                     const Penalty& lambda,
                     Index y_dim);

//! Scales the y block of a gradient in place.
void rescale_gradient(Eigen::Ref<Vector> grad, const Penalty& lambda, Index y_dim);

// ---------------------------------------------------------------------------
// Batch evaluation over the rows of a point matrix
// ---------------------------------------------------------------------------

//! F(z_i) for every row.
Vector feature_values(const Feature& f, const Eigen::Ref<const RowMatrix>& points);

//! F'(r_i)/r_i for every row together with the offsets z_i - c, so that the
//! gradient of row i is coeff(i) * offsets.row(i).
struct RadialGradients
{
  Vector coeff;
  RowMatrix offsets;
};
RadialGradients feature_gradients(const Feature& f,
                                  const Eigen::Ref<const RowMatrix>& points);

// ---------------------------------------------------------------------------
// Center selection, bandwidths and the bandwidth schedule
// ---------------------------------------------------------------------------

struct CenterOptions
{
  //! Probability that a uniformly drawn center comes from the reference batch
  //! rather than the target batch.
  double reference_share = 0.5;
  //! Standard deviation of the jitter added to y* for localized centers.
  double jitter_sd = 0.1;
};

//! Draw `count` centers from the rows of both batches. When `y_star` is given
//! the first round(locality_weight * count) centers have their y coordinates
//! replaced by y_star + N(0, jitter_sd^2).
RowMatrix select_centers(const SampleBatch& ref_batch,
                         const SampleBatch& target_batch,
                         Index count,
                         const std::optional<Vector>& y_star,
                         double locality_weight,
                         const CenterOptions& options,
                         Rng& rng);

//! m(t) = 1 + m0 / (1 + exp((t - t_max) / sigma)).
struct Schedule
{
  double m0 = 10.0;
  double t_max = 1000.0;
  double sigma = 100.0;

  //! sigma = t_max / 10.
  static Schedule with_defaults(double t_max, double m0 = 10.0)
  {
    return Schedule{ m0, t_max, t_max / 10.0 };
  }
};

double schedule_m(double t, const Schedule& s);

class DensityEstimate;

//! alpha = m_t * (n_p * (1/rho(z_c) + 1/mu(z_c)))^(1/dim), with each density
//! floored at 1e-12 times the estimate's peak before inversion.
double bandwidth_for_center(const Eigen::Ref<const Vector>& z_c,
                            const DensityEstimate& rho_kde,
                            const DensityEstimate& mu_kde,
                            double n_p,
                            double dim,
                            double m_t);

//! Same rule from already evaluated densities.
double bandwidth_from_densities(double rho, double mu, double n_p, double dim, double m_t);

} // namespace otflow
