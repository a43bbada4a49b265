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

#include "otflow/features.hpp"

#include "otflow/kde.hpp"

#include <algorithm>

namespace otflow {

const char* to_string(FeatureKind kind)
{
  return kind == FeatureKind::erf_radial ? "erf_radial" : "inverse_multiquadric";
}

FeatureKind feature_kind_from_string(const std::string& name)
{
  if (name == "erf_radial") {
    return FeatureKind::erf_radial;
  }
  if (name == "inverse_multiquadric") {
    return FeatureKind::inverse_multiquadric;
  }
  throw InvalidArgument("unknown feature kind '" + name + "'");
}

Penalty::Penalty(double lambda)
  : lambda_(lambda)
{
  if (!(lambda > 0.0)) {
    throw InvalidArgument("penalty lambda must be positive, got " +
                          std::to_string(lambda));
  }
}

void Feature::validate() const
{
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidArgument("feature bandwidth must be positive and finite");
  }
  if (center.size() < 1 || !center.allFinite()) {
    throw InvalidArgument("feature center must be a finite, nonempty vector");
  }
}

FeatureSet::FeatureSet(std::vector<Feature> features)
  : features_(std::move(features))
{
  if (features_.empty()) {
    throw InvalidArgument("FeatureSet needs at least one feature");
  }
  for (const auto& f : features_) {
    f.validate();
    if (f.dim() != features_.front().dim()) {
      throw InvalidArgument("FeatureSet: features have different dimensions");
    }
  }
}

namespace {

void check_dim(const Feature& f, Index n)
{
  if (f.dim() != n) {
    throw InvalidArgument("feature of dimension " + std::to_string(f.dim()) +
                          " evaluated at a point of dimension " + std::to_string(n));
  }
}

} // namespace

double eval_feature(const Feature& f, const Eigen::Ref<const Vector>& z)
{
  check_dim(f, z.size());
  return radial_value(f.kind, (z - f.center).norm(), f.bandwidth);
}

Vector grad_feature(const Feature& f, const Eigen::Ref<const Vector>& z)
{
  check_dim(f, z.size());
  const Vector offset = z - f.center;
  const double r = offset.norm();
  if (r == 0.0) {
    return Vector::Zero(z.size());
  }
  return radial_slope_over_r(f.kind, r, f.bandwidth) * offset;
}

Eigen::MatrixXd hessian_feature(const Feature& f, const Eigen::Ref<const Vector>& z)
{
  check_dim(f, z.size());
  const Vector offset = z - f.center;
  const double r = offset.norm();
  Eigen::MatrixXd h =
    radial_hessian_coeff(f.kind, r, f.bandwidth) * (offset * offset.transpose());
  h.diagonal().array() += radial_slope_over_r(f.kind, r, f.bandwidth);
  return h;
}

void rescale_gradient(Eigen::Ref<Vector> grad, const Penalty& lambda, Index y_dim)
{
  if (lambda.is_infinite()) {
    grad.head(y_dim).setZero();
  } else {
    grad.head(y_dim) /= lambda.value();
  }
}

Vector rescaled_grad(const Feature& f,
                     const Eigen::Ref<const Vector>& z,
                     const Penalty& lambda,
                     Index y_dim)
{
  if (y_dim < 0 || y_dim > z.size()) {
    throw InvalidArgument("rescaled_grad: y_dim out of range");
  }
  Vector g = grad_feature(f, z);
  rescale_gradient(g, lambda, y_dim);
  return g;
}

Vector feature_values(const Feature& f, const Eigen::Ref<const RowMatrix>& points)
{
  check_dim(f, points.cols());
  const Index n = points.rows();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double r = (points.row(i) - f.center.transpose()).norm();
    out(i) = radial_value(f.kind, r, f.bandwidth);
  }
  return out;
}

RadialGradients feature_gradients(const Feature& f,
                                  const Eigen::Ref<const RowMatrix>& points)
{
  check_dim(f, points.cols());
  RadialGradients out;
  out.offsets = points.rowwise() - f.center.transpose();
  const Index n = points.rows();
  out.coeff.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double r = out.offsets.row(i).norm();
    out.coeff(i) = r == 0.0 ? 0.0 : radial_slope_over_r(f.kind, r, f.bandwidth);
  }
  return out;
}

RowMatrix select_centers(const SampleBatch& ref_batch,
                         const SampleBatch& target_batch,
                         Index count,
                         const std::optional<Vector>& y_star,
                         double locality_weight,
                         const CenterOptions& options,
                         Rng& rng)
{
  if (count < 1) {
    throw InvalidArgument("select_centers: count must be >= 1");
  }
  if (ref_batch.rows() < 1 || target_batch.rows() < 1) {
    throw InvalidArgument("select_centers: batches must be nonempty");
  }
  if (ref_batch.dim() != target_batch.dim()) {
    throw InvalidArgument("select_centers: batch dimensions differ");
  }
  if (!(locality_weight >= 0.0 && locality_weight <= 1.0)) {
    throw InvalidArgument("select_centers: locality_weight must lie in [0, 1]");
  }
  const Index m = ref_batch.y_dim();
  if (y_star && y_star->size() != m) {
    throw InvalidArgument("select_centers: y_star dimension mismatch");
  }
  RowMatrix centers(count, ref_batch.dim());
  for (Index j = 0; j < count; ++j) {
    const bool from_reference = rng.uniform() < options.reference_share;
    const auto& src = from_reference ? ref_batch.points() : target_batch.points();
    centers.row(j) = src.row(static_cast<Index>(rng.uniform_index(src.rows())));
  }
  if (y_star) {
    const auto local = static_cast<Index>(
      std::llround(locality_weight * static_cast<double>(count)));
    for (Index j = 0; j < local; ++j) {
      for (Index k = 0; k < m; ++k) {
        centers(j, k) = (*y_star)(k) + options.jitter_sd * rng.normal();
      }
    }
  }
  return centers;
}

double schedule_m(double t, const Schedule& s)
{
  if (t < 0.0) {
    throw InvalidArgument("schedule_m: t must be >= 0");
  }
  return 1.0 + s.m0 / (1.0 + std::exp((t - s.t_max) / s.sigma));
}

double bandwidth_from_densities(double rho, double mu, double n_p, double dim, double m_t)
{
  if (!(n_p > 0.0) || !(dim > 0.0) || !(m_t > 0.0)) {
    throw InvalidArgument("bandwidth: n_p, dim and m_t must be positive");
  }
  if (!(rho > 0.0) || !(mu > 0.0)) {
    throw InvalidArgument("bandwidth: densities must be positive");
  }
  const double alpha = m_t * std::pow(n_p * (1.0 / rho + 1.0 / mu), 1.0 / dim);
  if (!std::isfinite(alpha)) {
    throw NumericalError("bandwidth rule produced a non-finite value");
  }
  return alpha;
}

double bandwidth_for_center(const Eigen::Ref<const Vector>& z_c,
                            const DensityEstimate& rho_kde,
                            const DensityEstimate& mu_kde,
                            double n_p,
                            double dim,
                            double m_t)
{
  constexpr double kFloor = 1e-12;
  const double rho = std::max(rho_kde.eval(z_c), kFloor * rho_kde.peak());
  const double mu = std::max(mu_kde.eval(z_c), kFloor * mu_kde.peak());
  return bandwidth_from_densities(rho, mu, n_p, dim, m_t);
}

} // namespace otflow
