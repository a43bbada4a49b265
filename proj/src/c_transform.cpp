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

#include "otflow/c_transform.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <iostream>
#include <limits>

namespace otflow {

double potential(const FeatureSet& features,
                 const Eigen::Ref<const Vector>& beta,
                 const Eigen::Ref<const Vector>& z)
{
  if (beta.size() != features.size()) {
    throw InvalidArgument("potential: beta length does not match the feature count");
  }
  double phi = 0.0;
  for (Index j = 0; j < features.size(); ++j) {
    phi += beta(j) * eval_feature(features[j], z);
  }
  return phi;
}

double weighted_cost(const Eigen::Ref<const Vector>& z,
                     const Eigen::Ref<const Vector>& z_prime,
                     const Penalty& lambda,
                     Index y_dim)
{
  if (z.size() != z_prime.size() || y_dim < 0 || y_dim > z.size()) {
    throw InvalidArgument("weighted_cost: dimension mismatch");
  }
  const double dx = (z.tail(z.size() - y_dim) - z_prime.tail(z.size() - y_dim)).squaredNorm();
  const double dy = (z.head(y_dim) - z_prime.head(y_dim)).squaredNorm();
  if (lambda.is_infinite()) {
    return dy == 0.0 ? 0.5 * dx : std::numeric_limits<double>::infinity();
  }
  return 0.5 * (lambda.value() * dy + dx);
}

namespace {

struct Objective
{
  const FeatureSet& features;
  const Eigen::Ref<const Vector>& beta;
  const Eigen::Ref<const Vector>& z_prime;
  Vector weight; // cost Hessian diagonal over the free coordinates
  Index first;   // first free coordinate

  double value(const Vector& z) const
  {
    const Index n = z.size();
    double c = 0.0;
    for (Index k = first; k < n; ++k) {
      const double d = z(k) - z_prime(k);
      c += weight(k - first) * d * d;
    }
    return 0.5 * c - potential(features, beta, z);
  }

  void derivatives(const Vector& z, Vector& grad, Eigen::MatrixXd& hess) const
  {
    const Index n = z.size();
    const Index w = n - first;
    grad.resize(w);
    hess = Eigen::MatrixXd::Zero(w, w);
    for (Index k = 0; k < w; ++k) {
      grad(k) = weight(k) * (z(first + k) - z_prime(first + k));
      hess(k, k) = weight(k);
    }
    for (Index j = 0; j < features.size(); ++j) {
      if (beta(j) == 0.0) {
        continue;
      }
      const Vector gf = grad_feature(features[j], z);
      const Eigen::MatrixXd hf = hessian_feature(features[j], z);
      grad -= beta(j) * gf.tail(w);
      hess -= beta(j) * hf.bottomRightCorner(w, w);
    }
  }
};

} // namespace

CTransformResult c_transform_minimize(const FeatureSet& features,
                                      const Eigen::Ref<const Vector>& beta,
                                      const Eigen::Ref<const Vector>& z_prime,
                                      const Penalty& lambda,
                                      Index y_dim,
                                      const CTransformSearch& search)
{
  if (beta.size() != features.size() || z_prime.size() != features.dim()) {
    throw InvalidArgument("c_transform: dimension mismatch");
  }
  if (!(search.radius > 0.0) || search.max_iterations < 1) {
    throw InvalidArgument("c_transform: search radius and iteration cap must be positive");
  }
  const Index n = z_prime.size();
  const Index first = lambda.is_infinite() ? y_dim : 0;
  Objective obj{ features, beta, z_prime, Vector::Ones(n - first), first };
  if (!lambda.is_infinite()) {
    obj.weight.head(y_dim).setConstant(lambda.value());
  }

  CTransformResult result;
  double radius = search.radius;
  for (int attempt = 0; attempt <= search.max_enlargements; ++attempt) {
    Vector z = z_prime;
    double f = obj.value(z);
    Vector grad;
    Eigen::MatrixXd hess;
    int it = 0;
    for (; it < search.max_iterations; ++it) {
      obj.derivatives(z, grad, hess);
      Vector step;
      Eigen::LLT<Eigen::MatrixXd> llt(hess);
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(grad);
      } else {
        step = -grad / obj.weight.maxCoeff();
      }
      double t = 1.0;
      bool improved = false;
      Vector trial = z;
      double f_trial = f;
      for (int ls = 0; ls < 60 && !improved; ++ls, t *= 0.5) {
        trial.tail(n - first) = z.tail(n - first) + t * step;
        const Vector off = trial - z_prime;
        const double r = off.norm();
        if (r > radius) {
          trial = z_prime + off * (radius / r);
        }
        f_trial = obj.value(trial);
        improved = f_trial < f;
      }
      if (!improved) {
        break;
      }
      const double change = (trial - z).norm();
      z = trial;
      f = f_trial;
      if (change <= search.tolerance * (1.0 + z.norm())) {
        break;
      }
    }
    result.iterations += it + 1;
    result.value = f;
    result.minimizer = z;
    if ((z - z_prime).norm() < 0.999 * radius) {
      return result;
    }
    std::clog << "warning: c-transform minimizer on the search boundary (radius " << radius
              << "); retrying with radius " << 2.0 * radius << "\n";
    radius *= 2.0;
    result.enlargements = attempt + 1;
  }
  throw SolverError("c-transform minimizer stayed on the search boundary after " +
                    std::to_string(search.max_enlargements) + " enlargements");
}

double c_transform_numeric(const FeatureSet& features,
                           const Eigen::Ref<const Vector>& beta,
                           const Eigen::Ref<const Vector>& z_prime,
                           const Penalty& lambda,
                           Index y_dim,
                           const CTransformSearch& search)
{
  if ((beta.array() == 0.0).all()) {
    return 0.0;
  }
  return c_transform_minimize(features, beta, z_prime, lambda, y_dim, search).value;
}

double expansion_second_order(const FeatureSet& features,
                              const Eigen::Ref<const Vector>& beta,
                              const Eigen::Ref<const Vector>& z_prime,
                              const Penalty& lambda,
                              Index y_dim)
{
  if (beta.size() != features.size() || z_prime.size() != features.dim()) {
    throw InvalidArgument("expansion_second_order: dimension mismatch");
  }
  double linear = 0.0;
  Vector grad = Vector::Zero(z_prime.size());
  for (Index j = 0; j < features.size(); ++j) {
    linear += beta(j) * eval_feature(features[j], z_prime);
    grad += beta(j) * grad_feature(features[j], z_prime);
  }
  Vector scaled = grad;
  rescale_gradient(scaled, lambda, y_dim);
  return -linear - 0.5 * grad.dot(scaled);
}

double empirical_objective_numeric(const FeatureSet& features,
                                   const Eigen::Ref<const Vector>& beta,
                                   const SampleBatch& ref_batch,
                                   const SampleBatch& target_batch,
                                   const Penalty& lambda,
                                   const CTransformSearch& search)
{
  if (ref_batch.sample_count() < 1 || target_batch.rows() < 1) {
    throw InvalidArgument("empirical_objective: empty batch");
  }
  double ref_sum = 0.0;
  for (Index i = 0; i < ref_batch.sample_count(); ++i) {
    ref_sum += potential(features, beta, ref_batch.points().row(i).transpose());
  }
  double target_sum = 0.0;
  for (Index i = 0; i < target_batch.rows(); ++i) {
    target_sum += c_transform_numeric(features,
                                      beta,
                                      target_batch.points().row(i).transpose(),
                                      lambda,
                                      target_batch.y_dim(),
                                      search);
  }
  return ref_sum / static_cast<double>(ref_batch.sample_count()) +
         target_sum / static_cast<double>(target_batch.rows());
}

} // namespace otflow
