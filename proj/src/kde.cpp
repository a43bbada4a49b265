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

#include "otflow/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace otflow {

Vector silverman_bandwidths(const Eigen::Ref<const RowMatrix>& points)
{
  const Index n = points.rows();
  const Index dim = points.cols();
  if (n < 2) {
    throw InvalidArgument("silverman_bandwidths: need at least 2 points");
  }
  const double factor =
    std::pow(4.0 / ((static_cast<double>(dim) + 2.0) * static_cast<double>(n)),
             1.0 / (static_cast<double>(dim) + 4.0));
  Vector h(dim);
  for (Index k = 0; k < dim; ++k) {
    const double mean = points.col(k).mean();
    const double var =
      (points.col(k).array() - mean).square().sum() / static_cast<double>(n - 1);
    double sd = std::sqrt(var);
    // a constant column has no scale; fall back to unit scale
    if (!(sd > 0.0)) {
      sd = 1.0;
    }
    h(k) = sd * factor;
  }
  return h;
}

DensityEstimate kde_fit(const Eigen::Ref<const RowMatrix>& points, Index max_support)
{
  if (points.rows() < 2) {
    throw InvalidArgument("kde_fit: need at least 2 points, got " +
                          std::to_string(points.rows()));
  }
  DensityEstimate kde;
  if (max_support > 1 && points.rows() > max_support) {
    kde.support_.resize(max_support, points.cols());
    const double stride =
      static_cast<double>(points.rows()) / static_cast<double>(max_support);
    for (Index i = 0; i < max_support; ++i) {
      kde.support_.row(i) =
        points.row(static_cast<Index>(std::floor(stride * static_cast<double>(i))));
    }
  } else {
    kde.support_ = points;
  }
  kde.bandwidths_ = silverman_bandwidths(kde.support_);
  kde.inv_bandwidths_ = kde.bandwidths_.cwiseInverse();
  const double n = static_cast<double>(kde.support_.rows());
  kde.log_norm_ = -std::log(n) - kde.bandwidths_.array().log().sum() -
                  0.5 * static_cast<double>(points.cols()) *
                    std::log(2.0 * std::numbers::pi);

  const Index probe = std::min<Index>(kde.support_.rows(), 256);
  double peak = 0.0;
  for (Index i = 0; i < probe; ++i) {
    const Index row = i * kde.support_.rows() / probe;
    peak = std::max(peak, kde.eval(kde.support_.row(row).transpose()));
  }
  kde.peak_ = peak;
  return kde;
}

double DensityEstimate::log_eval(const Eigen::Ref<const Vector>& z) const
{
  if (z.size() != dim()) {
    throw InvalidArgument("kde_eval: point dimension mismatch");
  }
  const Index n = support_.rows();
  Vector log_terms(n);
  for (Index i = 0; i < n; ++i) {
    const auto u = (support_.row(i).transpose() - z).cwiseProduct(inv_bandwidths_);
    log_terms(i) = -0.5 * u.squaredNorm();
  }
  const double top = log_terms.maxCoeff();
  return log_norm_ + top + std::log((log_terms.array() - top).exp().sum());
}

double DensityEstimate::eval(const Eigen::Ref<const Vector>& z) const
{
  return std::max(std::exp(log_eval(z)), std::numeric_limits<double>::min());
}

} // namespace otflow
