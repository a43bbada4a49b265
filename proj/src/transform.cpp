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

#include "otflow/transform.hpp"

#include <cmath>

namespace otflow {

ColumnTransform::ColumnTransform(std::vector<bool> log_columns, Vector shift, Vector scale)
  : log_(std::move(log_columns))
  , shift_(std::move(shift))
  , scale_(std::move(scale))
{
  if (static_cast<Index>(log_.size()) != shift_.size() || shift_.size() != scale_.size()) {
    throw InvalidArgument("ColumnTransform: inconsistent sizes");
  }
  if (!(scale_.array() > 0.0).all() || !scale_.allFinite() || !shift_.allFinite()) {
    throw InvalidArgument("ColumnTransform: scales must be positive and finite");
  }
}

ColumnTransform ColumnTransform::identity(Index dim)
{
  return ColumnTransform(std::vector<bool>(static_cast<std::size_t>(dim), false),
                         Vector::Zero(dim),
                         Vector::Ones(dim));
}

ColumnTransform ColumnTransform::fit(const Eigen::Ref<const RowMatrix>& data,
                                     std::vector<bool> log_columns,
                                     bool standardize)
{
  const Index dim = data.cols();
  if (static_cast<Index>(log_columns.size()) != dim) {
    throw InvalidArgument("ColumnTransform::fit: log flag count mismatch");
  }
  ColumnTransform t(log_columns, Vector::Zero(dim), Vector::Ones(dim));
  if (!standardize) {
    return t;
  }
  if (data.rows() < 2) {
    throw InvalidArgument("ColumnTransform::fit: need at least 2 rows");
  }
  const RowMatrix u = t.forward(data);
  for (Index k = 0; k < dim; ++k) {
    const double mean = u.col(k).mean();
    const double var = (u.col(k).array() - mean).square().sum() /
                       static_cast<double>(u.rows() - 1);
    t.shift_(k) = mean;
    t.scale_(k) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return t;
}

bool ColumnTransform::is_identity() const
{
  for (bool l : log_) {
    if (l) {
      return false;
    }
  }
  return (shift_.array() == 0.0).all() && (scale_.array() == 1.0).all();
}

RowMatrix ColumnTransform::forward_columns(const Eigen::Ref<const RowMatrix>& block,
                                           Index offset) const
{
  RowMatrix out(block.rows(), block.cols());
  for (Index k = 0; k < block.cols(); ++k) {
    const Index c = offset + k;
    for (Index i = 0; i < block.rows(); ++i) {
      double v = block(i, k);
      if (log_[static_cast<std::size_t>(c)]) {
        if (!(v > 0.0)) {
          throw InvalidArgument("ColumnTransform: log of nonpositive value in column " +
                                std::to_string(c));
        }
        v = std::log(v);
      }
      out(i, k) = (v - shift_(c)) / scale_(c);
    }
  }
  return out;
}

RowMatrix ColumnTransform::inverse_columns(const Eigen::Ref<const RowMatrix>& block,
                                           Index offset) const
{
  RowMatrix out(block.rows(), block.cols());
  for (Index k = 0; k < block.cols(); ++k) {
    const Index c = offset + k;
    for (Index i = 0; i < block.rows(); ++i) {
      const double v = block(i, k) * scale_(c) + shift_(c);
      out(i, k) = log_[static_cast<std::size_t>(c)] ? std::exp(v) : v;
    }
  }
  return out;
}

RowMatrix ColumnTransform::forward(const Eigen::Ref<const RowMatrix>& points) const
{
  if (points.cols() != dim()) {
    throw InvalidArgument("ColumnTransform: dimension mismatch");
  }
  return forward_columns(points, 0);
}

RowMatrix ColumnTransform::inverse(const Eigen::Ref<const RowMatrix>& points) const
{
  if (points.cols() != dim()) {
    throw InvalidArgument("ColumnTransform: dimension mismatch");
  }
  return inverse_columns(points, 0);
}

Vector ColumnTransform::forward_point(const Eigen::Ref<const Vector>& z) const
{
  const RowMatrix row = z.transpose();
  return forward(row).row(0).transpose();
}

} // namespace otflow
