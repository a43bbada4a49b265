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

#include "otflow/sample.hpp"

#include <cmath>
#include <string>

namespace otflow {

SampleBatch::SampleBatch(RowMatrix points,
                         Index y_dim,
                         Index x_dim,
                         Index marker_count)
  : points_(std::move(points))
  , y_dim_(y_dim)
  , x_dim_(x_dim)
  , marker_count_(marker_count)
{
  if (y_dim_ < 0 || x_dim_ < 1) {
    throw InvalidArgument("SampleBatch: need y_dim >= 0 and x_dim >= 1");
  }
  if (points_.cols() != y_dim_ + x_dim_) {
    throw InvalidArgument("SampleBatch: points have " +
                          std::to_string(points_.cols()) +
                          " columns, expected " +
                          std::to_string(y_dim_ + x_dim_));
  }
  if (marker_count_ < 0 || marker_count_ > points_.rows()) {
    throw InvalidArgument("SampleBatch: marker_count out of range");
  }
  if (!points_.allFinite()) {
    throw InvalidArgument("SampleBatch: points must be finite");
  }
}

void JointDataset::validate() const
{
  if (y_dim < 0 || x_dim < 1 || pairs.cols() != y_dim + x_dim) {
    throw InvalidArgument("JointDataset: inconsistent dimensions");
  }
  if (!pairs.allFinite()) {
    throw InvalidArgument("JointDataset: pairs must be finite");
  }
}

JointDataset take_rows(const JointDataset& joint, const std::vector<Index>& rows)
{
  JointDataset out{ RowMatrix(static_cast<Index>(rows.size()), joint.dim()),
                    joint.y_dim,
                    joint.x_dim,
                    joint.seed };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.pairs.row(static_cast<Index>(i)) = joint.pairs.row(rows[i]);
  }
  return out;
}

std::pair<JointDataset, JointDataset>
split_dataset(const JointDataset& joint, double target_fraction, Rng& rng)
{
  joint.validate();
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw InvalidArgument("split_dataset: target_fraction must lie in (0, 1)");
  }
  const Index n = joint.rows();
  const auto n_target =
    static_cast<Index>(std::llround(target_fraction * static_cast<double>(n)));
  if (n < 2 || n_target < 1 || n_target > n - 1) {
    throw InvalidArgument("split_dataset: " + std::to_string(n) +
                          " rows cannot be split with fraction " +
                          std::to_string(target_fraction) +
                          " without leaving one side empty");
  }
  const auto perm = rng.permutation(static_cast<std::size_t>(n));
  std::vector<Index> reference_rows(perm.begin(), perm.end() - n_target);
  std::vector<Index> target_rows(perm.end() - n_target, perm.end());
  return { take_rows(joint, reference_rows), take_rows(joint, target_rows) };
}

SampleBatch
build_product_reference(const JointDataset& source,
                        Index size,
                        ProductMode mode,
                        Rng& rng)
{
  source.validate();
  if (source.rows() < 1 || size < 1) {
    throw InvalidArgument("build_product_reference: empty source or size");
  }
  const Index n = source.rows();
  const Index m = source.y_dim;
  const Index d = source.x_dim;
  RowMatrix out(size, m + d);
  if (mode == ProductMode::permutation) {
    std::vector<std::size_t> perm;
    for (Index i = 0; i < size; ++i) {
      const Index k = i % n;
      if (k == 0) {
        perm = rng.permutation(static_cast<std::size_t>(n));
      }
      out.row(i).head(m) = source.pairs.row(k).head(m);
      out.row(i).tail(d) = source.pairs.row(static_cast<Index>(perm[k])).tail(d);
    }
  } else {
    for (Index i = 0; i < size; ++i) {
      const auto yi = static_cast<Index>(rng.uniform_index(n));
      const auto xi = static_cast<Index>(rng.uniform_index(n));
      out.row(i).head(m) = source.pairs.row(yi).head(m);
      out.row(i).tail(d) = source.pairs.row(xi).tail(d);
    }
  }
  return SampleBatch(std::move(out), m, d);
}

SampleBatch
append_markers(const SampleBatch& batch,
               const Eigen::Ref<const RowMatrix>& x_samples,
               const Eigen::Ref<const Vector>& y_star)
{
  if (y_star.size() != batch.y_dim()) {
    throw InvalidArgument("append_markers: y_star has dimension " +
                          std::to_string(y_star.size()) + ", expected " +
                          std::to_string(batch.y_dim()));
  }
  if (x_samples.rows() > 0 && x_samples.cols() != batch.x_dim()) {
    throw InvalidArgument("append_markers: x_samples have " +
                          std::to_string(x_samples.cols()) +
                          " columns, expected " +
                          std::to_string(batch.x_dim()));
  }
  const Index k = x_samples.rows();
  if (k == 0) {
    return batch;
  }
  RowMatrix points(batch.rows() + k, batch.dim());
  points.topRows(batch.rows()) = batch.points();
  points.bottomRows(k).leftCols(batch.y_dim()) =
    y_star.transpose().replicate(k, 1);
  points.bottomRows(k).rightCols(batch.x_dim()) = x_samples;
  return SampleBatch(std::move(points),
                     batch.y_dim(),
                     batch.x_dim(),
                     batch.marker_count() + k);
}

const char* to_string(ProductMode mode)
{
  return mode == ProductMode::permutation ? "permutation" : "tensor_subsample";
}

ProductMode product_mode_from_string(const std::string& name)
{
  if (name == "permutation") {
    return ProductMode::permutation;
  }
  if (name == "tensor_subsample") {
    return ProductMode::tensor_subsample;
  }
  throw InvalidArgument("unknown product reference mode '" + name + "'");
}

} // namespace otflow
