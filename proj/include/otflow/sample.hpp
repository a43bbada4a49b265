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
#include "otflow/types.hpp"

#include <utility>

namespace otflow {

//! Points z = (y, x) in R^(m+d), one per row. The last `marker_count` rows are
//! marker samples (y*, x) that ride along with the flow.
class SampleBatch
{
public:
  SampleBatch() = default;
  SampleBatch(RowMatrix points, Index y_dim, Index x_dim, Index marker_count = 0);

  const RowMatrix& points() const { return points_; }
  RowMatrix& mutable_points() { return points_; }
  Index rows() const { return points_.rows(); }
  Index dim() const { return y_dim_ + x_dim_; }
  Index y_dim() const { return y_dim_; }
  Index x_dim() const { return x_dim_; }
  Index marker_count() const { return marker_count_; }
  //! Rows that are not markers.
  Index sample_count() const { return points_.rows() - marker_count_; }

  auto y_block() const { return points_.leftCols(y_dim_); }
  auto x_block() const { return points_.rightCols(x_dim_); }
  auto samples() const { return points_.topRows(sample_count()); }
  auto markers() const { return points_.bottomRows(marker_count_); }

private:
  RowMatrix points_;
  Index y_dim_ = 0;
  Index x_dim_ = 1;
  Index marker_count_ = 0;
};

//! Exchangeable draws (y, x) from a joint distribution.
struct JointDataset
{
  RowMatrix pairs;
  Index y_dim = 0;
  Index x_dim = 1;
  std::uint64_t seed = 0;

  Index rows() const { return pairs.rows(); }
  Index dim() const { return y_dim + x_dim; }
  SampleBatch as_batch() const { return SampleBatch(pairs, y_dim, x_dim); }
  void validate() const;
};

enum class ProductMode
{
  permutation,
  tensor_subsample
};

//! Partition the rows of `joint` into a reference source and a target set.
//! The target receives round(target_fraction * N) rows.
std::pair<JointDataset, JointDataset>
split_dataset(const JointDataset& joint, double target_fraction, Rng& rng);

//! Sample the product of marginals mu(y) mu(x) from joint rows.
//!
//! `permutation` cycles through the y rows in order and pairs them with x rows
//! taken from independent uniform shuffles, so each marginal multiset is
//! reproduced exactly whenever `size` is a multiple of the source size.
//! `tensor_subsample` draws (i, j) index pairs uniformly with replacement.
SampleBatch
build_product_reference(const JointDataset& source,
                        Index size,
                        ProductMode mode,
                        Rng& rng);

//! Append rows (y_star, x_i) and mark them as markers.
SampleBatch
append_markers(const SampleBatch& batch,
               const Eigen::Ref<const RowMatrix>& x_samples,
               const Eigen::Ref<const Vector>& y_star);

//! Select rows of a joint dataset.
JointDataset take_rows(const JointDataset& joint, const std::vector<Index>& rows);

const char* to_string(ProductMode mode);
ProductMode product_mode_from_string(const std::string& name);

} // namespace otflow
