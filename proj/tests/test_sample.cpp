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

#include "otflow/banana.hpp"
#include "otflow/sample.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace otflow;

namespace {

JointDataset small_joint(Index n)
{
  JointDataset j;
  j.y_dim = 1;
  j.x_dim = 1;
  j.pairs.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    j.pairs(i, 0) = static_cast<double>(i);
    j.pairs(i, 1) = 100.0 + static_cast<double>(i);
  }
  return j;
}

double correlation(const Vector& a, const Vector& b)
{
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

} // namespace

TEST(SplitDataset, DisjointHalves)
{
  Rng rng(1, 0);
  const auto [ref, tgt] = split_dataset(small_joint(10), 0.5, rng);
  ASSERT_EQ(ref.rows(), 5);
  ASSERT_EQ(tgt.rows(), 5);
  std::set<double> ys;
  for (Index i = 0; i < 5; ++i) {
    ys.insert(ref.pairs(i, 0));
    ys.insert(tgt.pairs(i, 0));
  }
  EXPECT_EQ(ys.size(), 10u);
}

TEST(SplitDataset, EmptySideIsAnError)
{
  Rng rng(1, 0);
  EXPECT_THROW(split_dataset(small_joint(3), 0.99, rng), InvalidArgument);
}

TEST(SplitDataset, SameSeedSamePartition)
{
  Rng a(4, 0);
  Rng b(4, 0);
  const auto s1 = split_dataset(small_joint(20), 0.5, a);
  const auto s2 = split_dataset(small_joint(20), 0.5, b);
  EXPECT_EQ(s1.first.pairs, s2.first.pairs);
  EXPECT_EQ(s1.second.pairs, s2.second.pairs);
}

TEST(ProductReference, ConstantColumnIsPreserved)
{
  JointDataset j = small_joint(30);
  j.pairs.col(1).setConstant(3.25);
  Rng rng(2, 0);
  for (ProductMode mode : { ProductMode::permutation, ProductMode::tensor_subsample }) {
    const SampleBatch b = build_product_reference(j, 50, mode, rng);
    EXPECT_TRUE((b.x_block().array() == 3.25).all());
  }
}

TEST(ProductReference, PermutationKeepsYMultiset)
{
  const JointDataset j = small_joint(40);
  Rng rng(3, 0);
  const SampleBatch b = build_product_reference(j, 40, ProductMode::permutation, rng);
  std::vector<double> ys(40);
  std::vector<double> orig(40);
  for (Index i = 0; i < 40; ++i) {
    ys[static_cast<std::size_t>(i)] = b.points()(i, 0);
    orig[static_cast<std::size_t>(i)] = j.pairs(i, 0);
  }
  std::sort(ys.begin(), ys.end());
  EXPECT_EQ(ys, orig);
}

TEST(ProductReference, TensorSubsampleDecorrelates)
{
  Rng data_rng(7, 0);
  JointDataset j;
  j.y_dim = 1;
  j.x_dim = 1;
  j.pairs.resize(500, 2);
  for (Index i = 0; i < 500; ++i) {
    const double y = data_rng.normal();
    j.pairs(i, 0) = y;
    j.pairs(i, 1) = y + 0.1 * data_rng.normal();
  }
  ASSERT_GT(correlation(j.pairs.col(0), j.pairs.col(1)), 0.9);
  Rng rng(8, 0);
  const SampleBatch b = build_product_reference(j, 10000, ProductMode::tensor_subsample, rng);
  ASSERT_EQ(b.rows(), 10000);
  // Oracle: independent resampling of the two marginals.
  EXPECT_LT(std::abs(correlation(b.points().col(0), b.points().col(1))), 0.05);
}

TEST(Markers, ZeroMarkersLeaveBatchUnchanged)
{
  const SampleBatch b(small_joint(4).pairs, 1, 1);
  const SampleBatch out = append_markers(b, RowMatrix(0, 1), Vector::Constant(1, 2.0));
  EXPECT_EQ(out.points(), b.points());
  EXPECT_EQ(out.marker_count(), 0);
}

TEST(Markers, TrailingRowsCarryYStar)
{
  const SampleBatch b(small_joint(4).pairs, 1, 1);
  RowMatrix xs(3, 1);
  xs << -1.0, 0.0, 1.0;
  const SampleBatch out = append_markers(b, xs, Vector::Constant(1, 2.0));
  ASSERT_EQ(out.rows(), 7);
  EXPECT_EQ(out.marker_count(), 3);
  EXPECT_EQ(out.sample_count(), 4);
  for (Index i = 4; i < 7; ++i) {
    EXPECT_EQ(out.points()(i, 0), 2.0);
    EXPECT_EQ(out.points()(i, 1), xs(i - 4, 0));
  }
}

TEST(Markers, DimensionMismatchIsAnError)
{
  const SampleBatch b(small_joint(4).pairs, 1, 1);
  EXPECT_THROW(append_markers(b, RowMatrix::Zero(2, 2), Vector::Constant(1, 2.0)), InvalidArgument);
  EXPECT_THROW(append_markers(b, RowMatrix::Zero(2, 1), Vector::Constant(2, 2.0)), InvalidArgument);
}

TEST(SampleBatch, RejectsBadShapes)
{
  EXPECT_THROW(SampleBatch(RowMatrix::Zero(3, 2), 1, 2), InvalidArgument);
  EXPECT_THROW(SampleBatch(RowMatrix::Zero(3, 2), 1, 1, 4), InvalidArgument);
}

TEST(JointDataset, RejectsNonFinite)
{
  JointDataset j = small_joint(3);
  j.pairs(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(j.validate(), InvalidArgument);
}
