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

#include <vector>

namespace otflow {

//! V-statistic 2 E|A - B| - E|A - A'| - E|B - B'| over all row pairs.
double energy_distance(const Eigen::Ref<const RowMatrix>& a, const Eigen::Ref<const RowMatrix>& b);
double energy_distance(const SampleBatch& a, const SampleBatch& b);

struct PermutationTest
{
  double statistic = 0.0;
  //! Requested quantile of the permutation distribution.
  double threshold = 0.0;
  //! Fraction of permutations with a statistic >= the observed one (with the
  //! observed split counted).
  double p_value = 1.0;
};

//! Energy-distance permutation test of equal distributions.
PermutationTest energy_permutation_test(const Eigen::Ref<const RowMatrix>& a,
                                        const Eigen::Ref<const RowMatrix>& b,
                                        Index permutations,
                                        double quantile,
                                        Rng& rng);

//! Indices of the `count` rows closest (Euclidean) to the column mean, nearest
//! first.
std::vector<Index> nearest_to_mean(const Eigen::Ref<const RowMatrix>& samples, Index count);

Vector column_mean(const Eigen::Ref<const RowMatrix>& samples);
//! Sample standard deviation (n - 1 denominator).
Vector column_std(const Eigen::Ref<const RowMatrix>& samples);

//! Per-column max minus min.
Vector envelope_width(const Eigen::Ref<const RowMatrix>& rows);

//! True when the column changes direction at least once (not monotone).
bool non_monotone(const Eigen::Ref<const Vector>& series);

} // namespace otflow
