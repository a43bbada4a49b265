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

#include "otflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otflow {

namespace {

// Mean pairwise distances from a precomputed distance matrix and a labelling.
double labelled_energy(const Eigen::MatrixXd& dist, const std::vector<Index>& order, Index na)
{
  const Index n = dist.rows();
  const Index nb = n - na;
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (Index i = 0; i < n; ++i) {
    const bool ia = i < na;
    const Index oi = order[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) {
      const double d = dist(oi, order[static_cast<std::size_t>(j)]);
      const bool ja = j < na;
      if (ia && ja) {
        aa += d;
      } else if (!ia && !ja) {
        bb += d;
      } else if (ia) {
        ab += d;
      }
    }
  }
  const double fa = static_cast<double>(na);
  const double fb = static_cast<double>(nb);
  return 2.0 * ab / (fa * fb) - aa / (fa * fa) - bb / (fb * fb);
}

double mean_distance(const Eigen::Ref<const RowMatrix>& a, const Eigen::Ref<const RowMatrix>& b)
{
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      s += (a.row(i) - b.row(j)).norm();
    }
  }
  return s / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

} // namespace

double energy_distance(const Eigen::Ref<const RowMatrix>& a, const Eigen::Ref<const RowMatrix>& b)
{
  if (a.rows() < 1 || b.rows() < 1) {
    throw InvalidArgument("energy_distance: empty sample");
  }
  if (a.cols() != b.cols()) {
    throw InvalidArgument("energy_distance: dimension mismatch");
  }
  const double ab = mean_distance(a, b);
  const double aa = mean_distance(a, a);
  const double bb = mean_distance(b, b);
  return std::max(0.0, 2.0 * ab - aa - bb);
}

double energy_distance(const SampleBatch& a, const SampleBatch& b)
{
  return energy_distance(a.points(), b.points());
}

PermutationTest energy_permutation_test(const Eigen::Ref<const RowMatrix>& a,
                                        const Eigen::Ref<const RowMatrix>& b,
                                        Index permutations,
                                        double quantile,
                                        Rng& rng)
{
  if (a.cols() != b.cols() || a.rows() < 1 || b.rows() < 1) {
    throw InvalidArgument("energy_permutation_test: incompatible samples");
  }
  if (permutations < 1 || !(quantile > 0.0 && quantile < 1.0)) {
    throw InvalidArgument("energy_permutation_test: need permutations >= 1, quantile in (0, 1)");
  }
  const Index na = a.rows();
  const Index n = na + b.rows();
  RowMatrix pooled(n, a.cols());
  pooled << a, b;
  Eigen::MatrixXd dist(n, n);
  for (Index i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      dist(i, j) = dist(j, i) = (pooled.row(i) - pooled.row(j)).norm();
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{ 0 });
  PermutationTest out;
  out.statistic = std::max(0.0, labelled_energy(dist, order, na));
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(permutations));
  Index exceed = 1;
  for (Index k = 0; k < permutations; ++k) {
    rng.shuffle(order);
    const double s = labelled_energy(dist, order, na);
    stats.push_back(s);
    if (s >= out.statistic) {
      ++exceed;
    }
  }
  std::sort(stats.begin(), stats.end());
  const auto pos = static_cast<std::size_t>(
    std::min<double>(static_cast<double>(stats.size() - 1),
                     std::ceil(quantile * static_cast<double>(stats.size())) - 1.0));
  out.threshold = stats[pos];
  out.p_value = static_cast<double>(exceed) / static_cast<double>(permutations + 1);
  return out;
}

std::vector<Index> nearest_to_mean(const Eigen::Ref<const RowMatrix>& samples, Index count)
{
  if (count < 0 || count > samples.rows()) {
    throw InvalidArgument("nearest_to_mean: count exceeds the sample size");
  }
  const Vector mean = column_mean(samples);
  std::vector<Index> idx(static_cast<std::size_t>(samples.rows()));
  std::iota(idx.begin(), idx.end(), Index{ 0 });
  std::vector<double> d(idx.size());
  for (Index i = 0; i < samples.rows(); ++i) {
    d[static_cast<std::size_t>(i)] = (samples.row(i).transpose() - mean).norm();
  }
  std::stable_sort(idx.begin(), idx.end(), [&](Index l, Index r) {
    return d[static_cast<std::size_t>(l)] < d[static_cast<std::size_t>(r)];
  });
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

Vector column_mean(const Eigen::Ref<const RowMatrix>& samples)
{
  if (samples.rows() < 1) {
    throw InvalidArgument("column_mean: no samples");
  }
  return samples.colwise().mean().transpose();
}

Vector column_std(const Eigen::Ref<const RowMatrix>& samples)
{
  if (samples.rows() < 2) {
    throw InvalidArgument("column_std: need at least 2 samples");
  }
  const Vector mean = column_mean(samples);
  const RowMatrix centered = samples.rowwise() - mean.transpose();
  return (centered.colwise().squaredNorm().transpose() /
          static_cast<double>(samples.rows() - 1))
    .cwiseSqrt();
}

Vector envelope_width(const Eigen::Ref<const RowMatrix>& rows)
{
  if (rows.rows() < 1) {
    throw InvalidArgument("envelope_width: no rows");
  }
  return (rows.colwise().maxCoeff() - rows.colwise().minCoeff()).transpose();
}

bool non_monotone(const Eigen::Ref<const Vector>& series)
{
  bool up = false;
  bool down = false;
  for (Index i = 1; i < series.size(); ++i) {
    up = up || series(i) > series(i - 1);
    down = down || series(i) < series(i - 1);
  }
  return up && down;
}

} // namespace otflow
