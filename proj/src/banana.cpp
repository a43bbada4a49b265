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

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace otflow {

JointDataset banana_joint_sample(Index n, Rng& rng)
{
  if (n < 1) {
    throw InvalidArgument("banana_joint_sample: n must be >= 1");
  }
  const std::uint64_t key = rng.next_u64();
  JointDataset out{ RowMatrix(n, 2), 1, 1, key };
  for (Index i = 0; i < n; ++i) {
    Rng row(key, static_cast<std::uint64_t>(i));
    const double x = row.normal();
    out.pairs(i, 1) = x;
    out.pairs(i, 0) = 0.5 * x * x - 1.0 + row.normal();
  }
  return out;
}

double banana_conditional_kernel(double x, double y_star)
{
  const double r = y_star - 0.5 * x * x + 1.0;
  return std::exp(-0.5 * r * r - 0.5 * x * x);
}

double banana_conditional_normalizer(double y_star)
{
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  auto f = [y_star](double x) { return banana_conditional_kernel(x, y_star); };
  // even integrand: integrate the half line twice
  return 2.0 * gauss_kronrod<double, 61>::integrate(f, 0.0, inf, 15, 1e-14);
}

Vector banana_conditional_pdf(const Eigen::Ref<const Vector>& x_grid, double y_star)
{
  if (x_grid.size() < 2 || x_grid.minCoeff() > -6.0 || x_grid.maxCoeff() < 6.0) {
    throw InvalidArgument("banana_conditional_pdf: grid must cover [-6, 6]");
  }
  const double z = banana_conditional_normalizer(y_star);
  return x_grid.unaryExpr([&](double x) { return banana_conditional_kernel(x, y_star) / z; });
}

} // namespace otflow
