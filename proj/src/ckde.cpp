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

#include "otflow/ckde.hpp"

#include "otflow/kde.hpp"

#include <cmath>
#include <numbers>

namespace otflow {

Vector nw_weights(const Eigen::Ref<const RowMatrix>& y,
                  const Eigen::Ref<const Vector>& y_star,
                  double bw_y)
{
  if (y.rows() < 1) {
    throw InvalidArgument("nw_weights: no samples");
  }
  if (y.cols() != y_star.size()) {
    throw InvalidArgument("nw_weights: y* dimension mismatch");
  }
  if (!(bw_y > 0.0)) {
    throw InvalidArgument("nw_weights: bandwidth must be positive");
  }
  Vector log_w(y.rows());
  for (Index i = 0; i < y.rows(); ++i) {
    log_w(i) = -0.5 * (y.row(i).transpose() - y_star).squaredNorm() / (bw_y * bw_y);
  }
  const double top = log_w.maxCoeff();
  if (top < std::log(1e-300)) {
    throw InvalidArgument("no effective samples near y*");
  }
  Vector w = (log_w.array() - top).exp().matrix();
  return w / w.sum();
}

Vector nw_ckde(const JointDataset& joint,
               const Eigen::Ref<const Vector>& y_star,
               const Eigen::Ref<const Vector>& x_grid,
               double bw_y,
               double bw_x)
{
  if (joint.rows() < 1) {
    throw InvalidArgument("nw_ckde: empty dataset");
  }
  if (joint.x_dim != 1) {
    throw InvalidArgument("nw_ckde: grid output needs x_dim = 1");
  }
  if (!(bw_x > 0.0)) {
    throw InvalidArgument("nw_ckde: bandwidth must be positive");
  }
  const Vector w = nw_weights(joint.pairs.leftCols(joint.y_dim), y_star, bw_y);
  const auto x = joint.pairs.col(joint.y_dim);
  const double norm = 1.0 / (bw_x * std::sqrt(2.0 * std::numbers::pi));
  Vector out(x_grid.size());
  for (Index g = 0; g < x_grid.size(); ++g) {
    double s = 0.0;
    for (Index i = 0; i < joint.rows(); ++i) {
      const double u = (x_grid(g) - x(i)) / bw_x;
      s += w(i) * std::exp(-0.5 * u * u);
    }
    out(g) = norm * s;
  }
  return out;
}

Vector kde_on_grid(const Eigen::Ref<const Vector>& samples,
                   const Eigen::Ref<const Vector>& x_grid,
                   double bw)
{
  const Index n = samples.size();
  JointDataset joint{ RowMatrix(n, 1), 0, 1, 0 };
  joint.pairs.col(0) = samples;
  return nw_ckde(joint, Vector(0), x_grid, 1.0, bw);
}

double silverman_bandwidth_1d(const Eigen::Ref<const Vector>& samples)
{
  RowMatrix m(samples.size(), 1);
  m.col(0) = samples;
  return silverman_bandwidths(m)(0);
}

CkdeBandwidths silverman_ckde_bandwidths(const JointDataset& joint)
{
  CkdeBandwidths bw;
  const Index n = joint.rows();
  double ysum = 0.0;
  for (Index k = 0; k < joint.y_dim; ++k) {
    ysum += silverman_bandwidth_1d(joint.pairs.col(k));
  }
  bw.y = joint.y_dim > 0 ? ysum / static_cast<double>(joint.y_dim) : 1.0;
  bw.x = n > 1 ? silverman_bandwidth_1d(joint.pairs.col(joint.y_dim)) : 1.0;
  return bw;
}

double trapezoid(const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& grid)
{
  if (f.size() != grid.size()) {
    throw InvalidArgument("trapezoid: values and grid differ in length");
  }
  double s = 0.0;
  for (Index i = 1; i < grid.size(); ++i) {
    s += 0.5 * (f(i) + f(i - 1)) * (grid(i) - grid(i - 1));
  }
  return s;
}

double l1_grid_error(const Eigen::Ref<const Vector>& est,
                     const Eigen::Ref<const Vector>& truth,
                     const Eigen::Ref<const Vector>& grid)
{
  if (est.size() != truth.size() || est.size() != grid.size()) {
    throw InvalidArgument("l1_grid_error: densities and grid differ in length");
  }
  return trapezoid((est - truth).cwiseAbs(), grid);
}

std::vector<double> local_maxima(const Eigen::Ref<const Vector>& f,
                                 const Eigen::Ref<const Vector>& grid)
{
  std::vector<double> out;
  for (Index i = 1; i + 1 < f.size(); ++i) {
    if (f(i) > f(i - 1) && f(i) > f(i + 1)) {
      out.push_back(grid(i));
    }
  }
  return out;
}

} // namespace otflow
