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

#include "otflow/sample.hpp"

namespace otflow {

//! Normalized Nadaraya-Watson weights exp(-|y_i - y*|^2 / (2 bw_y^2)). Throws
//! InvalidArgument("no effective samples near y*") when every raw weight is
//! below 1e-300.
Vector nw_weights(const Eigen::Ref<const RowMatrix>& y,
                  const Eigen::Ref<const Vector>& y_star,
                  double bw_y);

//! Conditional density of x (d = 1) given y* on a grid, Gaussian kernels.
Vector nw_ckde(const JointDataset& joint,
               const Eigen::Ref<const Vector>& y_star,
               const Eigen::Ref<const Vector>& x_grid,
               double bw_y,
               double bw_x);

//! Gaussian KDE of one-dimensional samples on a grid.
Vector kde_on_grid(const Eigen::Ref<const Vector>& samples,
                   const Eigen::Ref<const Vector>& x_grid,
                   double bw);

struct CkdeBandwidths
{
  double y = 1.0;
  double x = 1.0;
};

//! Silverman's rule on each marginal; for m > 1 the y bandwidth is the mean of
//! the per-coordinate values.
CkdeBandwidths silverman_ckde_bandwidths(const JointDataset& joint);

//! Silverman's rule for one-dimensional samples.
double silverman_bandwidth_1d(const Eigen::Ref<const Vector>& samples);

//! Trapezoidal integral of |est - truth| over the grid.
double l1_grid_error(const Eigen::Ref<const Vector>& est,
                     const Eigen::Ref<const Vector>& truth,
                     const Eigen::Ref<const Vector>& grid);

//! Trapezoidal integral of f over the grid.
double trapezoid(const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& grid);

//! Grid abscissae of strict local maxima.
std::vector<double> local_maxima(const Eigen::Ref<const Vector>& f,
                                 const Eigen::Ref<const Vector>& grid);

} // namespace otflow
