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

#include "otflow/types.hpp"

namespace otflow {

//! Product-Gaussian kernel density estimate with per-coordinate Silverman
//! bandwidths h_k = sd_k * (4 / ((n + 2) N))^(1 / (n + 4)).
class DensityEstimate
{
public:
  DensityEstimate() = default;

  const RowMatrix& support() const { return support_; }
  const Vector& bandwidths() const { return bandwidths_; }
  Index dim() const { return support_.cols(); }

  //! log of the density at z.
  double log_eval(const Eigen::Ref<const Vector>& z) const;
  //! Density at z; never returns zero for a finite point (underflow is
  //! clamped to the smallest normal double).
  double eval(const Eigen::Ref<const Vector>& z) const;
  //! Largest density value over (a subset of) the support points.
  double peak() const { return peak_; }

  friend DensityEstimate kde_fit(const Eigen::Ref<const RowMatrix>& points,
                                 Index max_support);

private:
  RowMatrix support_;
  Vector bandwidths_;
  Vector inv_bandwidths_;
  double log_norm_ = 0.0;
  double peak_ = 0.0;
};

//! Silverman normal-reference bandwidths for each column.
Vector silverman_bandwidths(const Eigen::Ref<const RowMatrix>& points);

//! Fit on the rows of `points`. When max_support > 0 and there are more rows,
//! an evenly strided subset of that many rows is used.
DensityEstimate kde_fit(const Eigen::Ref<const RowMatrix>& points,
                        Index max_support = 0);

inline double kde_eval(const DensityEstimate& kde, const Eigen::Ref<const Vector>& z)
{
  return kde.eval(z);
}

} // namespace otflow
