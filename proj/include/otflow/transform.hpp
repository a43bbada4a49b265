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

#include <string>
#include <vector>

namespace otflow {

//! Coordinatewise change of variables applied before fitting a flow:
//! u_k = (g_k(z_k) - shift_k) / scale_k with g_k = log for flagged columns.
//! Coordinatewise maps keep block-triangular flows block-triangular.
class ColumnTransform
{
public:
  ColumnTransform() = default;
  ColumnTransform(std::vector<bool> log_columns, Vector shift, Vector scale);

  static ColumnTransform identity(Index dim);
  //! Shift/scale to zero mean and unit variance per column of
  //! `data` (after the optional log).
  static ColumnTransform fit(const Eigen::Ref<const RowMatrix>& data,
                             std::vector<bool> log_columns,
                             bool standardize);

  Index dim() const { return shift_.size(); }
  bool is_identity() const;
  const std::vector<bool>& log_columns() const { return log_; }
  const Vector& shift() const { return shift_; }
  const Vector& scale() const { return scale_; }

  RowMatrix forward(const Eigen::Ref<const RowMatrix>& points) const;
  RowMatrix inverse(const Eigen::Ref<const RowMatrix>& points) const;
  Vector forward_point(const Eigen::Ref<const Vector>& z) const;
  //! Transform of a sub-block of columns starting at `offset`.
  RowMatrix forward_columns(const Eigen::Ref<const RowMatrix>& block, Index offset) const;
  RowMatrix inverse_columns(const Eigen::Ref<const RowMatrix>& block, Index offset) const;

private:
  std::vector<bool> log_;
  Vector shift_;
  Vector scale_;
};

} // namespace otflow
