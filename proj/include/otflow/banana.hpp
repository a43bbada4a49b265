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

namespace otflow {

//! Rows (y, x) with x ~ N(0, 1) and y = x^2 / 2 - 1 + N(0, 1). Row i uses its
//! own stream derived from one draw of `rng`.
JointDataset banana_joint_sample(Index n, Rng& rng);

//! Unnormalized mu(x | y*) = exp(-(y* - x^2/2 + 1)^2 / 2 - x^2 / 2).
double banana_conditional_kernel(double x, double y_star);

//! Integral of banana_conditional_kernel over the real line.
double banana_conditional_normalizer(double y_star);

//! mu(x | y*) on a grid. Throws InvalidArgument unless the grid spans [-6, 6].
Vector banana_conditional_pdf(const Eigen::Ref<const Vector>& x_grid, double y_star);

} // namespace otflow
