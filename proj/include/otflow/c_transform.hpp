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

#include "otflow/features.hpp"
#include "otflow/sample.hpp"

namespace otflow {

//! phi(z) = sum_j beta_j F_j(z).
double potential(const FeatureSet& features,
                 const Eigen::Ref<const Vector>& beta,
                 const Eigen::Ref<const Vector>& z);

//! (lambda |y - y'|^2 + |x - x'|^2) / 2. With the infinite penalty any y
//! mismatch costs +inf.
double weighted_cost(const Eigen::Ref<const Vector>& z,
                     const Eigen::Ref<const Vector>& z_prime,
                     const Penalty& lambda,
                     Index y_dim);

struct CTransformSearch
{
  //! Radius of the ball around z' searched for the minimizer.
  double radius = 4.0;
  double tolerance = 1e-14;
  int max_iterations = 200;
  //! Radius doublings allowed when the minimizer sits on the boundary.
  int max_enlargements = 4;
};

struct CTransformResult
{
  double value = 0.0;
  Vector minimizer;
  int iterations = 0;
  int enlargements = 0;
};

//! min_z c_lambda(z, z') - phi(z) by projected Newton with backtracking. For the
//! infinite penalty only x moves. A minimizer on the search boundary logs a
//! warning and retries with a doubled radius; SolverError once retries run out.
CTransformResult c_transform_minimize(const FeatureSet& features,
                                      const Eigen::Ref<const Vector>& beta,
                                      const Eigen::Ref<const Vector>& z_prime,
                                      const Penalty& lambda,
                                      Index y_dim,
                                      const CTransformSearch& search = {});

double c_transform_numeric(const FeatureSet& features,
                           const Eigen::Ref<const Vector>& beta,
                           const Eigen::Ref<const Vector>& z_prime,
                           const Penalty& lambda,
                           Index y_dim,
                           const CTransformSearch& search = {});

//! -sum_j beta_j F_j(z') - 1/2 sum_jk beta_j beta_k <grad F_j, grad_lambda F_k>.
double expansion_second_order(const FeatureSet& features,
                              const Eigen::Ref<const Vector>& beta,
                              const Eigen::Ref<const Vector>& z_prime,
                              const Penalty& lambda,
                              Index y_dim);

//! J(beta) = mean phi over non-marker reference rows + mean phi^c over target
//! rows, with the c-transform evaluated numerically.
double empirical_objective_numeric(const FeatureSet& features,
                                   const Eigen::Ref<const Vector>& beta,
                                   const SampleBatch& ref_batch,
                                   const SampleBatch& target_batch,
                                   const Penalty& lambda,
                                   const CTransformSearch& search = {});

} // namespace otflow
