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

#include "otflow/lotka_volterra.hpp"
#include "otflow/types.hpp"

#include <functional>

namespace otflow {

struct McmcConfig
{
  //! Total iterations, burn-in included.
  Index steps = 15000;
  Index burn_in = 5000;
  //! Per-coordinate random-walk scale; a single entry is broadcast.
  Vector proposal_std = Vector::Constant(1, 0.03);
  //! Starting state; empty means the problem default.
  Vector init;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Chain
{
  //! One row per post-burn-in iteration.
  RowMatrix samples;
  Vector log_posts;
  //! Accepted proposals over the recorded iterations.
  double acceptance_rate = 0.0;
  Index accepted = 0;
};

using LogDensity = std::function<double(const Eigen::Ref<const Vector>&)>;

//! Random-walk Metropolis with Gaussian proposals on the state itself. Throws
//! SolverError when no proposal is accepted over the whole run.
Chain rw_metropolis(const LogDensity& log_target, const McmcConfig& config);

//! log posterior of u = log(params): likelihood + prior in u coordinates.
double lv_log_posterior_log_space(const Eigen::Ref<const Vector>& u,
                                  const Eigen::Ref<const Vector>& y_star,
                                  const LVProblem& problem);

//! Metropolis in log-parameter space; samples are returned as parameters.
//! An empty init starts at the prior median.
Chain lv_posterior_mcmc(const Eigen::Ref<const Vector>& y_star,
                        const LVProblem& problem,
                        const McmcConfig& config);

} // namespace otflow
