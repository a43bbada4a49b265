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

#include <array>
#include <string>

namespace otflow {

//! Parameters (alpha, beta, gamma, delta) of
//!   dp1/dt = alpha p1 - beta p1 p2,  dp2/dt = -gamma p2 + delta p1 p2.
using LVParams = std::array<double, 4>;

struct LVProblem
{
  std::array<double, 2> p0{ 30.0, 1.0 };
  double t_end = 20.0;
  double dt_obs = 2.0;
  Index n_obs = 9;
  //! Variance of the Gaussian noise on log observations.
  double sigma2 = 0.1;
  double rk4_dt = 0.01;
  //! Prior log(X) ~ N(prior_mean_log, prior_var_log I).
  std::array<double, 4> prior_mean_log{ -0.125, -3.0, -0.125, -3.0 };
  double prior_var_log = 0.5;
  //! Use -delta p1 p2 in the predator equation.
  bool paper_literal_signs = false;

  //! Prior mean ordered as (-0.125, -0.125, -3, -3) over (alpha, beta, gamma,
  //! delta).
  static std::array<double, 4> literal_prior_mean() { return { -0.125, -0.125, -3.0, -3.0 }; }

  Index obs_dim() const { return 2 * n_obs; }
  void validate() const;
};

//! Canonical parameter used for the reproduction pipeline.
inline constexpr LVParams lv_reference_params{ 0.83, 0.041, 1.08, 0.04 };

template <typename Scalar>
std::array<Scalar, 2> lv_rhs(const std::array<Scalar, 2>& p,
                             const std::array<Scalar, 4>& th,
                             bool paper_literal_signs = false)
{
  const Scalar inter = p[0] * p[1];
  const Scalar prey = th[0] * p[0] - th[1] * inter;
  const Scalar coupling = th[3] * inter;
  const Scalar decay = th[2] * p[1];
  const Scalar pred = paper_literal_signs ? Scalar(-decay - coupling) : Scalar(coupling - decay);
  return { prey, pred };
}

struct Trajectory
{
  Vector times;
  //! One row (p1, p2) per time.
  RowMatrix states;
};

//! Populations on [0, t_end] by classical RK4, recorded every `record_every`
//! integrator steps. Throws NumericalError naming the parameters when the state
//! becomes non-finite or negative.
Trajectory lv_simulate(const LVParams& params, const LVProblem& problem, Index record_every = 1);

//! Noiseless observations p(k dt_obs), k = 1..n_obs, flattened time-major
//! (p1, p2 at t1, then t2, ...).
Vector lv_observation_means(const LVParams& params, const LVProblem& problem);

//! log y_k = log p(k dt_obs) + N(0, sigma2 I).
Vector lv_observe(const Trajectory& traj, const LVProblem& problem, Rng& rng);

RowMatrix lv_prior_sample(Index n, const LVProblem& problem, Rng& rng);
//! Log-normal prior density in parameter space; -inf outside the support.
double lv_log_prior(const LVParams& params, const LVProblem& problem);

struct LVJointSample
{
  JointDataset data;
  //! Prior draws rejected because integration failed.
  Index retries = 0;
};

//! Rows (y, x): m = 2 n_obs observations then the 4 parameters.
LVJointSample lv_joint_sample(Index n, Rng& rng, const LVProblem& problem);

//! Exact log-likelihood of positive observations; -inf (with *failed set)
//! when integration fails.
double lv_log_likelihood(const LVParams& params,
                         const Eigen::Ref<const Vector>& y_star,
                         const LVProblem& problem,
                         bool* failed = nullptr);

std::string lv_params_string(const LVParams& params);

} // namespace otflow
