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

#include "otflow/mcmc.hpp"

#include "otflow/random.hpp"

#include <cmath>
#include <limits>

namespace otflow {

void McmcConfig::validate() const
{
  if (steps < 1) {
    throw InvalidArgument("mcmc.steps must be >= 1");
  }
  if (burn_in < 0 || burn_in >= steps) {
    throw InvalidArgument("mcmc.burn_in must lie in [0, steps)");
  }
  if (proposal_std.size() < 1 || !(proposal_std.array() > 0.0).all() ||
      !proposal_std.allFinite()) {
    throw InvalidArgument("mcmc.proposal_std must be positive");
  }
}

Chain rw_metropolis(const LogDensity& log_target, const McmcConfig& config)
{
  config.validate();
  const Index dim = config.init.size();
  if (dim < 1) {
    throw InvalidArgument("mcmc.init must be non-empty");
  }
  if (config.proposal_std.size() != 1 && config.proposal_std.size() != dim) {
    throw InvalidArgument("mcmc.proposal_std must have 1 or " + std::to_string(dim) + " entries");
  }
  const Vector scale = config.proposal_std.size() == 1
                         ? Vector::Constant(dim, config.proposal_std(0))
                         : config.proposal_std;
  Vector state = config.init;
  double lp = log_target(state);
  if (!std::isfinite(lp)) {
    throw InvalidArgument("mcmc: log target is not finite at init");
  }
  Rng rng(config.seed, 3);
  const Index kept = config.steps - config.burn_in;
  Chain chain{ RowMatrix(kept, dim), Vector(kept), 0.0, 0 };
  Index accepted_total = 0;
  Vector proposal(dim);
  for (Index s = 0; s < config.steps; ++s) {
    for (Index k = 0; k < dim; ++k) {
      proposal(k) = state(k) + scale(k) * rng.normal();
    }
    const double lq = log_target(proposal);
    const double u = rng.uniform_positive();
    const bool accept = std::isfinite(lq) && std::log(u) < lq - lp;
    if (accept) {
      state = proposal;
      lp = lq;
      ++accepted_total;
    }
    if (s >= config.burn_in) {
      const Index r = s - config.burn_in;
      chain.samples.row(r) = state.transpose();
      chain.log_posts(r) = lp;
      chain.accepted += accept ? 1 : 0;
    }
  }
  if (accepted_total == 0) {
    throw SolverError("mcmc: no proposal accepted in " + std::to_string(config.steps) +
                      " steps; use a smaller proposal_std");
  }
  chain.acceptance_rate = static_cast<double>(chain.accepted) / static_cast<double>(kept);
  return chain;
}

double lv_log_posterior_log_space(const Eigen::Ref<const Vector>& u,
                                  const Eigen::Ref<const Vector>& y_star,
                                  const LVProblem& problem)
{
  if (u.size() != 4) {
    throw InvalidArgument("lv posterior: expected 4 log-parameters");
  }
  const LVParams params{ std::exp(u(0)), std::exp(u(1)), std::exp(u(2)), std::exp(u(3)) };
  const double ll = lv_log_likelihood(params, y_star, problem);
  if (!std::isfinite(ll)) {
    return -std::numeric_limits<double>::infinity();
  }
  // parameter-space prior times the Jacobian exp(sum u)
  return ll + lv_log_prior(params, problem) + u.sum();
}

Chain lv_posterior_mcmc(const Eigen::Ref<const Vector>& y_star,
                        const LVProblem& problem,
                        const McmcConfig& config)
{
  McmcConfig c = config;
  if (c.init.size() == 0) {
    c.init = Eigen::Map<const Vector>(problem.prior_mean_log.data(), 4);
  } else {
    if (c.init.size() != 4 || !(c.init.array() > 0.0).all()) {
      throw InvalidArgument("mcmc.init must hold 4 positive parameters");
    }
    c.init = c.init.array().log().matrix();
  }
  const Vector obs = y_star;
  Chain chain = rw_metropolis(
    [&](const Eigen::Ref<const Vector>& u) { return lv_log_posterior_log_space(u, obs, problem); },
    c);
  chain.samples = chain.samples.array().exp().matrix();
  return chain;
}

} // namespace otflow
