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

#include "otflow/lotka_volterra.hpp"

#include "otflow/csv.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace otflow {

void LVProblem::validate() const
{
  if (!(p0[0] > 0.0 && p0[1] > 0.0)) {
    throw InvalidArgument("lotka_volterra.p0 must be positive");
  }
  if (!(rk4_dt > 0.0 && dt_obs > 0.0 && sigma2 > 0.0 && prior_var_log > 0.0)) {
    throw InvalidArgument("lotka_volterra: rk4_dt, dt_obs, sigma2 and prior_var_log must be positive");
  }
  if (n_obs < 1 || static_cast<double>(n_obs) * dt_obs > t_end + 1e-9) {
    throw InvalidArgument("lotka_volterra: observation times exceed t_end");
  }
  const double ratio = dt_obs / rk4_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw InvalidArgument("lotka_volterra.rk4_dt must divide dt_obs");
  }
}

std::string lv_params_string(const LVParams& params)
{
  return "(" + format_double(params[0]) + ", " + format_double(params[1]) + ", " +
         format_double(params[2]) + ", " + format_double(params[3]) + ")";
}

namespace {

using State = std::array<double, 2>;

State rk4_step(const State& p, const LVParams& th, double h, bool literal)
{
  auto axpy = [](const State& a, double s, const State& b) {
    return State{ a[0] + s * b[0], a[1] + s * b[1] };
  };
  const State k1 = lv_rhs(p, th, literal);
  const State k2 = lv_rhs(axpy(p, 0.5 * h, k1), th, literal);
  const State k3 = lv_rhs(axpy(p, 0.5 * h, k2), th, literal);
  const State k4 = lv_rhs(axpy(p, h, k3), th, literal);
  return { p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
           p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) };
}

Index total_steps(const LVProblem& problem)
{
  return static_cast<Index>(std::llround(problem.t_end / problem.rk4_dt));
}

// Integrates and calls `record(step, state)` for every step (step 0 included).
template <typename Record>
void integrate(const LVParams& params, const LVProblem& problem, Record record)
{
  for (double v : params) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw NumericalError("lotka_volterra: invalid parameters " + lv_params_string(params));
    }
  }
  const Index steps = total_steps(problem);
  State p = problem.p0;
  record(0, p);
  for (Index s = 1; s <= steps; ++s) {
    p = rk4_step(p, params, problem.rk4_dt, problem.paper_literal_signs);
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || p[0] < -1e-8 || p[1] < -1e-8) {
      throw NumericalError("lotka_volterra: integration failed at t = " +
                           format_double(static_cast<double>(s) * problem.rk4_dt) +
                           " for parameters " + lv_params_string(params));
    }
    record(s, p);
  }
}

} // namespace

Trajectory lv_simulate(const LVParams& params, const LVProblem& problem, Index record_every)
{
  problem.validate();
  if (record_every < 1) {
    throw InvalidArgument("lv_simulate: record_every must be >= 1");
  }
  const Index steps = total_steps(problem);
  const Index count = steps / record_every + 1;
  Trajectory traj{ Vector(count), RowMatrix(count, 2) };
  integrate(params, problem, [&](Index s, const State& p) {
    if (s % record_every == 0) {
      const Index r = s / record_every;
      traj.times(r) = static_cast<double>(s) * problem.rk4_dt;
      traj.states(r, 0) = p[0];
      traj.states(r, 1) = p[1];
    }
  });
  return traj;
}

Vector lv_observation_means(const LVParams& params, const LVProblem& problem)
{
  problem.validate();
  const Index per_obs = static_cast<Index>(std::llround(problem.dt_obs / problem.rk4_dt));
  Vector out(problem.obs_dim());
  integrate(params, problem, [&](Index s, const State& p) {
    if (s > 0 && s % per_obs == 0 && s / per_obs <= problem.n_obs) {
      const Index k = s / per_obs - 1;
      out(2 * k) = p[0];
      out(2 * k + 1) = p[1];
    }
  });
  return out;
}

Vector lv_observe(const Trajectory& traj, const LVProblem& problem, Rng& rng)
{
  const double sd = std::sqrt(problem.sigma2);
  Vector out(problem.obs_dim());
  for (Index k = 0; k < problem.n_obs; ++k) {
    const double t = static_cast<double>(k + 1) * problem.dt_obs;
    Index row = -1;
    for (Index r = 0; r < traj.times.size(); ++r) {
      if (std::abs(traj.times(r) - t) < 1e-9) {
        row = r;
        break;
      }
    }
    if (row < 0) {
      throw InvalidArgument("lv_observe: trajectory has no state at t = " + format_double(t));
    }
    for (Index s = 0; s < 2; ++s) {
      const double p = traj.states(row, s);
      if (!(p > 0.0)) {
        throw NumericalError("lv_observe: nonpositive population at t = " + format_double(t));
      }
      out(2 * k + s) = std::exp(std::log(p) + sd * rng.normal());
    }
  }
  return out;
}

RowMatrix lv_prior_sample(Index n, const LVProblem& problem, Rng& rng)
{
  if (n < 1) {
    throw InvalidArgument("lv_prior_sample: n must be >= 1");
  }
  const double sd = std::sqrt(problem.prior_var_log);
  RowMatrix out(n, 4);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < 4; ++k) {
      out(i, k) = std::exp(problem.prior_mean_log[static_cast<std::size_t>(k)] + sd * rng.normal());
    }
  }
  return out;
}

double lv_log_prior(const LVParams& params, const LVProblem& problem)
{
  const double v = problem.prior_var_log;
  double lp = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!(params[k] > 0.0)) {
      return -std::numeric_limits<double>::infinity();
    }
    const double l = std::log(params[k]);
    const double r = l - problem.prior_mean_log[k];
    lp += -0.5 * r * r / v - 0.5 * std::log(2.0 * std::numbers::pi * v) - l;
  }
  return lp;
}

LVJointSample lv_joint_sample(Index n, Rng& rng, const LVProblem& problem)
{
  problem.validate();
  if (n < 1) {
    throw InvalidArgument("lv_joint_sample: n must be >= 1");
  }
  const Index m = problem.obs_dim();
  const Index per_obs = static_cast<Index>(std::llround(problem.dt_obs / problem.rk4_dt));
  const std::uint64_t key = rng.next_u64();
  LVJointSample out{ JointDataset{ RowMatrix(n, m + 4), m, 4, key }, 0 };
  for (Index i = 0; i < n; ++i) {
    Rng row(key, static_cast<std::uint64_t>(i));
    for (;;) {
      const RowMatrix x = lv_prior_sample(1, problem, row);
      const LVParams th{ x(0, 0), x(0, 1), x(0, 2), x(0, 3) };
      try {
        const Trajectory traj = lv_simulate(th, problem, per_obs);
        const Vector y = lv_observe(traj, problem, row);
        out.data.pairs.row(i).head(m) = y.transpose();
        out.data.pairs.row(i).tail(4) = x.row(0);
        break;
      } catch (const NumericalError&) {
        ++out.retries;
      }
    }
  }
  return out;
}

double lv_log_likelihood(const LVParams& params,
                         const Eigen::Ref<const Vector>& y_star,
                         const LVProblem& problem,
                         bool* failed)
{
  if (y_star.size() != problem.obs_dim()) {
    throw InvalidArgument("lv_log_likelihood: observation has the wrong dimension");
  }
  if (!(y_star.array() > 0.0).all()) {
    throw InvalidArgument("lv_log_likelihood: observations must be positive");
  }
  if (failed) {
    *failed = false;
  }
  Vector mean;
  try {
    mean = lv_observation_means(params, problem);
  } catch (const NumericalError&) {
    if (failed) {
      *failed = true;
    }
    return -std::numeric_limits<double>::infinity();
  }
  if (!(mean.array() > 0.0).all()) {
    if (failed) {
      *failed = true;
    }
    return -std::numeric_limits<double>::infinity();
  }
  const double v = problem.sigma2;
  const double norm = -0.5 * std::log(2.0 * std::numbers::pi * v);
  double ll = 0.0;
  for (Index k = 0; k < y_star.size(); ++k) {
    const double ly = std::log(y_star(k));
    const double r = ly - std::log(mean(k));
    ll += norm - 0.5 * r * r / v - ly;
  }
  return ll;
}

} // namespace otflow
