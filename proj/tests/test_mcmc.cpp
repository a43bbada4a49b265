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

#include "app/config.hpp"
#include "otflow/csv.hpp"
#include "otflow/mcmc.hpp"
#include "otflow/model_io.hpp"

#include <gtest/gtest.h>

using namespace otflow;

namespace {

McmcConfig gaussian_config(Index steps, double proposal)
{
  McmcConfig c;
  c.steps = steps;
  c.burn_in = steps / 10;
  c.proposal_std = Vector::Constant(1, proposal);
  c.init = Vector::Zero(4);
  c.seed = 9;
  return c;
}

double standard_normal_log_density(const Eigen::Ref<const Vector>& u)
{
  return -0.5 * u.squaredNorm();
}

} // namespace

TEST(RwMetropolis, StandardGaussianTarget)
{
  const Index steps = 100000;
  const Chain chain = rw_metropolis(standard_normal_log_density, gaussian_config(steps + steps / 9, 1.2));
  ASSERT_EQ(chain.samples.cols(), 4);
  for (Index k = 0; k < 4; ++k) {
    const Vector c = chain.samples.col(k);
    const double mean = c.mean();
    const double var = (c.array() - mean).square().mean();
    EXPECT_NEAR(mean, 0.0, 0.05);
    EXPECT_NEAR(var, 1.0, 0.1);
  }
}

TEST(RwMetropolis, TinyProposalAcceptsAlmostAll)
{
  const Chain chain = rw_metropolis(standard_normal_log_density, gaussian_config(2000, 1e-6));
  EXPECT_GT(chain.acceptance_rate, 0.99);
  EXPECT_LT(chain.samples.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(RwMetropolis, AcceptanceMatchesDuplicateRows)
{
  const Chain chain = rw_metropolis(standard_normal_log_density, gaussian_config(5000, 1.5));
  Index moved = 0;
  for (Index r = 1; r < chain.samples.rows(); ++r) {
    moved += chain.samples.row(r) != chain.samples.row(r - 1) ? 1 : 0;
  }
  // the first recorded row may or may not be a move
  EXPECT_GE(chain.accepted, moved);
  EXPECT_LE(chain.accepted, moved + 1);
  EXPECT_DOUBLE_EQ(chain.acceptance_rate,
                   static_cast<double>(chain.accepted) / static_cast<double>(chain.samples.rows()));
}

TEST(RwMetropolis, SameSeedSameChain)
{
  const Chain a = rw_metropolis(standard_normal_log_density, gaussian_config(1000, 1.0));
  const Chain b = rw_metropolis(standard_normal_log_density, gaussian_config(1000, 1.0));
  EXPECT_EQ(a.samples, b.samples);
}

TEST(RwMetropolis, NoAcceptanceIsAnError)
{
  auto spike = [](const Eigen::Ref<const Vector>& u) {
    return u.squaredNorm() == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  EXPECT_THROW(rw_metropolis(spike, gaussian_config(100, 1.0)), SolverError);
}

TEST(McmcConfig, Validation)
{
  McmcConfig c;
  c.steps = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = McmcConfig{};
  c.burn_in = c.steps;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = McmcConfig{};
  c.proposal_std = Vector::Constant(1, -0.1);
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(McmcConfig, DefaultKeepsTenThousandSamples)
{
  const McmcConfig c;
  EXPECT_EQ(c.steps - c.burn_in, 10000);
}

TEST(LvPosterior, FixtureAcceptanceRateIsReproduced)
{
  const Json fixture = Json::parse(read_text_file(std::string(OTFLOW_FIXTURE_DIR) + "/lv_canonical.json"));
  const app::LVFixture f = app::read_lv_fixture(std::string(OTFLOW_FIXTURE_DIR) + "/lv_canonical.json");
  const LVProblem problem;
  EXPECT_EQ(f.y_star, app::make_lv_fixture(problem, f.seed).y_star);
  McmcConfig config;
  config.seed = f.seed;
  const Chain chain = lv_posterior_mcmc(f.y_star, problem, config);
  EXPECT_EQ(chain.accepted, fixture.at("mcmc_accepted").get<Index>());
  EXPECT_GE(chain.acceptance_rate, 0.1);
  EXPECT_LE(chain.acceptance_rate, 0.6);
  EXPECT_GT(chain.samples.minCoeff(), 0.0);
}
