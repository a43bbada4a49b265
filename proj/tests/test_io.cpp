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
#include "otflow/model_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace otflow;

namespace {

std::string temp_path(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / "otflow_io_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

FlowModel sample_model()
{
  Rng rng(1, 0);
  FlowModel model;
  model.y_dim = 1;
  model.x_dim = 2;
  model.transform = ColumnTransform({ true, false, false }, Vector::Constant(3, 0.1), Vector::Constant(3, 2.0));
  for (int t = 0; t < 3; ++t) {
    std::vector<Feature> fs;
    for (int j = 0; j < 2; ++j) {
      Vector c(3);
      c << rng.normal(), rng.normal() / 3.0, 1e-300 * rng.normal();
      fs.push_back(Feature{ j == 0 ? FeatureKind::erf_radial : FeatureKind::inverse_multiquadric,
                            c,
                            0.1 + rng.uniform() });
    }
    Vector beta(2);
    beta << rng.normal(), std::nextafter(1.0, 2.0);
    model.steps.push_back(ElementaryMap{ FeatureSet(fs), beta, Penalty::infinite() });
    model.diagnostics.push_back(StepDiagnostics{ 0.5, 0.25, 2, 1.0 / 3.0, 0.0 });
  }
  model.terminated_by = Termination::threshold;
  model.config.seed = 77;
  return model;
}

} // namespace

TEST(FormatDouble, RoundTripsExactly)
{
  Rng rng(2, 0);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.normal(), static_cast<int>(rng.uniform_index(200)) - 100);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Csv, RoundTrip)
{
  RowMatrix m(3, 2);
  m << 1.0, -2.5, 1.0 / 3.0, 1e-310, 4e100, 0.0;
  std::stringstream s;
  write_csv(s, { "a", "b" }, m);
  const CsvTable t = read_csv(s);
  EXPECT_EQ(t.header, (std::vector<std::string>{ "a", "b" }));
  EXPECT_EQ(t.values, m);
}

TEST(Csv, RaggedRowsAreRejected)
{
  std::stringstream s("a,b\n1,2\n3\n");
  EXPECT_THROW(read_csv(s), IoError);
}

TEST(Csv, NonNumericIsRejected)
{
  std::stringstream s("a\nfoo\n");
  EXPECT_THROW(read_csv(s), IoError);
}

TEST(Csv, DatasetSidecarRoundTrip)
{
  JointDataset j{ RowMatrix::Random(5, 3), 2, 1, 99 };
  const std::string path = temp_path("joint.csv");
  write_dataset(path, j);
  const JointDataset back = read_dataset(path);
  EXPECT_EQ(back.pairs, j.pairs);
  EXPECT_EQ(back.y_dim, 2);
  EXPECT_EQ(back.x_dim, 1);
  EXPECT_EQ(sample_header(2, 1), (std::vector<std::string>{ "y0", "y1", "x0" }));
}

TEST(Csv, MissingFileIsIoError)
{
  EXPECT_THROW(read_csv(std::string("/nonexistent/otflow.csv")), IoError);
}

TEST(ModelIo, RoundTripIsBitwise)
{
  const FlowModel model = sample_model();
  const std::string path = temp_path("model.json");
  save_model(path, model);
  const FlowModel back = load_model(path);
  ASSERT_EQ(back.steps.size(), model.steps.size());
  EXPECT_TRUE(back.all_block_triangular());
  EXPECT_EQ(back.terminated_by, Termination::threshold);
  EXPECT_EQ(back.config.seed, 77u);
  EXPECT_EQ(back.transform.log_columns(), model.transform.log_columns());
  for (std::size_t t = 0; t < model.steps.size(); ++t) {
    EXPECT_EQ(back.steps[t].beta, model.steps[t].beta);
    for (Index j = 0; j < 2; ++j) {
      EXPECT_EQ(back.steps[t].features[j].center, model.steps[t].features[j].center);
      EXPECT_EQ(back.steps[t].features[j].bandwidth, model.steps[t].features[j].bandwidth);
      EXPECT_EQ(back.steps[t].features[j].kind, model.steps[t].features[j].kind);
    }
  }
  save_model(path + ".2", back);
  EXPECT_EQ(read_text_file(path), read_text_file(path + ".2"));
}

TEST(ModelIo, FinitePenaltyRoundTrip)
{
  FlowModel model = sample_model();
  model.steps[1].lambda = Penalty(4.0);
  const FlowModel back = flow_model_from_json(to_json(model));
  EXPECT_EQ(back.steps[1].lambda.value(), 4.0);
  EXPECT_FALSE(back.all_block_triangular());
}

TEST(ModelIo, CorruptDocumentsAreRejected)
{
  Json j = to_json(sample_model());
  j["format"] = "something-else";
  EXPECT_ANY_THROW(flow_model_from_json(j));
  j = to_json(sample_model());
  j["steps"][0]["beta"] = Json::array({ 1.0 });
  EXPECT_ANY_THROW(flow_model_from_json(j));
  EXPECT_THROW(double_to_json(std::nan("")), InvalidArgument);
}

TEST(FlowConfigJson, UnknownKeyIsNamed)
{
  Json j = Json::parse(R"({"p": 12, "bogus": 1})");
  try {
    flow_config_from_json(j);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("flow.bogus"), std::string::npos);
  }
}

TEST(FlowConfigJson, RoundTrip)
{
  FlowConfig c;
  c.p = 17;
  c.ridge = 0.25;
  c.lambda = 3.0;
  c.preprocess = Preprocess::log_standardize;
  const FlowConfig back = flow_config_from_json(to_json(c));
  EXPECT_EQ(back.p, 17);
  EXPECT_EQ(back.ridge, 0.25);
  EXPECT_EQ(back.lambda, 3.0);
  EXPECT_EQ(back.preprocess, Preprocess::log_standardize);
  EXPECT_TRUE(std::isinf(flow_config_from_json(to_json(FlowConfig{})).lambda));
}

TEST(RunConfig, ProblemDefaults)
{
  const app::RunConfig banana = app::RunConfig::defaults(app::ProblemKind::banana, 4);
  EXPECT_EQ(banana.data.n, 500);
  EXPECT_EQ(banana.flow.p, 10);
  EXPECT_EQ(banana.flow.seed, 4u);
  EXPECT_EQ((*banana.y_star)(0), 2.0);
  const app::RunConfig lv = app::RunConfig::defaults(app::ProblemKind::lotka_volterra);
  EXPECT_EQ(lv.data.n, 1000);
  EXPECT_EQ(lv.flow.damping, 0.5);
  EXPECT_TRUE(lv.y_star_from_fixture);
}

TEST(RunConfig, ParseOverridesAndSeedPropagation)
{
  const app::RunConfig c = app::parse_run_config(Json::parse(
    R"({"problem": "lotka_volterra", "seed": 12, "flow": {"t_max": 50}, "mcmc": {"steps": 300, "burn_in": 100}})"));
  EXPECT_EQ(c.problem, app::ProblemKind::lotka_volterra);
  EXPECT_EQ(c.flow.t_max, 50);
  EXPECT_EQ(c.flow.seed, 12u);
  EXPECT_EQ(c.mcmc.seed, 12u);
  EXPECT_EQ(c.mcmc.steps, 300);
  EXPECT_EQ(c.flow.damping, 0.5);
}

TEST(RunConfig, UnknownKeysAreRejected)
{
  EXPECT_THROW(app::parse_run_config(Json::parse(R"({"problem": "banana", "flw": {}})")), InvalidArgument);
  EXPECT_THROW(app::parse_run_config(Json::parse(R"({"problem": "banana", "data": {"m": 3}})")),
               InvalidArgument);
  EXPECT_THROW(app::parse_run_config(Json::parse(R"({"problem": "pear"})")), InvalidArgument);
}

TEST(RunConfig, JsonRoundTrip)
{
  app::RunConfig c = app::RunConfig::defaults(app::ProblemKind::banana, 3);
  c.flow.m0 = 2.5;
  c.report.permutations = 50;
  const app::RunConfig back = app::parse_run_config(app::to_json(c));
  EXPECT_EQ(app::to_json(back).dump(), app::to_json(c).dump());
}

TEST(LvFixture, RoundTrip)
{
  const app::LVFixture f = app::make_lv_fixture(LVProblem{}, 5);
  const std::string path = temp_path("fixture.json");
  app::write_lv_fixture(path, f);
  const app::LVFixture back = app::read_lv_fixture(path);
  EXPECT_EQ(back.y_star, f.y_star);
  EXPECT_EQ(back.seed, 5u);
  EXPECT_EQ(back.y_star.size(), 18);
}
