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

#include "otflow/flow.hpp"
#include "otflow/lotka_volterra.hpp"
#include "otflow/mcmc.hpp"
#include "otflow/model_io.hpp"

#include <optional>
#include <string>

namespace otflow::app {

enum class ProblemKind
{
  banana,
  lotka_volterra,
  custom_csv
};

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

struct DataSection
{
  //! Joint samples drawn by `generate`.
  Index n = 500;
  //! Held-out joint samples used by `evaluate`.
  Index held_out_n = 500;
};

struct PathsSection
{
  std::string data = "data.csv";
  std::string model = "model.json";
  std::string samples = "samples.csv";
  std::string pushed = "pushed.csv";
  std::string chain = "chain.csv";
  std::string fixture;
  std::string out_dir = ".";
};

struct SampleSection
{
  Index n = 10000;
};

struct ReportSection
{
  double grid_min = -6.0;
  double grid_max = 6.0;
  Index grid_points = 1201;
  Index permutations = 200;
  double quantile = 0.95;
  //! Rows of each sample compared in energy-distance tests (0 keeps all).
  Index energy_subsample = 500;
  Index nearest = 30;
  //! Time step of exported trajectories.
  double trajectory_dt = 0.1;
};

struct RunConfig
{
  ProblemKind problem = ProblemKind::banana;
  std::uint64_t seed = 0;
  DataSection data;
  FlowConfig flow;
  McmcConfig mcmc;
  LVProblem lotka_volterra;
  //! Use the printed (alpha, beta, gamma, delta) prior mean ordering.
  bool paper_literal_prior = false;
  PathsSection paths;
  //! Conditioning value; for Lotka-Volterra "fixture" loads the canonical one.
  std::optional<Vector> y_star;
  bool y_star_from_fixture = false;
  SampleSection sample;
  ReportSection report;

  //! Fills problem defaults before the file is applied.
  static RunConfig defaults(ProblemKind kind, std::uint64_t seed = 0);
  void validate() const;
};

//! Seed used when neither the config nor a flag sets one: OTFLOW_SEED, else 0.
std::uint64_t environment_seed();

//! Parses a config document. Unknown keys and ill-typed values throw
//! InvalidArgument naming the key path.
RunConfig parse_run_config(const Json& doc);
RunConfig load_run_config(const std::string& path);
Json to_json(const RunConfig& config);

//! The canonical Lotka-Volterra observation and its generating seed.
struct LVFixture
{
  LVParams x_star = lv_reference_params;
  Vector y_star;
  std::uint64_t seed = 0;
};

LVFixture make_lv_fixture(const LVProblem& problem, std::uint64_t seed);
void write_lv_fixture(const std::string& path, const LVFixture& fixture);
LVFixture read_lv_fixture(const std::string& path);

//! Seed of the checked-in canonical fixture.
inline constexpr std::uint64_t kCanonicalFixtureSeed = 20230417;

} // namespace otflow::app
