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

#include "app/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace otflow::app {

//! Writes the joint dataset (and for Lotka-Volterra the canonical fixture).
//! A positive `held_out_n` also writes an independent held-out set to
//! `held_out_path`.
void cmd_generate(const RunConfig& config,
                  const std::string& out_path,
                  Index held_out_n,
                  const std::string& held_out_path,
                  std::ostream& log);

//! Fits a flow on paths.data; writes the model plus diagnostics, timing,
//! reference and (with markers) marker-sample files next to it.
void cmd_fit(const RunConfig& config, std::ostream& log);

struct SampleRequest
{
  std::string model_path;
  //! Conditional mode when set.
  std::optional<Vector> y_star;
  //! Rows to emit; joint mode with n = 0 pushes the whole stored reference.
  Index n = 0;
  std::uint64_t seed = 0;
  std::string out_path;
  //! Source of x rows (conditional) or of reference rows (joint); defaults to
  //! the reference file written by cmd_fit.
  std::string reference_path;
};

void cmd_sample(const SampleRequest& request, std::ostream& log);

//! Random-walk Metropolis on the Lotka-Volterra posterior at the configured y*.
void cmd_mcmc(const RunConfig& config, const std::string& out_path, std::ostream& log);

struct EvaluateInputs
{
  std::string samples;
  std::string data;
  std::string held_out;
  std::string pushed;
  std::string chain;
  //! Generic two-sample comparison.
  std::string a;
  std::string b;
};

//! Writes report.json and plot-data CSVs into config.paths.out_dir; returns
//! the report.
Json cmd_evaluate(const RunConfig& config, const EvaluateInputs& inputs, std::ostream& log);

//! Resolves y* (explicit or fixture) for the configured problem.
std::optional<Vector> resolve_y_star(const RunConfig& config);

//! Entry point of the command-line tool.
int run_cli(int argc, char** argv);

} // namespace otflow::app
