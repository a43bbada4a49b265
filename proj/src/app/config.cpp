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

#include <cstdlib>
#include <functional>
#include <map>

namespace otflow::app {

const char* to_string(ProblemKind kind)
{
  switch (kind) {
    case ProblemKind::banana:
      return "banana";
    case ProblemKind::lotka_volterra:
      return "lotka_volterra";
    case ProblemKind::custom_csv:
      return "custom_csv";
  }
  return "banana";
}

ProblemKind problem_kind_from_string(const std::string& name)
{
  if (name == "banana") {
    return ProblemKind::banana;
  }
  if (name == "lotka_volterra") {
    return ProblemKind::lotka_volterra;
  }
  if (name == "custom_csv") {
    return ProblemKind::custom_csv;
  }
  throw InvalidArgument("problem: unknown problem '" + name + "'");
}

std::uint64_t environment_seed()
{
  const char* env = std::getenv("OTFLOW_SEED");
  if (env == nullptr || *env == '\0') {
    return 0;
  }
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == nullptr || *end != '\0') {
    throw InvalidArgument("OTFLOW_SEED must be a non-negative integer");
  }
  return v;
}

RunConfig RunConfig::defaults(ProblemKind kind, std::uint64_t seed)
{
  RunConfig c;
  c.problem = kind;
  c.seed = seed;
  c.flow.seed = seed;
  c.mcmc.seed = seed;
  switch (kind) {
    case ProblemKind::banana:
      c.data.n = 500;
      c.flow.t_max = 2000;
      c.flow.p = 10;
      c.flow.bandwidth_dim = 1.0;
      c.flow.m0 = 0.01;
      c.flow.reference_source = ReferenceSource::reuse;
      c.flow.reference_size = 10000;
      c.flow.reference_mode = ProductMode::tensor_subsample;
      c.flow.marker_count = 2000;
      c.y_star = Vector::Constant(1, 2.0);
      break;
    case ProblemKind::lotka_volterra:
      c.data.n = 1000;
      c.flow.t_max = 2000;
      c.flow.p = 10;
      c.flow.damping = 0.5;
      c.flow.m0 = 1.0;
      c.flow.locality_weight = 0.9;
      c.flow.preprocess = Preprocess::log_standardize;
      c.flow.reference_source = ReferenceSource::reuse;
      c.flow.marker_count = 10000;
      c.y_star_from_fixture = true;
      c.sample.n = 10000;
      break;
    case ProblemKind::custom_csv:
      c.flow.reference_source = ReferenceSource::split;
      break;
  }
  return c;
}

void RunConfig::validate() const
{
  flow.validate();
  mcmc.validate();
  lotka_volterra.validate();
  if (data.n < 1 || data.held_out_n < 0) {
    throw InvalidArgument("data.n must be >= 1 and data.held_out_n >= 0");
  }
  if (sample.n < 0) {
    throw InvalidArgument("sample.n must be >= 0");
  }
  if (!(report.grid_max > report.grid_min) || report.grid_points < 2) {
    throw InvalidArgument("report: grid must have grid_max > grid_min and >= 2 points");
  }
  if (report.permutations < 1 || !(report.quantile > 0.0 && report.quantile < 1.0)) {
    throw InvalidArgument("report: permutations >= 1 and quantile in (0, 1) required");
  }
  if (report.energy_subsample < 0 || report.nearest < 1 || !(report.trajectory_dt > 0.0)) {
    throw InvalidArgument("report: energy_subsample >= 0, nearest >= 1, trajectory_dt > 0 required");
  }
}

namespace {

using Setter = std::function<void(const Json&, const std::string&)>;

void apply_section(const Json& j, const std::string& prefix, const std::map<std::string, Setter>& setters)
{
  if (!j.is_object()) {
    throw InvalidArgument(prefix + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    const std::string name = prefix + "." + key;
    if (it == setters.end()) {
      throw InvalidArgument("unknown key '" + name + "'");
    }
    try {
      it->second(value, name);
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument(name + ": value has the wrong type");
    }
  }
}

template <typename T>
Setter set(T& field)
{
  return [&field](const Json& v, const std::string& name) {
    if constexpr (std::is_same_v<T, double>) {
      field = double_from_json(v, name);
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) {
        throw InvalidArgument(name + ": expected true or false");
      }
      field = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) {
        throw InvalidArgument(name + ": expected an integer");
      }
      field = v.get<T>();
    } else {
      if (!v.is_string()) {
        throw InvalidArgument(name + ": expected a string");
      }
      field = v.get<T>();
    }
  };
}

Vector vector_value(const Json& v, const std::string& name)
{
  if (v.is_number()) {
    return Vector::Constant(1, v.get<double>());
  }
  if (!v.is_array()) {
    throw InvalidArgument(name + ": expected a number or an array");
  }
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Index>(i)) = double_from_json(v[i], name);
  }
  return out;
}

Json vector_json(const Vector& v)
{
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    a.push_back(double_to_json(v(i)));
  }
  return a;
}

Setter set_vector(Vector& field)
{
  return [&field](const Json& v, const std::string& name) { field = vector_value(v, name); };
}

} // namespace

RunConfig parse_run_config(const Json& doc)
{
  if (!doc.is_object()) {
    throw InvalidArgument("config: expected a JSON object");
  }
  ProblemKind kind = ProblemKind::banana;
  if (doc.contains("problem")) {
    if (!doc["problem"].is_string()) {
      throw InvalidArgument("problem: expected a string");
    }
    kind = problem_kind_from_string(doc["problem"].get<std::string>());
  }
  std::uint64_t seed = environment_seed();
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      throw InvalidArgument("seed: expected a non-negative integer");
    }
    seed = doc["seed"].get<std::uint64_t>();
  }
  RunConfig c = RunConfig::defaults(kind, seed);

  for (const auto& [key, value] : doc.items()) {
    if (key == "problem" || key == "seed") {
      continue;
    }
    if (key == "flow") {
      c.flow = flow_config_from_json(value, c.flow, "flow.");
    } else if (key == "data") {
      apply_section(value, "data", { { "n", set(c.data.n) }, { "held_out_n", set(c.data.held_out_n) } });
    } else if (key == "mcmc") {
      apply_section(value,
                    "mcmc",
                    { { "steps", set(c.mcmc.steps) },
                      { "burn_in", set(c.mcmc.burn_in) },
                      { "proposal_std", set_vector(c.mcmc.proposal_std) },
                      { "init", set_vector(c.mcmc.init) },
                      { "seed", set(c.mcmc.seed) } });
    } else if (key == "lotka_volterra") {
      LVProblem& lv = c.lotka_volterra;
      apply_section(value,
                    "lotka_volterra",
                    { { "sigma2", set(lv.sigma2) },
                      { "rk4_dt", set(lv.rk4_dt) },
                      { "t_end", set(lv.t_end) },
                      { "dt_obs", set(lv.dt_obs) },
                      { "n_obs", set(lv.n_obs) },
                      { "prior_var_log", set(lv.prior_var_log) },
                      { "paper_literal_signs", set(lv.paper_literal_signs) },
                      { "paper_literal_prior", set(c.paper_literal_prior) } });
    } else if (key == "paths") {
      PathsSection& p = c.paths;
      apply_section(value,
                    "paths",
                    { { "data", set(p.data) },
                      { "model", set(p.model) },
                      { "samples", set(p.samples) },
                      { "pushed", set(p.pushed) },
                      { "chain", set(p.chain) },
                      { "fixture", set(p.fixture) },
                      { "out_dir", set(p.out_dir) } });
    } else if (key == "y_star") {
      if (value.is_string()) {
        if (value.get<std::string>() != "fixture") {
          throw InvalidArgument("y_star: expected numbers or \"fixture\"");
        }
        c.y_star.reset();
        c.y_star_from_fixture = true;
      } else if (value.is_null()) {
        c.y_star.reset();
        c.y_star_from_fixture = false;
      } else {
        c.y_star = vector_value(value, "y_star");
        c.y_star_from_fixture = false;
      }
    } else if (key == "sample") {
      apply_section(value, "sample", { { "n", set(c.sample.n) } });
    } else if (key == "report") {
      ReportSection& r = c.report;
      apply_section(value,
                    "report",
                    { { "grid_min", set(r.grid_min) },
                      { "grid_max", set(r.grid_max) },
                      { "grid_points", set(r.grid_points) },
                      { "permutations", set(r.permutations) },
                      { "quantile", set(r.quantile) },
                      { "energy_subsample", set(r.energy_subsample) },
                      { "nearest", set(r.nearest) },
                      { "trajectory_dt", set(r.trajectory_dt) } });
    } else {
      throw InvalidArgument("unknown key '" + key + "'");
    }
  }
  if (c.paper_literal_prior) {
    c.lotka_volterra.prior_mean_log = LVProblem::literal_prior_mean();
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path)
{
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  return parse_run_config(doc);
}

Json to_json(const RunConfig& c)
{
  Json j;
  j["problem"] = to_string(c.problem);
  j["seed"] = c.seed;
  j["data"] = { { "n", c.data.n }, { "held_out_n", c.data.held_out_n } };
  j["flow"] = to_json(c.flow);
  j["mcmc"] = { { "steps", c.mcmc.steps },
                { "burn_in", c.mcmc.burn_in },
                { "proposal_std", vector_json(c.mcmc.proposal_std) },
                { "init", vector_json(c.mcmc.init) },
                { "seed", c.mcmc.seed } };
  const LVProblem& lv = c.lotka_volterra;
  j["lotka_volterra"] = { { "sigma2", double_to_json(lv.sigma2) },
                          { "rk4_dt", double_to_json(lv.rk4_dt) },
                          { "t_end", double_to_json(lv.t_end) },
                          { "dt_obs", double_to_json(lv.dt_obs) },
                          { "n_obs", lv.n_obs },
                          { "prior_var_log", double_to_json(lv.prior_var_log) },
                          { "paper_literal_signs", lv.paper_literal_signs },
                          { "paper_literal_prior", c.paper_literal_prior } };
  j["paths"] = { { "data", c.paths.data },
                 { "model", c.paths.model },
                 { "samples", c.paths.samples },
                 { "pushed", c.paths.pushed },
                 { "chain", c.paths.chain },
                 { "fixture", c.paths.fixture },
                 { "out_dir", c.paths.out_dir } };
  if (c.y_star_from_fixture) {
    j["y_star"] = "fixture";
  } else if (c.y_star) {
    j["y_star"] = vector_json(*c.y_star);
  } else {
    j["y_star"] = nullptr;
  }
  j["sample"] = { { "n", c.sample.n } };
  const ReportSection& r = c.report;
  j["report"] = { { "grid_min", double_to_json(r.grid_min) },
                  { "grid_max", double_to_json(r.grid_max) },
                  { "grid_points", r.grid_points },
                  { "permutations", r.permutations },
                  { "quantile", double_to_json(r.quantile) },
                  { "energy_subsample", r.energy_subsample },
                  { "nearest", r.nearest },
                  { "trajectory_dt", double_to_json(r.trajectory_dt) } };
  return j;
}

LVFixture make_lv_fixture(const LVProblem& problem, std::uint64_t seed)
{
  LVFixture f;
  f.seed = seed;
  Rng rng(seed, 11);
  const Index per_obs = static_cast<Index>(std::llround(problem.dt_obs / problem.rk4_dt));
  f.y_star = lv_observe(lv_simulate(f.x_star, problem, per_obs), problem, rng);
  return f;
}

void write_lv_fixture(const std::string& path, const LVFixture& fixture)
{
  Json j;
  j["seed"] = fixture.seed;
  j["x_star"] = Json::array();
  for (double v : fixture.x_star) {
    j["x_star"].push_back(v);
  }
  j["y_star"] = vector_json(fixture.y_star);
  write_text_file(path, j.dump(2) + "\n");
}

LVFixture read_lv_fixture(const std::string& path)
{
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  LVFixture f;
  try {
    f.seed = j.at("seed").get<std::uint64_t>();
    const Vector x = vector_value(j.at("x_star"), "x_star");
    if (x.size() != 4) {
      throw InvalidArgument(path + ": x_star must have 4 entries");
    }
    f.x_star = { x(0), x(1), x(2), x(3) };
    f.y_star = vector_value(j.at("y_star"), "y_star");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return f;
}

} // namespace otflow::app
