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

#include "app/commands.hpp"

#include "otflow/banana.hpp"
#include "otflow/ckde.hpp"
#include "otflow/csv.hpp"
#include "otflow/metrics.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace otflow::app {

namespace {

// Adds `extra` to the metadata sidecar of a CSV written by csv.hpp.
void extend_sidecar(const std::string& csv_path, const Json& extra)
{
  const std::string meta_path = csv_path + ".json";
  Json meta = Json::object();
  if (std::filesystem::exists(meta_path)) {
    meta = Json::parse(read_text_file(meta_path));
  }
  for (const auto& [k, v] : extra.items()) {
    meta[k] = v;
  }
  write_text_file(meta_path, meta.dump(2) + "\n");
}

void write_table(const std::string& path,
                 const std::vector<std::string>& header,
                 const Eigen::Ref<const RowMatrix>& values,
                 const Json& meta)
{
  write_csv(path, header, values);
  write_text_file(path + ".json", meta.dump(2) + "\n");
}

RowMatrix distinct_rows(const RowMatrix& s)
{
  std::vector<Index> order(static_cast<std::size_t>(s.rows()));
  std::iota(order.begin(), order.end(), Index{ 0 });
  auto less = [&](Index a, Index b) {
    for (Index k = 0; k < s.cols(); ++k) {
      if (s(a, k) != s(b, k)) {
        return s(a, k) < s(b, k);
      }
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  std::vector<Index> keep;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (r == 0 || s.row(order[r]) != s.row(order[r - 1])) {
      keep.push_back(order[r]);
    }
  }
  std::sort(keep.begin(), keep.end());
  RowMatrix out(static_cast<Index>(keep.size()), s.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.row(static_cast<Index>(r)) = s.row(keep[r]);
  }
  return out;
}

Json vector_json(const Eigen::Ref<const Vector>& v)
{
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    a.push_back(double_to_json(v(i)));
  }
  return a;
}

std::vector<std::string> x_header(Index d)
{
  return sample_header(0, d);
}

void ensure_parent(const std::string& path)
{
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
}

std::string in_dir(const RunConfig& config, const std::string& name)
{
  std::filesystem::create_directories(config.paths.out_dir);
  return (std::filesystem::path(config.paths.out_dir) / name).string();
}

Vector report_grid(const RunConfig& config)
{
  return Vector::LinSpaced(config.report.grid_points, config.report.grid_min, config.report.grid_max);
}

Json test_json(const PermutationTest& t)
{
  return { { "statistic", double_to_json(t.statistic) },
           { "threshold", double_to_json(t.threshold) },
           { "p_value", double_to_json(t.p_value) },
           { "below_threshold", t.statistic < t.threshold } };
}

RowMatrix head_rows(const RowMatrix& m, Index count)
{
  if (count <= 0 || count >= m.rows()) {
    return m;
  }
  return m.topRows(count);
}

const char* const kLvNames[4] = { "alpha", "beta", "gamma", "delta" };

} // namespace

std::optional<Vector> resolve_y_star(const RunConfig& config)
{
  if (!config.y_star_from_fixture) {
    return config.y_star;
  }
  if (config.problem != ProblemKind::lotka_volterra) {
    throw InvalidArgument("y_star: \"fixture\" is only defined for lotka_volterra");
  }
  if (!config.paths.fixture.empty()) {
    return read_lv_fixture(config.paths.fixture).y_star;
  }
  return make_lv_fixture(config.lotka_volterra, kCanonicalFixtureSeed).y_star;
}

void cmd_generate(const RunConfig& config,
                  const std::string& out_path,
                  Index held_out_n,
                  const std::string& held_out_path,
                  std::ostream& log)
{
  config.validate();
  Rng rng(config.seed, 21);
  ensure_parent(out_path);
  const Json echo = to_json(config);
  auto generate = [&](Index n, const std::string& path, const char* role) {
    Json extra = { { "role", role }, { "config", echo } };
    switch (config.problem) {
      case ProblemKind::banana: {
        write_dataset(path, banana_joint_sample(n, rng));
        break;
      }
      case ProblemKind::lotka_volterra: {
        const LVJointSample s = lv_joint_sample(n, rng, config.lotka_volterra);
        write_dataset(path, s.data);
        extra["integration_retries"] = s.retries;
        log << "lotka_volterra: " << s.retries << " prior draws retried\n";
        break;
      }
      case ProblemKind::custom_csv:
        throw InvalidArgument("problem: generate does not apply to custom_csv");
    }
    extend_sidecar(path, extra);
    log << "wrote " << n << " rows to " << path << "\n";
  };
  generate(config.data.n, out_path, "joint");
  if (held_out_n > 0) {
    if (held_out_path.empty()) {
      throw InvalidArgument("--held-out-out is required when held_out_n > 0");
    }
    generate(held_out_n, held_out_path, "held_out");
  }
  if (config.problem == ProblemKind::lotka_volterra) {
    const std::string fixture_path =
      config.paths.fixture.empty() ? out_path + ".fixture.json" : config.paths.fixture;
    if (fixture_path != config.paths.fixture || !std::filesystem::exists(fixture_path)) {
      write_lv_fixture(fixture_path, make_lv_fixture(config.lotka_volterra, kCanonicalFixtureSeed));
      log << "wrote canonical fixture to " << fixture_path << "\n";
    }
  }
}

void cmd_fit(const RunConfig& config, std::ostream& log)
{
  config.validate();
  const JointDataset joint = read_dataset(config.paths.data);
  const std::optional<Vector> y_star = resolve_y_star(config);
  if (y_star && y_star->size() != joint.y_dim) {
    throw InvalidArgument("y_star has dimension " + std::to_string(y_star->size()) +
                          " but the data has y_dim " + std::to_string(joint.y_dim));
  }
  const FlowFit fit = fit_flow_detailed(joint, config.flow, y_star);
  const FlowModel& model = fit.model;
  const std::string& path = config.paths.model;
  ensure_parent(path);
  save_model(path, model);

  const Index steps = static_cast<Index>(model.diagnostics.size());
  RowMatrix diag(steps, 5);
  RowMatrix timing(steps, 2);
  for (Index t = 0; t < steps; ++t) {
    const StepDiagnostics& d = model.diagnostics[static_cast<std::size_t>(t)];
    diag.row(t) << static_cast<double>(t), d.max_displacement, d.gradient_norm,
      static_cast<double>(d.feature_count), d.median_bandwidth;
    timing.row(t) << static_cast<double>(t), d.wall_seconds;
  }
  const Json echo = { { "config", to_json(config) } };
  write_table(path + ".diagnostics.csv",
              { "step", "max_displacement", "gradient_norm", "feature_count", "median_bandwidth" },
              diag,
              echo);
  write_table(path + ".timing.csv", { "step", "wall_seconds" }, timing, echo);

  const Index m = model.y_dim;
  const Index d = model.x_dim;
  const SampleBatch reference(fit.initial_reference.samples(), m, d);
  write_batch(path + ".reference.csv", reference, config.flow.seed);
  extend_sidecar(path + ".reference.csv", echo);
  const SampleBatch pushed(fit.final_reference.samples(), m, d);
  write_batch(path + ".pushed.csv", pushed, config.flow.seed);
  extend_sidecar(path + ".pushed.csv", echo);
  if (fit.final_reference.marker_count() > 0) {
    Json meta = echo;
    meta["y_star"] = vector_json(*y_star);
    write_table(path + ".markers.csv", x_header(d), fit.final_reference.markers().rightCols(d), meta);
  }
  log << "fitted " << model.steps.size() << " steps (terminated by "
      << to_string(model.terminated_by) << "); model written to " << path << "\n";
}

void cmd_sample(const SampleRequest& request, std::ostream& log)
{
  if (request.n < 0) {
    throw InvalidArgument("--n must be >= 0");
  }
  const FlowModel model = load_model(request.model_path);
  const std::string ref_path =
    request.reference_path.empty() ? request.model_path + ".reference.csv" : request.reference_path;
  ensure_parent(request.out_path);
  Json meta = { { "model", request.model_path }, { "seed", request.seed }, { "n", request.n } };
  if (request.y_star) {
    if (!model.all_block_triangular()) {
      throw InvalidArgument("conditional sampling needs a model fitted with lambda = inf");
    }
    RowMatrix xs(request.n, model.x_dim);
    if (request.n > 0) {
      const SampleBatch reference = read_batch(ref_path);
      if (reference.x_dim() != model.x_dim) {
        throw InvalidArgument(ref_path + ": x dimension does not match the model");
      }
      Rng rng(request.seed, 31);
      for (Index i = 0; i < request.n; ++i) {
        xs.row(i) = reference.x_block().row(
          static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(reference.rows()))));
      }
    }
    const RowMatrix out = conditional_sample(model, *request.y_star, xs);
    meta["mode"] = "conditional";
    meta["y_star"] = vector_json(*request.y_star);
    write_table(request.out_path, x_header(model.x_dim), out, meta);
    log << "wrote " << out.rows() << " conditional samples to " << request.out_path << "\n";
    return;
  }
  const SampleBatch reference = read_batch(ref_path);
  if (request.n > reference.rows()) {
    throw InvalidArgument("--n exceeds the " + std::to_string(reference.rows()) +
                          " stored reference rows");
  }
  const Index rows = request.n == 0 ? reference.rows() : request.n;
  const SampleBatch input(reference.points().topRows(rows), reference.y_dim(), reference.x_dim());
  const SampleBatch out = push_forward(model, input);
  meta["mode"] = "joint";
  write_batch(request.out_path, out, request.seed);
  extend_sidecar(request.out_path, meta);
  log << "pushed " << rows << " reference rows to " << request.out_path << "\n";
}

void cmd_mcmc(const RunConfig& config, const std::string& out_path, std::ostream& log)
{
  config.validate();
  if (config.problem != ProblemKind::lotka_volterra) {
    throw InvalidArgument("problem: mcmc is only defined for lotka_volterra");
  }
  const std::optional<Vector> y_star = resolve_y_star(config);
  if (!y_star) {
    throw InvalidArgument("y_star: required for mcmc");
  }
  const Chain chain = lv_posterior_mcmc(*y_star, config.lotka_volterra, config.mcmc);
  RowMatrix table(chain.samples.rows(), 5);
  table.leftCols(4) = chain.samples;
  table.col(4) = chain.log_posts;
  ensure_parent(out_path);
  Json meta;
  meta["acceptance_rate"] = double_to_json(chain.acceptance_rate);
  meta["accepted"] = chain.accepted;
  meta["samples"] = chain.samples.rows();
  meta["config"] = to_json(config);
  write_table(out_path, { "alpha", "beta", "gamma", "delta", "log_post" }, table, meta);
  log << "mcmc: " << chain.samples.rows() << " samples, acceptance rate "
      << format_double(chain.acceptance_rate) << "\n";
}

namespace {

Json evaluate_banana(const RunConfig& config, const EvaluateInputs& in, std::ostream& log)
{
  const std::optional<Vector> y_star = resolve_y_star(config);
  if (!y_star || y_star->size() != 1) {
    throw InvalidArgument("y_star: banana evaluation needs a scalar y*");
  }
  if (in.samples.empty() || in.data.empty()) {
    throw InvalidArgument("banana evaluation needs --samples and --data");
  }
  const double ys = (*y_star)(0);
  const Vector grid = report_grid(config);
  const Vector truth = banana_conditional_pdf(grid, ys);
  const CsvTable samples = read_csv(in.samples);
  if (samples.values.cols() != 1) {
    throw InvalidArgument(in.samples + ": expected one x column");
  }
  const JointDataset joint = read_dataset(in.data);
  if (joint.y_dim != 1 || joint.x_dim != 1) {
    throw InvalidArgument(in.data + ": expected banana data (y0, x0)");
  }
  const Vector xs = samples.values.col(0);
  const double bw_flow = silverman_bandwidth_1d(xs);
  const Vector flow_ckde = kde_on_grid(xs, grid, bw_flow);
  const CkdeBandwidths bw = silverman_ckde_bandwidths(joint);
  const Vector joint_ckde = nw_ckde(joint, *y_star, grid, bw.y, bw.x);

  Json report;
  report["problem"] = "banana";
  report["y_star"] = double_to_json(ys);
  report["l1_flow"] = double_to_json(l1_grid_error(flow_ckde, truth, grid));
  report["l1_ckde_joint"] = double_to_json(l1_grid_error(joint_ckde, truth, grid));
  report["flow_samples"] = xs.size();
  report["bandwidths"] = { { "flow_x", double_to_json(bw_flow) },
                           { "joint_y", double_to_json(bw.y) },
                           { "joint_x", double_to_json(bw.x) } };
  Json modes = Json::array();
  for (double v : local_maxima(flow_ckde, grid)) {
    modes.push_back(double_to_json(v));
  }
  report["flow_modes"] = modes;

  RowMatrix curves(grid.size(), 4);
  curves << grid, truth, flow_ckde, joint_ckde;
  std::vector<std::string> header{ "x", "truth", "flow_ckde", "joint_ckde" };

  if (!in.pushed.empty()) {
    const JointDataset pushed = read_dataset(in.pushed);
    const CkdeBandwidths pbw = silverman_ckde_bandwidths(pushed);
    const Vector pushed_ckde = nw_ckde(pushed, *y_star, grid, pbw.y, pbw.x);
    report["l1_ckde_pushed"] = double_to_json(l1_grid_error(pushed_ckde, truth, grid));
    RowMatrix wider(grid.size(), 5);
    wider << curves, pushed_ckde;
    curves = wider;
    header.push_back("pushed_ckde");
    if (!in.held_out.empty()) {
      const JointDataset held = read_dataset(in.held_out);
      const Index k = config.report.energy_subsample;
      Rng rng(config.seed, 41);
      report["energy_pushed_vs_held_out"] =
        test_json(energy_permutation_test(head_rows(pushed.pairs, k),
                                          head_rows(held.pairs, k),
                                          config.report.permutations,
                                          config.report.quantile,
                                          rng));
      Rng rng_joint(config.seed, 41);
      report["energy_joint_vs_held_out"] =
        test_json(energy_permutation_test(head_rows(joint.pairs, k),
                                          head_rows(held.pairs, k),
                                          config.report.permutations,
                                          config.report.quantile,
                                          rng_joint));
    }
  }
  write_table(in_dir(config, "banana_curves.csv"), header, curves, { { "y_star", ys } });
  log << "l1_flow " << format_double(report["l1_flow"].get<double>()) << ", l1_ckde_joint "
      << format_double(report["l1_ckde_joint"].get<double>()) << "\n";
  return report;
}

Json moments_json(const RowMatrix& s)
{
  const Vector mean = column_mean(s);
  const Vector sd = column_std(s);
  Json j;
  for (int k = 0; k < 4; ++k) {
    j[kLvNames[k]] = { { "mean", double_to_json(mean(k)) }, { "std", double_to_json(sd(k)) } };
  }
  return j;
}

Json evaluate_lv(const RunConfig& config, const EvaluateInputs& in, std::ostream& log)
{
  if (in.samples.empty() || in.chain.empty()) {
    throw InvalidArgument("lotka_volterra evaluation needs --samples and --chain");
  }
  const LVProblem& lv = config.lotka_volterra;
  const CsvTable flow = read_csv(in.samples);
  const CsvTable chain = read_csv(in.chain);
  if (flow.values.cols() != 4 || chain.values.cols() < 4) {
    throw InvalidArgument("lotka_volterra evaluation: expected 4 parameter columns");
  }
  const RowMatrix flow_s = flow.values;
  const RowMatrix mcmc_s = chain.values.leftCols(4);
  const Vector flow_mean = column_mean(flow_s);
  const Vector mcmc_mean = column_mean(mcmc_s);
  const Vector mcmc_sd = column_std(mcmc_s);

  Json report;
  report["problem"] = "lotka_volterra";
  report["flow"] = moments_json(flow_s);
  report["mcmc"] = moments_json(mcmc_s);
  Index within = 0;
  Json z = Json::object();
  for (int k = 0; k < 4; ++k) {
    const double score = std::abs(flow_mean(k) - mcmc_mean(k)) / mcmc_sd(k);
    z[kLvNames[k]] = double_to_json(score);
    within += score <= 2.0 ? 1 : 0;
  }
  report["mean_gap_in_mcmc_std"] = z;
  report["means_within_2_std"] = within;

  const Index nearest = config.report.nearest;
  const Index record = std::max<Index>(1, std::llround(config.report.trajectory_dt / lv.rk4_dt));
  const Index per_obs = static_cast<Index>(std::llround(lv.dt_obs / lv.rk4_dt));
  std::vector<std::array<double, 5>> rows;
  auto trajectories = [&](const RowMatrix& all, int method, Json& out) {
    // repeated rows (resampled reference x, rejected MCMC moves) would fill the nearest set
    const RowMatrix s = distinct_rows(all);
    const std::vector<Index> idx = nearest_to_mean(s, std::min(nearest, s.rows()));
    RowMatrix at_obs(static_cast<Index>(idx.size()), lv.obs_dim());
    Index oscillatory = 0;
    Index bounded = 0;
    Json params = Json::array();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const LVParams th{ s(idx[r], 0), s(idx[r], 1), s(idx[r], 2), s(idx[r], 3) };
      params.push_back({ th[0], th[1], th[2], th[3] });
      Trajectory tr;
      try {
        tr = lv_simulate(th, lv, 1);
      } catch (const NumericalError&) {
        at_obs.row(static_cast<Index>(r)).setConstant(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      for (Index t = 0; t < tr.times.size(); t += record) {
        rows.push_back({ static_cast<double>(method), static_cast<double>(r), tr.times(t),
                         tr.states(t, 0), tr.states(t, 1) });
      }
      for (Index k = 0; k < lv.n_obs; ++k) {
        at_obs(static_cast<Index>(r), 2 * k) = tr.states((k + 1) * per_obs, 0);
        at_obs(static_cast<Index>(r), 2 * k + 1) = tr.states((k + 1) * per_obs, 1);
      }
      oscillatory += non_monotone(tr.states.col(0)) && non_monotone(tr.states.col(1)) ? 1 : 0;
      bounded += tr.states.allFinite() && tr.states.maxCoeff() < 1e4 ? 1 : 0;
    }
    out = { { "parameters", params },
            { "oscillatory", oscillatory },
            { "bounded", bounded },
            { "count", static_cast<Index>(idx.size()) } };
    return at_obs;
  };
  Json flow_traj;
  Json mcmc_traj;
  const RowMatrix flow_obs = trajectories(flow_s, 0, flow_traj);
  const RowMatrix mcmc_obs = trajectories(mcmc_s, 1, mcmc_traj);
  const Vector flow_env = envelope_width(flow_obs);
  const Vector mcmc_env = envelope_width(mcmc_obs);
  Index narrower = 0;
  for (Index k = 0; k < flow_env.size(); ++k) {
    narrower += mcmc_env(k) <= flow_env(k) ? 1 : 0;
  }
  report["nearest_flow"] = flow_traj;
  report["nearest_mcmc"] = mcmc_traj;
  report["envelope_flow"] = vector_json(flow_env);
  report["envelope_mcmc"] = vector_json(mcmc_env);
  report["mcmc_envelope_not_wider"] = narrower;

  RowMatrix traj(static_cast<Index>(rows.size()), 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int c = 0; c < 5; ++c) {
      traj(static_cast<Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
    }
  }
  write_table(in_dir(config, "lv_trajectories.csv"),
              { "method", "rank", "time", "p1", "p2" },
              traj,
              { { "method_codes", { { "0", "flow" }, { "1", "mcmc" } } } });
  RowMatrix table(4, 4);
  const Vector flow_sd = column_std(flow_s);
  for (int k = 0; k < 4; ++k) {
    table.row(k) << flow_mean(k), flow_sd(k), mcmc_mean(k), mcmc_sd(k);
  }
  write_table(in_dir(config, "lv_posterior_moments.csv"),
              { "flow_mean", "flow_std", "mcmc_mean", "mcmc_std" },
              table,
              { { "rows", { "alpha", "beta", "gamma", "delta" } } });
  log << "flow means within 2 MCMC std: " << within << "/4; MCMC envelope not wider in "
      << narrower << "/" << flow_env.size() << " coordinates\n";
  return report;
}

} // namespace

Json cmd_evaluate(const RunConfig& config, const EvaluateInputs& inputs, std::ostream& log)
{
  config.validate();
  Json report;
  if (!inputs.a.empty() || !inputs.b.empty()) {
    if (inputs.a.empty() || inputs.b.empty()) {
      throw InvalidArgument("--a and --b must be given together");
    }
    const CsvTable a = read_csv(inputs.a);
    const CsvTable b = read_csv(inputs.b);
    if (a.values.cols() != b.values.cols()) {
      throw InvalidArgument("--a and --b have different column counts");
    }
    Rng rng(config.seed, 41);
    report["energy"] = test_json(energy_permutation_test(head_rows(a.values, config.report.energy_subsample),
                                                         head_rows(b.values, config.report.energy_subsample),
                                                         config.report.permutations,
                                                         config.report.quantile,
                                                         rng));
    report["energy_distance"] = double_to_json(energy_distance(a.values, b.values));
  } else if (config.problem == ProblemKind::banana) {
    report = evaluate_banana(config, inputs, log);
  } else if (config.problem == ProblemKind::lotka_volterra) {
    report = evaluate_lv(config, inputs, log);
  } else {
    throw InvalidArgument("evaluate: custom_csv needs --a and --b");
  }
  report["config"] = to_json(config);
  write_text_file(in_dir(config, "report.json"), report.dump(2) + "\n");
  return report;
}

int run_cli(int argc, char** argv)
{
  CLI::App app{ "Conditional sampling with nonparametric transport flows" };
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads for numerical kernels (0 = runtime default)")
    ->capture_default_str();

  std::string config_path;
  std::string problem;
  std::optional<std::uint64_t> seed;
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)");
    sub->add_option("--seed", seed, "Seed; overrides the config (default: OTFLOW_SEED, else 0)");
  };

  auto* gen = app.add_subcommand("generate", "Draw joint samples of a benchmark problem");
  add_common(gen);
  Index gen_n = -1;
  Index held_n = 0;
  std::string held_out;
  gen->add_option("--problem", problem, "banana | lotka_volterra (overrides the config)");
  gen->add_option("--n", gen_n, "Joint rows (default: data.n of the config)");
  gen->add_option("--out", out_path, "Output CSV")->required();
  gen->add_option("--held-out-n", held_n, "Rows of an independent held-out set")->capture_default_str();
  gen->add_option("--held-out-out", held_out, "Output CSV of the held-out set");

  auto* fit = app.add_subcommand("fit", "Fit a flow to joint samples");
  add_common(fit);
  fit->add_option("--data", data_path, "Joint data CSV (overrides paths.data)");
  fit->add_option("--model", model_path, "Output model JSON (overrides paths.model)");

  auto* smp = app.add_subcommand("sample", "Sample from a fitted flow");
  SampleRequest req;
  std::vector<double> y_star_values;
  smp->add_option("--model", req.model_path, "Model JSON")->required();
  smp->add_option("--y-star", y_star_values, "Conditioning value(s); omit for joint mode");
  smp->add_option("--n", req.n, "Samples (joint mode: 0 pushes the whole reference)")
    ->capture_default_str();
  smp->add_option("--seed", seed, "Seed (default: OTFLOW_SEED, else 0)");
  smp->add_option("--out", req.out_path, "Output CSV")->required();
  smp->add_option("--reference", req.reference_path, "Reference CSV (default: <model>.reference.csv)");

  auto* mc = app.add_subcommand("mcmc", "Random-walk Metropolis on the Lotka-Volterra posterior");
  add_common(mc);
  mc->add_option("--out", out_path, "Chain CSV (default: paths.chain)");

  auto* ev = app.add_subcommand("evaluate", "Compute metrics and plot data");
  add_common(ev);
  EvaluateInputs inputs;
  ev->add_option("--samples", inputs.samples, "Flow samples CSV");
  ev->add_option("--data", inputs.data, "Joint data CSV");
  ev->add_option("--held-out", inputs.held_out, "Held-out joint CSV");
  ev->add_option("--pushed", inputs.pushed, "Pushed-forward reference CSV");
  ev->add_option("--chain", inputs.chain, "MCMC chain CSV");
  ev->add_option("--a", inputs.a, "First sample CSV of a two-sample comparison");
  ev->add_option("--b", inputs.b, "Second sample CSV of a two-sample comparison");
  ev->add_option("--out-dir", out_dir, "Report directory (overrides paths.out_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
#ifdef _OPENMP
    if (threads > 0) {
      omp_set_num_threads(threads);
    }
#endif
    auto load = [&](std::optional<ProblemKind> kind) {
      RunConfig c;
      if (!config_path.empty()) {
        c = load_run_config(config_path);
        if (kind && *kind != c.problem) {
          throw InvalidArgument("--problem conflicts with the config's problem");
        }
      } else {
        c = RunConfig::defaults(kind.value_or(ProblemKind::banana), environment_seed());
      }
      if (seed) {
        c.seed = *seed;
        c.flow.seed = *seed;
        c.mcmc.seed = *seed;
      }
      if (!data_path.empty()) {
        c.paths.data = data_path;
      }
      if (!model_path.empty()) {
        c.paths.model = model_path;
      }
      if (!out_dir.empty()) {
        c.paths.out_dir = out_dir;
      }
      c.validate();
      return c;
    };
    if (gen->parsed()) {
      std::optional<ProblemKind> kind;
      if (!problem.empty()) {
        kind = problem_kind_from_string(problem);
      }
      RunConfig c = load(kind);
      if (gen_n >= 0) {
        c.data.n = gen_n;
      }
      cmd_generate(c, out_path, held_n, held_out, std::cerr);
    } else if (fit->parsed()) {
      cmd_fit(load(std::nullopt), std::cerr);
    } else if (smp->parsed()) {
      req.seed = seed.value_or(environment_seed());
      if (!y_star_values.empty()) {
        req.y_star = Eigen::Map<const Vector>(y_star_values.data(),
                                              static_cast<Index>(y_star_values.size()));
      }
      cmd_sample(req, std::cerr);
    } else if (mc->parsed()) {
      const RunConfig c = load(std::nullopt);
      cmd_mcmc(c, out_path.empty() ? c.paths.chain : out_path, std::cerr);
    } else if (ev->parsed()) {
      cmd_evaluate(load(std::nullopt), inputs, std::cerr);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

} // namespace otflow::app
