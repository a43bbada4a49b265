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

#include "otflow/flow.hpp"

#include "otflow/kde.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace otflow {

const char* to_string(ReferenceSource v)
{
  return v == ReferenceSource::split ? "split" : "reuse";
}

const char* to_string(Preprocess v)
{
  switch (v) {
    case Preprocess::none:
      return "none";
    case Preprocess::standardize:
      return "standardize";
    case Preprocess::log_standardize:
      return "log_standardize";
  }
  return "none";
}

const char* to_string(Termination v)
{
  return v == Termination::threshold ? "threshold" : "t_max";
}

ReferenceSource reference_source_from_string(const std::string& s)
{
  if (s == "split") {
    return ReferenceSource::split;
  }
  if (s == "reuse") {
    return ReferenceSource::reuse;
  }
  throw InvalidArgument("unknown reference_source '" + s + "'");
}

Preprocess preprocess_from_string(const std::string& s)
{
  if (s == "none") {
    return Preprocess::none;
  }
  if (s == "standardize") {
    return Preprocess::standardize;
  }
  if (s == "log_standardize") {
    return Preprocess::log_standardize;
  }
  throw InvalidArgument("unknown preprocess '" + s + "'");
}

Termination termination_from_string(const std::string& s)
{
  if (s == "threshold") {
    return Termination::threshold;
  }
  if (s == "t_max") {
    return Termination::t_max;
  }
  throw InvalidArgument("unknown termination '" + s + "'");
}

void FlowConfig::validate() const
{
  auto fail = [](const std::string& key, const std::string& why) {
    throw InvalidArgument("flow." + key + ": " + why);
  };
  if (!(epsilon > 0.0)) fail("epsilon", "must be > 0");
  if (t_max < 1) fail("t_max", "must be >= 1");
  if (p < 1) fail("p", "must be >= 1");
  if (!(n_p > 0.0)) fail("n_p", "must be > 0");
  if (!(m0 > 0.0)) fail("m0", "must be > 0");
  if (kde_refresh_interval < 1) fail("kde_refresh_interval", "must be >= 1");
  if (kde_max_support < 0) fail("kde_max_support", "must be >= 0");
  if (!(ridge >= 0.0)) fail("ridge", "must be >= 0");
  if (!(damping > 0.0 && damping <= 1.0)) fail("damping", "must lie in (0, 1]");
  if (!(lambda > 0.0)) fail("lambda", "must be > 0");
  if (!(locality_weight >= 0.0 && locality_weight <= 1.0)) fail("locality_weight", "must lie in [0, 1]");
  if (!(jitter_factor >= 0.0)) fail("jitter_factor", "must be >= 0");
  if (!(reference_share >= 0.0 && reference_share <= 1.0)) fail("reference_share", "must lie in [0, 1]");
  if (!(bandwidth_dim >= 0.0)) fail("bandwidth_dim", "must be >= 0");
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) fail("target_fraction", "must lie in (0, 1)");
  if (reference_size < 0) fail("reference_size", "must be >= 0");
  if (marker_count < 0) fail("marker_count", "must be >= 0");
}

bool FlowModel::all_block_triangular() const
{
  return std::all_of(steps.begin(), steps.end(), [](const ElementaryMap& s) {
    return s.lambda.is_infinite();
  });
}

void ElementaryMap::validate() const
{
  if (beta.size() != features.size()) {
    throw InvalidArgument("ElementaryMap: beta has " + std::to_string(beta.size()) +
                          " entries for " + std::to_string(features.size()) +
                          " features");
  }
}

namespace {

void check_batches(const FeatureSet& features, const SampleBatch& batch, const char* what)
{
  if (batch.rows() < 1) {
    throw InvalidArgument(std::string(what) + " batch is empty");
  }
  if (features.dim() != batch.dim()) {
    throw InvalidArgument(std::string(what) + " batch dimension " +
                          std::to_string(batch.dim()) + " does not match features (" +
                          std::to_string(features.dim()) + ")");
  }
}

} // namespace

Vector objective_gradient(const FeatureSet& features,
                          const SampleBatch& ref_batch,
                          const SampleBatch& target_batch)
{
  check_batches(features, ref_batch, "reference");
  check_batches(features, target_batch, "target");
  if (ref_batch.sample_count() < 1) {
    throw InvalidArgument("reference batch has no non-marker rows");
  }
  const Index p = features.size();
  Vector g(p);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < p; ++j) {
    g(j) = feature_values(features[j], ref_batch.samples()).mean() -
           feature_values(features[j], target_batch.points()).mean();
  }
  return g;
}

Eigen::MatrixXd gram_matrix(const FeatureSet& features,
                            const SampleBatch& target_batch,
                            const Penalty& lambda)
{
  check_batches(features, target_batch, "target");
  const Index p = features.size();
  const Index rows = target_batch.rows();
  const Index m = target_batch.y_dim();
  const Index n = target_batch.dim();
  // with an infinite penalty only the x block contributes
  const Index first = lambda.is_infinite() ? m : 0;
  const Index width = n - first;
  const double y_weight = lambda.is_infinite() ? 0.0 : std::sqrt(lambda.y_scale());

  Eigen::MatrixXd stacked(rows * width, p);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < p; ++j) {
    const auto grads = feature_gradients(features[j], target_batch.points());
    for (Index i = 0; i < rows; ++i) {
      for (Index k = first; k < n; ++k) {
        const double w = k < m ? y_weight : 1.0;
        stacked(i * width + (k - first), j) = w * grads.coeff(i) * grads.offsets(i, k);
      }
    }
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(stacked.transpose(),
                                                  1.0 / static_cast<double>(rows));
  return gram.selfadjointView<Eigen::Lower>();
}

Vector newton_coefficients(const Vector& g,
                           const Eigen::MatrixXd& gram,
                           double ridge,
                           double damping)
{
  const Index p = g.size();
  if (gram.rows() != p || gram.cols() != p) {
    throw InvalidArgument("newton_coefficients: Gram matrix is " +
                          std::to_string(gram.rows()) + "x" +
                          std::to_string(gram.cols()) + " for " +
                          std::to_string(p) + " coefficients");
  }
  if (!(ridge >= 0.0)) {
    throw InvalidArgument("newton_coefficients: ridge must be >= 0");
  }
  if (!(damping > 0.0) || !std::isfinite(damping)) {
    throw InvalidArgument("newton_coefficients: damping must be positive");
  }
  if ((g.array() == 0.0).all()) {
    return Vector::Zero(p);
  }
  Eigen::MatrixXd system = gram;
  system.diagonal().array() += ridge;

  Vector beta;
  bool solved = false;
  if (ridge > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() == Eigen::Success) {
      beta = llt.solve(g);
      solved = true;
    }
  }
  if (!solved) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
    // rcond() skips zero pivots, so the pivot spread is checked as well
    const Vector d = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success ||
        (ridge == 0.0 && (!(ldlt.rcond() > 1e-13) || !(d.minCoeff() > 1e-13 * d.maxCoeff())))) {
      throw SolverError("Newton system is singular; use a ridge > 0");
    }
    beta = ldlt.solve(g);
  }
  if (!beta.allFinite()) {
    throw SolverError("Newton system produced non-finite coefficients; use a larger ridge");
  }
  return damping * beta;
}

namespace {

// Displacement of one row, accumulated over features in order.
template <typename RowIn, typename RowOut>
void row_potential_gradient(const ElementaryMap& map,
                      const RowIn& z,
                      Index y_dim,
                      RowOut& out)
{
  const Index n = z.size();
  const Index first = map.lambda.is_infinite() ? y_dim : 0;
  out.setZero();
  for (Index j = 0; j < map.features.size(); ++j) {
    const Feature& f = map.features[j];
    double r2 = 0.0;
    for (Index k = 0; k < n; ++k) {
      const double dk = z(k) - f.center(k);
      r2 += dk * dk;
    }
    if (r2 == 0.0) {
      continue;
    }
    const double c = map.beta(j) * radial_slope_over_r(f.kind, std::sqrt(r2), f.bandwidth);
    for (Index k = first; k < n; ++k) {
      out(k) += c * (z(k) - f.center(k));
    }
  }
  if (!map.lambda.is_infinite() && y_dim > 0) {
    out.head(y_dim) *= map.lambda.y_scale();
  }
}

} // namespace

RowMatrix elementary_displacement(const ElementaryMap& map,
                                  const Eigen::Ref<const RowMatrix>& points,
                                  Index y_dim)
{
  map.validate();
  if (map.features.dim() != points.cols()) {
    throw InvalidArgument("elementary_displacement: dimension mismatch");
  }
  RowMatrix out(points.rows(), points.cols());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < points.rows(); ++i) {
    Vector d(points.cols());
    row_potential_gradient(map, points.row(i), y_dim, d);
    out.row(i) = -d.transpose();
  }
  return out;
}

double apply_elementary_inplace(const ElementaryMap& map,
                                Eigen::Ref<RowMatrix> points,
                                Index y_dim)
{
  map.validate();
  if (map.features.dim() != points.cols()) {
    throw InvalidArgument("apply_elementary: dimension mismatch");
  }
  const Index rows = points.rows();
  const Index n = points.cols();
  const Index first = map.lambda.is_infinite() ? y_dim : 0;
  double max_disp = 0.0;
  Index bad_row = -1;
#pragma omp parallel for schedule(static) reduction(max : max_disp)
  for (Index i = 0; i < rows; ++i) {
    Vector d(n);
    row_potential_gradient(map, points.row(i), y_dim, d);
    for (Index k = first; k < n; ++k) {
      points(i, k) -= d(k);
    }
    if (!points.row(i).allFinite() || !d.allFinite()) {
#pragma omp critical
      if (bad_row < 0 || i < bad_row) {
        bad_row = i;
      }
    }
    max_disp = std::max(max_disp, d.norm());
  }
  if (bad_row >= 0) {
    throw NumericalError("elementary map produced a non-finite value in row " +
                           std::to_string(bad_row),
                         bad_row);
  }
  return max_disp;
}

SampleBatch apply_elementary(const ElementaryMap& map, const SampleBatch& batch)
{
  RowMatrix points = batch.points();
  apply_elementary_inplace(map, points, batch.y_dim());
  return SampleBatch(std::move(points), batch.y_dim(), batch.x_dim(), batch.marker_count());
}

void push_forward_inplace(const FlowModel& model, Eigen::Ref<RowMatrix> points)
{
  for (std::size_t t = 0; t < model.steps.size(); ++t) {
    try {
      apply_elementary_inplace(model.steps[t], points, model.y_dim);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at step " + std::to_string(t),
                           e.row(),
                           static_cast<Index>(t));
    }
  }
}

SampleBatch push_forward(const FlowModel& model, const SampleBatch& batch)
{
  if (batch.y_dim() != model.y_dim || batch.x_dim() != model.x_dim) {
    throw InvalidArgument("push_forward: batch dimensions do not match the model");
  }
  const bool identity = model.transform.dim() == 0 || model.transform.is_identity();
  RowMatrix work = identity ? batch.points() : model.transform.forward(batch.points());
  push_forward_inplace(model, work);
  if (identity) {
    return SampleBatch(std::move(work), batch.y_dim(), batch.x_dim(), batch.marker_count());
  }
  RowMatrix out(batch.rows(), batch.dim());
  if (model.all_block_triangular()) {
    out.leftCols(model.y_dim) = batch.y_block();
    out.rightCols(model.x_dim) =
      model.transform.inverse_columns(work.rightCols(model.x_dim), model.y_dim);
  } else {
    out = model.transform.inverse(work);
  }
  return SampleBatch(std::move(out), batch.y_dim(), batch.x_dim(), batch.marker_count());
}

RowMatrix conditional_sample(const FlowModel& model,
                             const Eigen::Ref<const Vector>& y_star,
                             const Eigen::Ref<const RowMatrix>& x_samples)
{
  if (!model.all_block_triangular()) {
    throw InvalidArgument(
      "conditional_sample requires a model whose steps all use an infinite penalty");
  }
  if (y_star.size() != model.y_dim) {
    throw InvalidArgument("conditional_sample: y_star has dimension " +
                          std::to_string(y_star.size()) + ", expected " +
                          std::to_string(model.y_dim));
  }
  if (x_samples.rows() == 0) {
    return RowMatrix(0, model.x_dim);
  }
  if (x_samples.cols() != model.x_dim) {
    throw InvalidArgument("conditional_sample: x samples have the wrong dimension");
  }
  RowMatrix rows(x_samples.rows(), model.y_dim + model.x_dim);
  rows.leftCols(model.y_dim) = y_star.transpose().replicate(x_samples.rows(), 1);
  rows.rightCols(model.x_dim) = x_samples;
  const SampleBatch pushed =
    push_forward(model, SampleBatch(rows, model.y_dim, model.x_dim));
  if (pushed.y_block() != rows.leftCols(model.y_dim)) {
    throw NumericalError("conditional_sample: y block changed under the flow");
  }
  return pushed.x_block();
}

FlowInputs prepare_flow_inputs(const JointDataset& joint,
                               const FlowConfig& config,
                               const std::optional<Vector>& y_star)
{
  config.validate();
  joint.validate();
  Rng rng(config.seed, 1);
  JointDataset source = joint;
  JointDataset target = joint;
  if (config.reference_source == ReferenceSource::split) {
    std::tie(source, target) = split_dataset(joint, config.target_fraction, rng);
  }
  const Index size = config.reference_size > 0 ? config.reference_size : source.rows();
  SampleBatch reference = build_product_reference(source, size, config.reference_mode, rng);
  if (y_star && config.marker_count > 0) {
    RowMatrix xs(config.marker_count, joint.x_dim);
    for (Index i = 0; i < config.marker_count; ++i) {
      xs.row(i) = source.pairs.row(static_cast<Index>(rng.uniform_index(source.rows())))
                    .tail(joint.x_dim);
    }
    reference = append_markers(reference, xs, *y_star);
  }
  return { std::move(reference), target.as_batch() };
}

namespace {

double median(std::vector<double> v)
{
  if (v.empty()) {
    return 0.0;
  }
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

ColumnTransform make_transform(Preprocess mode, const SampleBatch& target)
{
  const auto dim = static_cast<std::size_t>(target.dim());
  switch (mode) {
    case Preprocess::none:
      return ColumnTransform::identity(target.dim());
    case Preprocess::standardize:
      return ColumnTransform::fit(target.points(), std::vector<bool>(dim, false), true);
    case Preprocess::log_standardize:
      return ColumnTransform::fit(target.points(), std::vector<bool>(dim, true), true);
  }
  return ColumnTransform::identity(target.dim());
}

} // namespace

FlowFit fit_flow_batches(const SampleBatch& reference,
                         const SampleBatch& target,
                         const FlowConfig& config,
                         const std::optional<Vector>& y_star,
                         const FitHooks& hooks)
{
  config.validate();
  if (reference.y_dim() != target.y_dim() || reference.x_dim() != target.x_dim()) {
    throw InvalidArgument("fit_flow: reference and target dimensions differ");
  }
  if (target.rows() < 2 || reference.sample_count() < 2) {
    throw InvalidArgument("fit_flow: need at least 2 reference and 2 target rows");
  }
  if (y_star && y_star->size() != reference.y_dim()) {
    throw InvalidArgument("fit_flow: y_star dimension mismatch");
  }
  const Index m = reference.y_dim();
  const Index n = reference.dim();

  FlowFit fit;
  FlowModel& model = fit.model;
  model.y_dim = m;
  model.x_dim = reference.x_dim();
  model.config = config;
  model.transform = make_transform(config.preprocess, target);
  const bool identity = model.transform.is_identity();

  SampleBatch work(identity ? reference.points() : model.transform.forward(reference.points()),
                   m,
                   reference.x_dim(),
                   reference.marker_count());
  const SampleBatch tgt(identity ? target.points() : model.transform.forward(target.points()),
                        m,
                        target.x_dim());
  std::optional<Vector> y_work;
  if (y_star) {
    y_work = model.transform.forward_columns(y_star->transpose(), 0).row(0).transpose();
  }

  const Penalty lambda(config.lambda);
  const Schedule schedule{ config.m0, static_cast<double>(config.t_max), config.effective_sigma() };
  const double exponent_dim =
    config.bandwidth_dim > 0.0 ? config.bandwidth_dim : static_cast<double>(n);
  const DensityEstimate mu_kde = kde_fit(tgt.points(), config.kde_max_support);
  DensityEstimate rho_kde;
  Rng rng(config.seed, 2);
  double last_median = -1.0;

  auto bandwidths_for = [&](const RowMatrix& centers, double m_t) {
    std::vector<double> alphas(static_cast<std::size_t>(centers.rows()));
    for (Index j = 0; j < centers.rows(); ++j) {
      alphas[static_cast<std::size_t>(j)] = bandwidth_for_center(
        centers.row(j).transpose(), rho_kde, mu_kde, config.n_p, exponent_dim, m_t);
    }
    return alphas;
  };

  model.terminated_by = Termination::t_max;
  for (Index t = 0; t < config.t_max; ++t) {
    if (hooks.before_step) {
      hooks.before_step(t, work);
    }
    const auto start = std::chrono::steady_clock::now();
    if (t % config.kde_refresh_interval == 0) {
      rho_kde = kde_fit(work.points(), config.kde_max_support);
    }
    const double m_t = schedule_m(static_cast<double>(t), schedule);
    const bool local = y_work && config.locality_weight > 0.0;
    if (local && last_median < 0.0) {
      const RowMatrix probe =
        select_centers(work, tgt, config.p, std::nullopt, 0.0, {}, rng);
      last_median = median(bandwidths_for(probe, m_t));
    }
    CenterOptions options;
    options.reference_share = config.reference_share;
    options.jitter_sd = local ? config.jitter_factor * last_median : 0.0;
    const RowMatrix centers = select_centers(
      work, tgt, config.p, y_work, local ? config.locality_weight : 0.0, options, rng);
    const auto alphas = bandwidths_for(centers, m_t);

    std::vector<Feature> feats;
    feats.reserve(alphas.size());
    for (Index j = 0; j < centers.rows(); ++j) {
      feats.push_back(Feature{ config.feature_kind,
                               centers.row(j).transpose(),
                               alphas[static_cast<std::size_t>(j)] });
    }
    ElementaryMap map{ FeatureSet(std::move(feats)), Vector(), lambda };

    const Vector g = objective_gradient(map.features, work, tgt);
    const Eigen::MatrixXd gram = gram_matrix(map.features, tgt, lambda);
    const double tau = config.ridge * gram.trace() / static_cast<double>(config.p);
    try {
      map.beta = newton_coefficients(g, gram, tau, config.damping);
    } catch (const SolverError& e) {
      throw SolverError(std::string(e.what()) + " (step " + std::to_string(t) + ")");
    }

    double max_disp = 0.0;
    try {
      max_disp = apply_elementary_inplace(map, work.mutable_points(), m);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " at step " + std::to_string(t),
                           e.row(),
                           t);
    }

    StepDiagnostics diag;
    diag.max_displacement = max_disp;
    diag.gradient_norm = g.norm();
    diag.feature_count = config.p;
    diag.median_bandwidth = median(alphas);
    diag.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    last_median = diag.median_bandwidth;
    model.diagnostics.push_back(diag);
    model.steps.push_back(std::move(map));

    if (max_disp < config.epsilon) {
      model.terminated_by = Termination::threshold;
      break;
    }
  }

  fit.initial_reference = reference;
  fit.target = target;
  if (identity) {
    fit.final_reference = work;
  } else {
    RowMatrix out(reference.rows(), n);
    if (model.all_block_triangular()) {
      out.leftCols(m) = reference.y_block();
      out.rightCols(model.x_dim) =
        model.transform.inverse_columns(work.x_block(), m);
    } else {
      out = model.transform.inverse(work.points());
    }
    fit.final_reference = SampleBatch(std::move(out), m, model.x_dim, reference.marker_count());
  }
  return fit;
}

FlowFit fit_flow_detailed(const JointDataset& joint,
                          const FlowConfig& config,
                          const std::optional<Vector>& y_star,
                          const FitHooks& hooks)
{
  const FlowInputs inputs = prepare_flow_inputs(joint, config, y_star);
  return fit_flow_batches(inputs.reference, inputs.target, config, y_star, hooks);
}

FlowModel fit_flow(const JointDataset& joint,
                   const FlowConfig& config,
                   const std::optional<Vector>& y_star)
{
  return fit_flow_detailed(joint, config, y_star).model;
}

} // namespace otflow
