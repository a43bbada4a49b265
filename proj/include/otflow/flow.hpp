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

#include "otflow/features.hpp"
#include "otflow/sample.hpp"
#include "otflow/transform.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace otflow {

//! One flow step z -> z - sum_j beta_j grad_lambda F_j(z).
struct ElementaryMap
{
  FeatureSet features;
  Vector beta;
  Penalty lambda = Penalty::infinite();

  void validate() const;
};

enum class ReferenceSource
{
  //! Split the joint rows into reference source and target.
  split,
  //! Use every joint row both as target and as the source of the product
  //! reference marginals.
  reuse
};

enum class Preprocess
{
  none,
  standardize,
  log_standardize
};

enum class Termination
{
  threshold,
  t_max
};

const char* to_string(ReferenceSource v);
const char* to_string(Preprocess v);
const char* to_string(Termination v);
ReferenceSource reference_source_from_string(const std::string& s);
Preprocess preprocess_from_string(const std::string& s);
Termination termination_from_string(const std::string& s);

struct FlowConfig
{
  //! Stop once every row moves less than this in one step.
  double epsilon = 1e-6;
  Index t_max = 1000;
  //! Features per step.
  Index p = 10;
  double n_p = 0.01;
  double m0 = 10.0;
  //! Width of the bandwidth schedule; <= 0 means t_max / 10.
  double sigma = 0.0;
  Index kde_refresh_interval = 200;
  //! Support rows kept by the reference KDE (0 keeps all).
  Index kde_max_support = 2000;
  //! Ridge tau = ridge * trace(G) / p.
  double ridge = 1e-3;
  //! Multiplies the Newton coefficients.
  double damping = 1.0;
  //! y penalty; +inf gives block-triangular maps.
  double lambda = std::numeric_limits<double>::infinity();
  //! Fraction of centers placed at y* (only with a y*).
  double locality_weight = 0.0;
  //! Localized center jitter, in units of the previous step's median bandwidth.
  double jitter_factor = 0.1;
  //! Share of uniformly drawn centers taken from the reference rows.
  double reference_share = 0.5;
  //! Exponent dimension of the bandwidth rule; 0 uses the ambient dimension.
  double bandwidth_dim = 0.0;
  FeatureKind feature_kind = FeatureKind::erf_radial;

  ReferenceSource reference_source = ReferenceSource::split;
  double target_fraction = 0.5;
  //! Product reference rows; 0 uses the source row count.
  Index reference_size = 0;
  ProductMode reference_mode = ProductMode::permutation;
  //! Markers (y*, x) appended when a y* is given; x drawn from the data.
  Index marker_count = 0;
  Preprocess preprocess = Preprocess::none;

  std::uint64_t seed = 0;

  void validate() const;
  double effective_sigma() const { return sigma > 0.0 ? sigma : static_cast<double>(t_max) / 10.0; }
};

struct StepDiagnostics
{
  double max_displacement = 0.0;
  double gradient_norm = 0.0;
  Index feature_count = 0;
  double median_bandwidth = 0.0;
  double wall_seconds = 0.0;
};

//! T = T_K o ... o T_1 acting in the coordinates of `transform`.
struct FlowModel
{
  std::vector<ElementaryMap> steps;
  Index y_dim = 0;
  Index x_dim = 1;
  ColumnTransform transform;
  std::vector<StepDiagnostics> diagnostics;
  Termination terminated_by = Termination::t_max;
  FlowConfig config;

  bool all_block_triangular() const;
};

// ---------------------------------------------------------------------------
// Newton system
// ---------------------------------------------------------------------------

//! g_j = mean_i F_j(z_i) over non-marker reference rows minus
//! mean_i F_j(z'_i) over target rows.
Vector objective_gradient(const FeatureSet& features,
                          const SampleBatch& ref_batch,
                          const SampleBatch& target_batch);

//! G_jk = (1/M) sum_i <grad F_j(z'_i), grad_lambda F_k(z'_i)>; symmetric PSD.
Eigen::MatrixXd gram_matrix(const FeatureSet& features,
                            const SampleBatch& target_batch,
                            const Penalty& lambda);

//! damping * (G + ridge I)^{-1} g. Throws SolverError for a singular system
//! without ridge.
Vector newton_coefficients(const Vector& g,
                           const Eigen::MatrixXd& gram,
                           double ridge,
                           double damping);

// ---------------------------------------------------------------------------
// Map application
// ---------------------------------------------------------------------------

//! sum_j beta_j grad_lambda F_j(z_i) for every row.
RowMatrix elementary_displacement(const ElementaryMap& map,
                                  const Eigen::Ref<const RowMatrix>& points,
                                  Index y_dim);

//! Applies the map to `points` in place and returns the largest row
//! displacement norm. Throws NumericalError naming the first non-finite row.
double apply_elementary_inplace(const ElementaryMap& map,
                                Eigen::Ref<RowMatrix> points,
                                Index y_dim);

SampleBatch apply_elementary(const ElementaryMap& map, const SampleBatch& batch);

//! Applies every step in order, in model coordinates (no transform).
void push_forward_inplace(const FlowModel& model, Eigen::Ref<RowMatrix> points);

//! Full push-forward in data coordinates. With only infinite-penalty steps the
//! y columns of the result are copied from the input.
SampleBatch push_forward(const FlowModel& model, const SampleBatch& batch);

//! x blocks of push_forward applied to rows (y_star, x_i).
RowMatrix conditional_sample(const FlowModel& model,
                             const Eigen::Ref<const Vector>& y_star,
                             const Eigen::Ref<const RowMatrix>& x_samples);

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

struct FlowInputs
{
  SampleBatch reference;
  SampleBatch target;
};

//! Reference/target construction from joint samples: split or reuse, product
//! reference and markers. Coordinates are those of the data.
FlowInputs prepare_flow_inputs(const JointDataset& joint,
                               const FlowConfig& config,
                               const std::optional<Vector>& y_star);

struct FitHooks
{
  //! Called before every step with the current reference (model coordinates).
  std::function<void(Index step, const SampleBatch& reference)> before_step;
};

struct FlowFit
{
  FlowModel model;
  //! Reference in data coordinates, before and after the flow.
  SampleBatch initial_reference;
  SampleBatch final_reference;
  SampleBatch target;
};

//! Runs the flow on an explicit reference and target (data coordinates).
FlowFit fit_flow_batches(const SampleBatch& reference,
                         const SampleBatch& target,
                         const FlowConfig& config,
                         const std::optional<Vector>& y_star = std::nullopt,
                         const FitHooks& hooks = {});

//! prepare_flow_inputs followed by fit_flow_batches.
FlowFit fit_flow_detailed(const JointDataset& joint,
                          const FlowConfig& config,
                          const std::optional<Vector>& y_star = std::nullopt,
                          const FitHooks& hooks = {});

FlowModel fit_flow(const JointDataset& joint,
                   const FlowConfig& config,
                   const std::optional<Vector>& y_star = std::nullopt);

} // namespace otflow
