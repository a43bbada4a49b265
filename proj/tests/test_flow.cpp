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

#include "otflow/c_transform.hpp"
#include "otflow/flow.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/erf.hpp>
#include <gtest/gtest.h>

using namespace otflow;

namespace {

RowMatrix normal_rows(Index n, Index dim, Rng& rng, double shift = 0.0)
{
  RowMatrix out(n, dim);
  for (Index i = 0; i < out.size(); ++i) {
    out.data()[i] = shift + rng.normal();
  }
  return out;
}

FeatureSet random_features(Index p, Index dim, double alpha, Rng& rng)
{
  std::vector<Feature> fs;
  for (Index j = 0; j < p; ++j) {
    Vector c(dim);
    for (Index k = 0; k < dim; ++k) {
      c(k) = rng.normal();
    }
    fs.push_back(Feature{ FeatureKind::erf_radial, c, alpha * (0.5 + rng.uniform()) });
  }
  return FeatureSet(fs);
}

ElementaryMap random_map(Index p, Index dim, double lambda, Rng& rng)
{
  ElementaryMap map{ random_features(p, dim, 1.0, rng), Vector(p), Penalty(lambda) };
  for (Index j = 0; j < p; ++j) {
    map.beta(j) = 0.1 * rng.normal();
  }
  return map;
}

FlowModel random_model(Index steps, Index y_dim, Index x_dim, double lambda, Rng& rng)
{
  FlowModel model;
  model.y_dim = y_dim;
  model.x_dim = x_dim;
  model.transform = ColumnTransform::identity(y_dim + x_dim);
  for (Index t = 0; t < steps; ++t) {
    model.steps.push_back(random_map(4, y_dim + x_dim, lambda, rng));
  }
  return model;
}

} // namespace

TEST(ObjectiveGradient, IdenticalBatchesGiveZero)
{
  Rng rng(1, 0);
  const SampleBatch b(normal_rows(50, 2, rng), 1, 1);
  const FeatureSet fs = random_features(5, 2, 1.0, rng);
  EXPECT_EQ(objective_gradient(fs, b, b).norm(), 0.0);
}

TEST(ObjectiveGradient, SingleFeatureArithmetic)
{
  // inverse multiquadric: F = 0.7 at the reference row, 0.2 at the target row
  const double alpha = 1.0;
  const double r_ref = alpha * std::sqrt(1.0 / 0.49 - 1.0);
  const double r_tgt = alpha * std::sqrt(24.0);
  const FeatureSet fs({ Feature{ FeatureKind::inverse_multiquadric, Vector::Zero(1), alpha } });
  const SampleBatch ref(RowMatrix::Constant(1, 1, r_ref), 0, 1);
  const SampleBatch tgt(RowMatrix::Constant(1, 1, r_tgt), 0, 1);
  const Vector g = objective_gradient(fs, ref, tgt);
  ASSERT_EQ(g.size(), 1);
  EXPECT_NEAR(g(0), 0.5, 1e-14);
}

TEST(ObjectiveGradient, MarkersAreExcluded)
{
  Rng rng(2, 0);
  const RowMatrix pts = normal_rows(20, 2, rng);
  const SampleBatch plain(pts, 1, 1);
  const SampleBatch marked = append_markers(plain, normal_rows(5, 1, rng), Vector::Constant(1, 2.0));
  const FeatureSet fs = random_features(3, 2, 1.0, rng);
  const SampleBatch tgt(normal_rows(20, 2, rng), 1, 1);
  EXPECT_EQ(objective_gradient(fs, plain, tgt), objective_gradient(fs, marked, tgt));
}

TEST(ObjectiveGradient, MatchesFiniteDifferencesOfObjective)
{
  Rng rng(3, 0);
  for (int trial = 0; trial < 4; ++trial) {
    const SampleBatch ref(normal_rows(15, 2, rng), 1, 1);
    const SampleBatch tgt(normal_rows(15, 2, rng, 0.5), 1, 1);
    const FeatureSet fs = random_features(3, 2, 1.0, rng);
    const Vector g = objective_gradient(fs, ref, tgt);
    const double h = 1e-4;
    for (Index j = 0; j < 3; ++j) {
      Vector bp = Vector::Zero(3);
      Vector bm = Vector::Zero(3);
      bp(j) = h;
      bm(j) = -h;
      const double fd = (empirical_objective_numeric(fs, bp, ref, tgt, Penalty(4.0)) -
                         empirical_objective_numeric(fs, bm, ref, tgt, Penalty(4.0))) /
                        (2.0 * h);
      EXPECT_NEAR(fd, g(j), 1e-4 * std::max(std::abs(g(j)), 1e-2));
    }
  }
}

TEST(GramMatrix, ZeroWhenGradientsVanish)
{
  const Vector c = Vector::Constant(2, 0.3);
  const FeatureSet fs({ Feature{ FeatureKind::erf_radial, c, 1.0 } });
  const SampleBatch tgt(c.transpose(), 1, 1);
  const Eigen::MatrixXd gram = gram_matrix(fs, tgt, Penalty(1.0));
  EXPECT_EQ(gram.norm(), 0.0);
}

TEST(GramMatrix, ScalarArithmetic)
{
  const double alpha = 0.8;
  const double r = alpha * boost::math::erf_inv(0.6);
  Vector c(2);
  c << 1.0, 0.0;
  const FeatureSet fs({ Feature{ FeatureKind::erf_radial, c, alpha } });
  RowMatrix row(1, 2);
  row << 1.0, r;
  const Eigen::MatrixXd gram = gram_matrix(fs, SampleBatch(row, 1, 1), Penalty::infinite());
  ASSERT_EQ(gram.rows(), 1);
  EXPECT_NEAR(gram(0, 0), 0.36, 1e-14);
}

TEST(GramMatrix, PositiveSemidefiniteAndSymmetric)
{
  Rng rng(4, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const SampleBatch tgt(normal_rows(40, 3, rng), 1, 2);
    const FeatureSet fs = random_features(6, 3, 0.5 + rng.uniform(), rng);
    for (double lambda : { 1.0, 4.0, std::numeric_limits<double>::infinity() }) {
      const Eigen::MatrixXd gram = gram_matrix(fs, tgt, Penalty(lambda));
      EXPECT_EQ((gram - gram.transpose()).norm(), 0.0);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(GramMatrix, MatchesDirectSum)
{
  Rng rng(5, 0);
  const SampleBatch tgt(normal_rows(25, 3, rng), 1, 2);
  const FeatureSet fs = random_features(4, 3, 1.0, rng);
  const Penalty lambda(3.0);
  const Eigen::MatrixXd gram = gram_matrix(fs, tgt, lambda);
  Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(4, 4);
  for (Index i = 0; i < 25; ++i) {
    const Vector z = tgt.points().row(i).transpose();
    for (Index j = 0; j < 4; ++j) {
      for (Index k = 0; k < 4; ++k) {
        direct(j, k) += grad_feature(fs[j], z).dot(rescaled_grad(fs[k], z, lambda, 1)) / 25.0;
      }
    }
  }
  EXPECT_LE((gram - direct).norm(), 1e-13 * direct.norm());
}

TEST(NewtonCoefficients, ZeroGradientGivesZero)
{
  const Vector beta = newton_coefficients(Vector::Zero(3), Eigen::MatrixXd::Identity(3, 3), 0.0, 1.0);
  EXPECT_EQ(beta.norm(), 0.0);
}

TEST(NewtonCoefficients, ScalarDivision)
{
  const Vector beta =
    newton_coefficients(Vector::Constant(1, 0.5), Eigen::MatrixXd::Constant(1, 1, 0.36), 0.0, 1.0);
  EXPECT_NEAR(beta(0), 0.5 / 0.36, 1e-14);
  EXPECT_NEAR(beta(0), 1.3889, 1e-4);
}

TEST(NewtonCoefficients, RidgeAndDamping)
{
  Eigen::MatrixXd gram(2, 2);
  gram << 2.0, 0.5, 0.5, 1.0;
  Vector g(2);
  g << 1.0, -1.0;
  const Vector beta = newton_coefficients(g, gram, 0.1, 0.5);
  const Vector expect = 0.5 * (gram + 0.1 * Eigen::MatrixXd::Identity(2, 2)).inverse() * g;
  EXPECT_LE((beta - expect).norm(), 1e-14);
}

TEST(NewtonCoefficients, SingularWithoutRidgeIsAnError)
{
  const Eigen::MatrixXd gram = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_THROW(newton_coefficients(Vector::Ones(2), gram, 0.0, 1.0), SolverError);
  EXPECT_NO_THROW(newton_coefficients(Vector::Ones(2), gram, 1e-3, 1.0));
}

TEST(NewtonCoefficients, StepReducesObjectiveGradient)
{
  // 1D pair N(0,1) -> N(1,1), five random centers per trial
  int improved = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(100 + static_cast<std::uint64_t>(trial), 0);
    const SampleBatch ref(normal_rows(500, 1, rng), 0, 1);
    const SampleBatch tgt(normal_rows(500, 1, rng, 1.0), 0, 1);
    std::vector<Feature> fs;
    for (int j = 0; j < 5; ++j) {
      const bool from_ref = rng.uniform() < 0.5;
      const auto row = static_cast<Index>(rng.uniform_index(500));
      fs.push_back(Feature{ FeatureKind::erf_radial,
                            (from_ref ? ref : tgt).points().row(row).transpose(),
                            1.0 });
    }
    ElementaryMap map{ FeatureSet(fs), Vector(), Penalty::infinite() };
    const Vector g = objective_gradient(map.features, ref, tgt);
    const Eigen::MatrixXd gram = gram_matrix(map.features, tgt, map.lambda);
    map.beta = newton_coefficients(g, gram, 1e-3 * gram.trace() / 5.0, 1.0);
    const SampleBatch moved = apply_elementary(map, ref);
    improved += objective_gradient(map.features, moved, tgt).norm() < g.norm() ? 1 : 0;
  }
  EXPECT_GE(improved, 95);
}

TEST(ApplyElementary, ZeroBetaIsBitwiseIdentity)
{
  Rng rng(6, 0);
  ElementaryMap map = random_map(5, 3, 2.0, rng);
  map.beta.setZero();
  const SampleBatch b(normal_rows(30, 3, rng), 1, 2);
  EXPECT_EQ(apply_elementary(map, b).points(), b.points());
}

TEST(ApplyElementary, PointAtCenterIsFixed)
{
  const Vector c = Vector::Constant(2, 0.5);
  const ElementaryMap map{ FeatureSet({ Feature{ FeatureKind::erf_radial, c, 1.0 } }),
                           Vector::Constant(1, 3.0),
                           Penalty(1.0) };
  const SampleBatch b(c.transpose(), 1, 1);
  EXPECT_EQ(apply_elementary(map, b).points(), b.points());
}

TEST(ApplyElementary, InfinitePenaltyFreezesY)
{
  Rng rng(7, 0);
  const ElementaryMap map = random_map(5, 4, std::numeric_limits<double>::infinity(), rng);
  const SampleBatch b(normal_rows(50, 4, rng), 2, 2);
  const SampleBatch out = apply_elementary(map, b);
  EXPECT_EQ((out.y_block() - b.y_block()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT((out.x_block() - b.x_block()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ApplyElementary, DisplacementMatchesDefinition)
{
  Rng rng(8, 0);
  const ElementaryMap map = random_map(3, 2, 2.0, rng);
  const RowMatrix pts = normal_rows(10, 2, rng);
  const RowMatrix disp = elementary_displacement(map, pts, 1);
  for (Index i = 0; i < 10; ++i) {
    Vector expect = Vector::Zero(2);
    for (Index j = 0; j < 3; ++j) {
      expect -= map.beta(j) * rescaled_grad(map.features[j], pts.row(i).transpose(), map.lambda, 1);
    }
    EXPECT_LE((disp.row(i).transpose() - expect).norm(), 1e-15);
  }
}

TEST(PushForward, EmptyModelIsIdentity)
{
  Rng rng(9, 0);
  const FlowModel model = random_model(0, 1, 1, 1.0, rng);
  const SampleBatch b(normal_rows(10, 2, rng), 1, 1);
  EXPECT_EQ(push_forward(model, b).points(), b.points());
}

TEST(PushForward, OneStepEqualsApplyElementary)
{
  Rng rng(10, 0);
  const FlowModel model = random_model(1, 1, 1, 2.0, rng);
  const SampleBatch b(normal_rows(10, 2, rng), 1, 1);
  EXPECT_EQ(push_forward(model, b).points(), apply_elementary(model.steps[0], b).points());
}

TEST(PushForward, StepwiseCompositionIsBitwiseEqual)
{
  Rng rng(11, 0);
  const FlowModel model = random_model(6, 1, 2, 3.0, rng);
  SampleBatch b(normal_rows(20, 3, rng), 1, 2);
  const SampleBatch all = push_forward(model, b);
  for (const ElementaryMap& step : model.steps) {
    b = apply_elementary(step, b);
  }
  EXPECT_EQ(all.points(), b.points());
}

TEST(PushForward, BlockTriangularModelKeepsYBitwise)
{
  Rng rng(12, 0);
  FlowModel model = random_model(5, 2, 1, std::numeric_limits<double>::infinity(), rng);
  model.transform = ColumnTransform::fit(normal_rows(40, 3, rng, 2.0), { false, false, false }, true);
  const SampleBatch b(normal_rows(30, 3, rng), 2, 1);
  const SampleBatch out = push_forward(model, b);
  EXPECT_TRUE((out.y_block().array() == b.y_block().array()).all());
}

TEST(ConditionalSample, ZeroStepsReturnsInput)
{
  Rng rng(13, 0);
  const FlowModel model = random_model(0, 1, 1, std::numeric_limits<double>::infinity(), rng);
  const RowMatrix xs = normal_rows(10, 1, rng);
  EXPECT_EQ(conditional_sample(model, Vector::Constant(1, 2.0), xs), xs);
}

TEST(ConditionalSample, FinitePenaltyIsRejected)
{
  Rng rng(14, 0);
  const FlowModel model = random_model(2, 1, 1, 1.0, rng);
  EXPECT_THROW(conditional_sample(model, Vector::Constant(1, 2.0), normal_rows(3, 1, rng)),
               InvalidArgument);
}

TEST(ConditionalSample, MarkersMatchPostHocPush)
{
  Rng rng(15, 0);
  JointDataset joint;
  joint.y_dim = 1;
  joint.x_dim = 1;
  joint.pairs = normal_rows(200, 2, rng);
  joint.pairs.col(1) += joint.pairs.col(0);
  FlowConfig config;
  config.t_max = 20;
  config.marker_count = 50;
  config.reference_source = ReferenceSource::reuse;
  const Vector y_star = Vector::Constant(1, 0.5);
  const FlowFit fit = fit_flow_detailed(joint, config, y_star);
  const SampleBatch& before = fit.initial_reference;
  ASSERT_EQ(before.marker_count(), 50);
  const RowMatrix pushed = conditional_sample(fit.model, y_star, before.markers().rightCols(1));
  EXPECT_EQ(pushed, RowMatrix(fit.final_reference.markers().rightCols(1)));
  EXPECT_TRUE((fit.final_reference.markers().col(0).array() == 0.5).all());
}

TEST(FitFlow, TargetAsReferenceStopsImmediately)
{
  Rng rng(16, 0);
  const SampleBatch b(normal_rows(100, 2, rng), 1, 1);
  const FlowFit fit = fit_flow_batches(b, b, FlowConfig{});
  EXPECT_EQ(fit.model.steps.size(), 1u);
  EXPECT_EQ(fit.model.terminated_by, Termination::threshold);
  EXPECT_EQ(fit.model.steps[0].beta.norm(), 0.0);
}

TEST(FitFlow, HugeEpsilonGivesOneStep)
{
  Rng rng(17, 0);
  const SampleBatch ref(normal_rows(100, 2, rng), 1, 1);
  const SampleBatch tgt(normal_rows(100, 2, rng, 1.0), 1, 1);
  FlowConfig config;
  config.epsilon = 1e3;
  const FlowFit fit = fit_flow_batches(ref, tgt, config);
  EXPECT_EQ(fit.model.steps.size(), 1u);
  EXPECT_EQ(fit.model.terminated_by, Termination::threshold);
}

TEST(FitFlow, TMaxTerminationIsRecorded)
{
  Rng rng(18, 0);
  const SampleBatch ref(normal_rows(100, 2, rng), 1, 1);
  const SampleBatch tgt(normal_rows(100, 2, rng, 1.0), 1, 1);
  FlowConfig config;
  config.t_max = 7;
  const FlowFit fit = fit_flow_batches(ref, tgt, config);
  EXPECT_EQ(fit.model.steps.size(), 7u);
  EXPECT_EQ(fit.model.diagnostics.size(), 7u);
  EXPECT_EQ(fit.model.terminated_by, Termination::t_max);
}

TEST(FitFlow, GaussianShiftMean)
{
  Rng rng(19, 0);
  const SampleBatch ref(normal_rows(2000, 1, rng), 0, 1);
  const SampleBatch tgt(normal_rows(2000, 1, rng, 1.0), 0, 1);
  FlowConfig config;
  config.p = 8;
  config.t_max = 500;
  const FlowFit fit = fit_flow_batches(ref, tgt, config);
  EXPECT_NEAR(fit.final_reference.points().mean(), 1.0, 0.05);
}

TEST(FitFlow, SameSeedSameModel)
{
  Rng rng(20, 0);
  JointDataset joint;
  joint.y_dim = 1;
  joint.x_dim = 1;
  joint.pairs = normal_rows(100, 2, rng);
  FlowConfig config;
  config.t_max = 15;
  config.seed = 5;
  const FlowModel a = fit_flow(joint, config);
  const FlowModel b = fit_flow(joint, config);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    EXPECT_EQ(a.steps[t].beta, b.steps[t].beta);
  }
}

TEST(FlowConfig, ValidationNamesTheKey)
{
  FlowConfig config;
  config.p = 0;
  try {
    config.validate();
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("flow.p"), std::string::npos);
  }
  config = FlowConfig{};
  config.epsilon = 0.0;
  EXPECT_THROW(config.validate(), InvalidArgument);
  config = FlowConfig{};
  config.t_max = 0;
  EXPECT_THROW(config.validate(), InvalidArgument);
}
