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

#include "otflow/features.hpp"
#include "otflow/flow.hpp"
#include "otflow/kde.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <numbers>

using namespace otflow;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

Feature make_feature(FeatureKind kind, Vector center, double alpha)
{
  return Feature{ kind, std::move(center), alpha };
}

Vector vec(std::initializer_list<double> v)
{
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) {
    out(i++) = x;
  }
  return out;
}

} // namespace

TEST(EvalFeature, ErfAtCenter)
{
  const Feature f = make_feature(FeatureKind::erf_radial, vec({ 0.3, -1.0 }), 1.0);
  EXPECT_NEAR(eval_feature(f, vec({ 0.3, -1.0 })), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
}

TEST(EvalFeature, ErfAtUnitRadiusMatchesHighPrecision)
{
  const Big one(1);
  const Big oracle = boost::multiprecision::erf(one) +
                     boost::multiprecision::exp(-one) /
                       boost::multiprecision::sqrt(boost::math::constants::pi<Big>());
  const Feature f = make_feature(FeatureKind::erf_radial, vec({ 0.0, 0.0 }), 1.0);
  const double v = eval_feature(f, vec({ 0.6, 0.8 }));
  EXPECT_NEAR(v, static_cast<double>(oracle), 1e-14);
  EXPECT_NEAR(v, 1.0502545, 1e-7);
}

TEST(EvalFeature, ErfTemplateAgreesWithHighPrecision)
{
  for (double r : { 0.01, 0.5, 2.0, 7.5 }) {
    for (double a : { 0.2, 1.0, 3.0 }) {
      const Big big = radial_value<Big>(FeatureKind::erf_radial, Big(r), Big(a));
      EXPECT_NEAR(radial_value(FeatureKind::erf_radial, r, a), static_cast<double>(big),
                  1e-14 * std::max(1.0, r));
    }
  }
}

TEST(EvalFeature, InverseMultiquadricAtCenter)
{
  const Feature f = make_feature(FeatureKind::inverse_multiquadric, vec({ 1.0 }), 0.7);
  EXPECT_DOUBLE_EQ(eval_feature(f, vec({ 1.0 })), 1.0);
}

TEST(GradFeature, ZeroAtCenter)
{
  for (FeatureKind k : { FeatureKind::erf_radial, FeatureKind::inverse_multiquadric }) {
    const Feature f = make_feature(k, vec({ 0.5, 2.0, -1.0 }), 0.8);
    EXPECT_EQ(grad_feature(f, f.center).norm(), 0.0);
  }
}

TEST(GradFeature, MatchesFiniteDifferences)
{
  Rng rng(17, 0);
  for (FeatureKind k : { FeatureKind::erf_radial, FeatureKind::inverse_multiquadric }) {
    for (int trial = 0; trial < 20; ++trial) {
      const double alpha = 0.3 + 2.0 * rng.uniform();
      Vector c(3);
      Vector z(3);
      for (Index i = 0; i < 3; ++i) {
        c(i) = rng.normal();
        z(i) = c(i) + alpha * rng.normal();
      }
      const Feature f = make_feature(k, c, alpha);
      const Vector g = grad_feature(f, z);
      const double h = 1e-5 * alpha;
      Vector fd(3);
      for (Index i = 0; i < 3; ++i) {
        Vector zp = z;
        Vector zm = z;
        zp(i) += h;
        zm(i) -= h;
        fd(i) = (eval_feature(f, zp) - eval_feature(f, zm)) / (2.0 * h);
      }
      EXPECT_LE((g - fd).norm(), 1e-6 * std::max(g.norm(), 1e-3));
    }
  }
}

TEST(GradFeature, ErfAsymptoteFarAway)
{
  const Feature f = make_feature(FeatureKind::erf_radial, vec({ 0.0, 0.0 }), 0.5);
  const Vector z = vec({ 3.0, 4.0 }); // r = 5 = 10 alpha
  EXPECT_NEAR(grad_feature(f, z).norm(), 1.0, 1e-9);
}

TEST(HessianFeature, MatchesFiniteDifferencesOfGradient)
{
  Rng rng(21, 0);
  for (FeatureKind k : { FeatureKind::erf_radial, FeatureKind::inverse_multiquadric }) {
    for (int trial = 0; trial < 10; ++trial) {
      const double alpha = 0.5 + rng.uniform();
      const Vector c = vec({ rng.normal(), rng.normal() });
      // includes points very close to the center (series branch)
      const double scale = trial < 3 ? 1e-5 : 1.0;
      const Vector z = c + scale * alpha * vec({ rng.normal(), rng.normal() });
      const Feature f = make_feature(k, c, alpha);
      const Eigen::MatrixXd hess = hessian_feature(f, z);
      const double h = 1e-6 * alpha;
      Eigen::MatrixXd fd(2, 2);
      for (Index i = 0; i < 2; ++i) {
        Vector zp = z;
        Vector zm = z;
        zp(i) += h;
        zm(i) -= h;
        fd.col(i) = (grad_feature(f, zp) - grad_feature(f, zm)) / (2.0 * h);
      }
      EXPECT_LE((hess - fd).norm(), 1e-5 * std::max(hess.norm(), 1.0));
    }
  }
}

TEST(RescaledGrad, UnitPenaltyIsPlainGradient)
{
  const Feature f = make_feature(FeatureKind::erf_radial, vec({ 0.0, 0.0 }), 1.0);
  const Vector z = vec({ 0.4, -0.3 });
  EXPECT_EQ(rescaled_grad(f, z, Penalty(1.0), 1), grad_feature(f, z));
}

TEST(RescaledGrad, InfinitePenaltyZeroesYBlock)
{
  const Feature f = make_feature(FeatureKind::erf_radial, vec({ 0.0, 0.0, 0.0 }), 1.0);
  const Vector z = vec({ 0.4, -0.3, 0.9 });
  const Vector g = grad_feature(f, z);
  const Vector r = rescaled_grad(f, z, Penalty::infinite(), 2);
  EXPECT_EQ(r(0), 0.0);
  EXPECT_EQ(r(1), 0.0);
  EXPECT_EQ(r(2), g(2));
}

TEST(RescaledGrad, ComponentwiseDivision)
{
  Vector g = vec({ 0.4, 0.6 });
  rescale_gradient(g, Penalty(2.0), 1);
  EXPECT_DOUBLE_EQ(g(0), 0.2);
  EXPECT_DOUBLE_EQ(g(1), 0.6);
}

TEST(Penalty, RejectsNonPositive)
{
  EXPECT_THROW(Penalty(0.0), InvalidArgument);
  EXPECT_THROW(Penalty(-1.0), InvalidArgument);
  EXPECT_EQ(Penalty::infinite().y_scale(), 0.0);
}

TEST(FeatureGradients, BatchMatchesPointwise)
{
  Rng rng(5, 0);
  RowMatrix pts(20, 2);
  for (Index i = 0; i < pts.size(); ++i) {
    pts.data()[i] = rng.normal();
  }
  pts.row(3) << 0.1, 0.2; // a row at the center
  const Feature f = make_feature(FeatureKind::erf_radial, vec({ 0.1, 0.2 }), 0.7);
  const RadialGradients rg = feature_gradients(f, pts);
  const Vector vals = feature_values(f, pts);
  for (Index i = 0; i < pts.rows(); ++i) {
    const Vector row = pts.row(i).transpose();
    const Vector expect = grad_feature(f, row);
    const Vector got = rg.coeff(i) * rg.offsets.row(i).transpose();
    EXPECT_LE((got - expect).norm(), 1e-14);
    EXPECT_DOUBLE_EQ(vals(i), eval_feature(f, row));
  }
}

TEST(SelectCenters, UniformModeUsesBatchRows)
{
  Rng rng(3, 0);
  RowMatrix a(30, 2);
  RowMatrix b(30, 2);
  for (Index i = 0; i < 30; ++i) {
    a.row(i) << i, -i;
    b.row(i) << 100 + i, 100 - i;
  }
  const SampleBatch ra(a, 1, 1);
  const SampleBatch rb(b, 1, 1);
  const RowMatrix c = select_centers(ra, rb, 10, Vector::Constant(1, 2.0), 0.0, {}, rng);
  ASSERT_EQ(c.rows(), 10);
  for (Index j = 0; j < 10; ++j) {
    bool found = false;
    for (Index i = 0; i < 30; ++i) {
      found = found || c.row(j) == a.row(i) || c.row(j) == b.row(i);
    }
    EXPECT_TRUE(found);
  }
}

TEST(SelectCenters, FullLocalityPinsY)
{
  Rng rng(3, 0);
  Rng data(4, 0);
  RowMatrix a(30, 2);
  for (Index i = 0; i < a.size(); ++i) {
    a.data()[i] = data.normal();
  }
  const SampleBatch ra(a, 1, 1);
  CenterOptions opt;
  opt.jitter_sd = 0.01;
  const RowMatrix c = select_centers(ra, ra, 10, Vector::Constant(1, 2.0), 1.0, opt, rng);
  for (Index j = 0; j < 10; ++j) {
    EXPECT_LT(std::abs(c(j, 0) - 2.0), 6.0 * opt.jitter_sd);
  }
}

TEST(SelectCenters, TenCentersFromBananaBatches)
{
  Rng rng(1, 0);
  RowMatrix a = RowMatrix::Random(100, 2);
  const SampleBatch ra(a, 1, 1);
  EXPECT_EQ(select_centers(ra, ra, 10, std::nullopt, 0.0, {}, rng).rows(), 10);
  EXPECT_THROW(select_centers(ra, ra, 0, std::nullopt, 0.0, {}, rng), InvalidArgument);
  EXPECT_THROW(select_centers(ra, ra, 3, std::nullopt, 1.5, {}, rng), InvalidArgument);
}

TEST(Schedule, KnownValues)
{
  const Schedule s = Schedule::with_defaults(1000.0);
  EXPECT_DOUBLE_EQ(schedule_m(1000.0, s), 6.0);
  EXPECT_NEAR(schedule_m(0.0, s), 1.0 + 10.0 / (1.0 + std::exp(-10.0)), 1e-12);
  EXPECT_NEAR(schedule_m(0.0, s), 10.99955, 1e-5);
  EXPECT_NEAR(schedule_m(1e6, s), 1.0, 1e-12);
}

TEST(Schedule, Monotone)
{
  const Schedule s = Schedule::with_defaults(500.0);
  double prev = schedule_m(0.0, s);
  for (double t = 1.0; t < 2000.0; t += 7.0) {
    const double m = schedule_m(t, s);
    EXPECT_GT(m, 1.0);
    EXPECT_LE(m, prev);
    prev = m;
  }
}

TEST(Bandwidth, DirectSubstitution)
{
  EXPECT_NEAR(bandwidth_from_densities(1.0, 1.0, 0.01, 2.0, 1.0), std::sqrt(0.02), 1e-15);
  EXPECT_NEAR(bandwidth_from_densities(1.0, 1.0, 0.01, 2.0, 1.0), 0.141421, 1e-6);
}

TEST(Bandwidth, Homogeneity)
{
  for (double dim : { 1.0, 2.0, 5.0 }) {
    const double a = bandwidth_from_densities(0.3, 0.7, 0.01, dim, 2.0);
    const double b = bandwidth_from_densities(0.6, 1.4, 0.01, dim, 2.0);
    EXPECT_NEAR(b / a, std::pow(0.5, 1.0 / dim), 1e-14);
  }
}

TEST(Bandwidth, RejectsBadInputs)
{
  EXPECT_THROW(bandwidth_from_densities(0.0, 1.0, 0.01, 2.0, 1.0), InvalidArgument);
  EXPECT_THROW(bandwidth_from_densities(1.0, 1.0, 0.0, 2.0, 1.0), InvalidArgument);
}

TEST(Bandwidth, DefaultNp)
{
  EXPECT_DOUBLE_EQ(FlowConfig{}.n_p, 0.01);
}
