/*
 * Copyright 2026 The lexattr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "lexattr/attribution.h"
#include "lexattr/errors.h"
#include "test_util.h"

namespace lexattr {
namespace {

using testing::AffineRowSlope;
using testing::FillerModel;
using testing::FunctionOracle;
using testing::RandomInput;
using testing::SmallArch;

double Sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

struct AffineCase {
  ModelParams params;
  EmbeddedText text;
  EmbeddingMatrix x0;
};

AffineCase MakeAffine(std::uint64_t seed) {
  AffineCase c{FillerModel(SmallArch(Activation::kIdentity), seed), {}, {}};
  BuiltinOracle oracle(c.params);
  c.text = oracle.Embed("the old road and a tree");
  c.x0 = MakeBaseline(c.text.x, c.text.tokens, {BaselineKind::kZero},
                      oracle.descriptor());
  return c;
}

void ExpectAffineExact(const AffineCase& c, const AttributionVector& a,
                       const EmbeddingMatrix& x0) {
  const std::vector<double> slope = AffineRowSlope(c.params, 0, c.text.x.rows());
  for (std::size_t r = 0; r < c.text.x.rows(); ++r) {
    double row = 0.0;
    for (std::size_t k = 0; k < slope.size(); ++k) {
      const double expected = slope[k] * (c.text.x.values(r, k) - x0.values(r, k));
      EXPECT_NEAR(a.per_entry(r, k), expected, 1e-10);
      row += expected;
    }
    EXPECT_NEAR(a.scores[r], row, 1e-10);
  }
  EXPECT_NEAR(CompletenessResidual(a), 0.0, 1e-10);
}

TEST(QuadratureTest, WeightsSumToOne) {
  for (QuadratureKind k : {QuadratureKind::kPaperEq6, QuadratureKind::kRiemannLeft,
                           QuadratureKind::kTrapezoid}) {
    for (std::size_t n : {1u, 2u, 7u, 300u}) {
      const QuadratureNodes q = MakeNodes({k, n});
      EXPECT_NEAR(Sum(q.weights), 1.0, 1e-12);
      EXPECT_EQ(q.alphas.front(), 0.0);
    }
  }
  const QuadratureNodes eq6 = MakeNodes({QuadratureKind::kPaperEq6, 4});
  ASSERT_EQ(eq6.alphas.size(), 5u);
  EXPECT_DOUBLE_EQ(eq6.weights[2], 0.2);
  EXPECT_EQ(MakeNodes({QuadratureKind::kRiemannLeft, 4}).alphas.size(), 4u);
  const QuadratureNodes trap = MakeNodes({QuadratureKind::kTrapezoid, 4});
  EXPECT_DOUBLE_EQ(trap.weights.front(), 0.125);
  EXPECT_DOUBLE_EQ(trap.weights[1], 0.25);
}

TEST(AttributionTest, IntegratedGradientsExactOnAffineModel) {
  const AffineCase c = MakeAffine(21);
  BuiltinOracle oracle(c.params);
  for (QuadratureKind k : {QuadratureKind::kPaperEq6, QuadratureKind::kRiemannLeft,
                           QuadratureKind::kTrapezoid}) {
    for (std::size_t n : {1u, 3u, 50u}) {
      ExpectAffineExact(c, IntegratedGradients(oracle, c.text.x, c.x0, {k, n}, std::nullopt),
                        c.x0);
    }
  }
}

TEST(AttributionTest, OtherMethodsExactOnAffineModel) {
  const AffineCase c = MakeAffine(22);
  BuiltinOracle oracle(c.params);
  ExpectAffineExact(c, DeepLiftRescale(oracle, c.text.x, c.x0, std::nullopt), c.x0);
  GradientShapOptions shap;
  shap.noise_stdev = 0.0;
  shap.n_samples = 7;
  ExpectAffineExact(
      c, GradientShap(oracle, c.text.x, c.x0, c.text.tokens, shap, std::nullopt),
      c.x0);
  const EmbeddingMatrix mask = MakeBaseline(c.text.x, c.text.tokens,
                                            {BaselineKind::kMask}, oracle.descriptor());
  ExpectAffineExact(c, SequentialIG(oracle, c.text.x, c.text.tokens, {}, std::nullopt),
                    mask);
}

TEST(AttributionTest, ClosedFormIntegralOfSquares) {
  FunctionOracle oracle = testing::SquareSumOracle(3);
  Rng rng(5);
  const EmbeddingMatrix x = RandomInput(rng, 4, 3);
  const EmbeddingMatrix x0(4, 3);
  const AttributionVector a = IntegratedGradients(
      oracle, x, x0, {QuadratureKind::kTrapezoid, 300}, std::nullopt);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double v = x.values.values()[i];
    EXPECT_NEAR(a.per_entry.values()[i], v * v, 1e-12 + 1e-12 * v * v);
  }
}

TEST(AttributionTest, IdenticalEndpointsGiveZero) {
  const AffineCase c = MakeAffine(1);
  BuiltinOracle inner(c.params);
  CountingOracle oracle(inner);
  const AttributionVector a =
      IntegratedGradients(oracle, c.text.x, c.text.x, {}, std::nullopt);
  for (double s : a.scores) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(oracle.evaluations(), 1u);
}

TEST(AttributionTest, BaselinesKeepSpecialRows) {
  const ModelParams p = FillerModel(SmallArch(), 2);
  BuiltinOracle oracle(p);
  const EmbeddedText e = oracle.Embed("a tree");
  for (BaselineKind k : {BaselineKind::kZero, BaselineKind::kMask,
                         BaselineKind::kPadding, BaselineKind::kMean}) {
    const EmbeddingMatrix x0 = MakeBaseline(e.x, e.tokens, {k}, oracle.descriptor());
    for (std::size_t c = 0; c < e.x.cols(); ++c) {
      EXPECT_EQ(x0.values(0, c), e.x.values(0, c));
      EXPECT_EQ(x0.values(3, c), e.x.values(3, c));
    }
  }
  const EmbeddingMatrix mask =
      MakeBaseline(e.x, e.tokens, {BaselineKind::kMask}, oracle.descriptor());
  EXPECT_EQ(mask.values(1, 0), p.embeddings(Vocabulary::kMaskId, 0));
  const EmbeddingMatrix mean =
      MakeBaseline(e.x, e.tokens, {BaselineKind::kMean}, oracle.descriptor());
  EXPECT_NEAR(mean.values(2, 1), TableMean(p.embeddings)[1], 1e-15);
}

TEST(AttributionTest, MissingMaskRowIsReported) {
  FunctionOracle oracle = testing::SquareSumOracle(2);
  oracle.mutable_descriptor().mask_embedding.reset();
  const EmbeddedText e = oracle.Embed("one two");
  try {
    MakeBaseline(e.x, e.tokens, {BaselineKind::kMask}, oracle.descriptor());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kMaskUnavailable);
  }
}

TEST(AttributionTest, NonFiniteGradientIsReported) {
  FunctionOracle oracle(
      2, [](const EmbeddingMatrix&) { return 1.0; },
      [](const EmbeddingMatrix& x) {
        EmbeddingMatrix g = x;
        g.values(0, 0) = std::nan("");
        return g;
      });
  const EmbeddedText e = oracle.Embed("one two");
  try {
    IntegratedGradients(oracle, e.x, EmbeddingMatrix(e.x.rows(), 2), {}, std::nullopt);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kNonFiniteGradient);
  }
}

TEST(AttributionTest, IgConvergesOnNonlinearModel) {
  const ModelParams p = FillerModel(SmallArch(), 8);
  BuiltinOracle oracle(p);
  const EmbeddedText e = oracle.Embed("they saw the red bird near the sea");
  const EmbeddingMatrix x0 =
      MakeBaseline(e.x, e.tokens, {BaselineKind::kZero}, oracle.descriptor());
  const double r50 = std::abs(CompletenessResidual(IntegratedGradients(
      oracle, e.x, x0, {QuadratureKind::kTrapezoid, 50}, std::nullopt)));
  const double r500 = std::abs(CompletenessResidual(IntegratedGradients(
      oracle, e.x, x0, {QuadratureKind::kTrapezoid, 500}, std::nullopt)));
  EXPECT_LT(r500, r50);
  EXPECT_LT(r500, 1e-5);
}

TEST(AttributionTest, DeepLiftSumsToDelta) {
  const ModelParams p = FillerModel(SmallArch(Activation::kTanh, HeadKind::kClasses, 3), 4);
  BuiltinOracle oracle(p);
  const EmbeddedText e = oracle.Embed("we went far then came back late");
  const EmbeddingMatrix x0 =
      MakeBaseline(e.x, e.tokens, {BaselineKind::kMean}, oracle.descriptor());
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_NEAR(CompletenessResidual(DeepLiftRescale(p, e.x, x0, t)), 0.0, 1e-12);
  }
}

TEST(AttributionTest, DeepLiftNeedsBuiltinOracle) {
  FunctionOracle oracle = testing::SquareSumOracle(2);
  const EmbeddedText e = oracle.Embed("one");
  try {
    DeepLiftRescale(oracle, e.x, EmbeddingMatrix(e.x.rows(), 2), std::nullopt);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::kUnsupportedOracle);
  }
}

TEST(AttributionTest, SequentialIgMatchesMaskIgForOneToken) {
  const ModelParams p = FillerModel(SmallArch(), 13);
  BuiltinOracle oracle(p);
  const EmbeddedText e = oracle.Embed("tree");
  const EmbeddingMatrix mask =
      MakeBaseline(e.x, e.tokens, {BaselineKind::kMask}, oracle.descriptor());
  const QuadratureRule rule{QuadratureKind::kTrapezoid, 64};
  const AttributionVector sig = SequentialIG(oracle, e.x, e.tokens, rule, std::nullopt);
  const AttributionVector ig = IntegratedGradients(oracle, e.x, mask, rule, std::nullopt);
  for (std::size_t i = 0; i < sig.scores.size(); ++i) {
    EXPECT_NEAR(sig.scores[i], ig.scores[i], 1e-10);
  }
}

TEST(AttributionTest, GradientShapIsSeeded) {
  const ModelParams p = FillerModel(SmallArch(), 6);
  BuiltinOracle oracle(p);
  const EmbeddedText e = oracle.Embed("the blue car");
  const EmbeddingMatrix x0(e.x.rows(), e.x.cols());
  GradientShapOptions o;
  o.seed = 42;
  const AttributionVector a = GradientShap(oracle, e.x, x0, e.tokens, o, std::nullopt);
  const AttributionVector b = GradientShap(oracle, e.x, x0, e.tokens, o, std::nullopt);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.config.n_samples, 50u);
  EXPECT_GT(a.config.noise_stdev, 0.0);
  o.seed = 43;
  EXPECT_NE(GradientShap(oracle, e.x, x0, e.tokens, o, std::nullopt).scores, a.scores);
}

TEST(AttributionTest, SpecialRowsGetNothingUnderConformingBaselines) {
  const ModelParams p = FillerModel(SmallArch(), 3);
  BuiltinOracle oracle(p);
  const EmbeddedText e = oracle.Embed("a long walk");
  AttributionSettings s;
  s.baseline = BaselineKind::kPadding;
  const AttributionVector a = Attribute(oracle, e.tokens, e.x, s, std::nullopt);
  EXPECT_EQ(a.scores.front(), 0.0);
  EXPECT_EQ(a.scores.back(), 0.0);
}

TEST(AttributionTest, NamesRoundTrip) {
  for (Method m : {Method::kIntegratedGradients, Method::kSequentialIG,
                   Method::kGradientShap, Method::kDeepLift}) {
    EXPECT_EQ(ParseMethod(MethodName(m)), m);
  }
  EXPECT_EQ(ParseBaseline("padding"), BaselineKind::kPadding);
  EXPECT_EQ(ParseQuadrature("paper-eq6"), QuadratureKind::kPaperEq6);
  EXPECT_THROW(ParseMethod("lime"), Error);
}

}  // namespace
}  // namespace lexattr
