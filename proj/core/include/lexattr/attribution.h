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

#ifndef LEXATTR_ATTRIBUTION_H_
#define LEXATTR_ATTRIBUTION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lexattr/matrix.h"
#include "lexattr/model.h"
#include "lexattr/oracle.h"
#include "lexattr/text.h"

namespace lexattr {

enum class BaselineKind { kZero, kMask, kPadding, kMean };

struct BaselineStrategy {
  BaselineKind kind = BaselineKind::kZero;
};

enum class QuadratureKind { kPaperEq6, kRiemannLeft, kTrapezoid };

// Straight-path quadrature with `steps` intervals of width 1/steps.
//   paper-eq6:    nodes k = 0..N, every node weighted 1/(N+1)
//   riemann-left: nodes k = 0..N-1, weight 1/N
//   trapezoid:    nodes k = 0..N, weight 1/N, endpoints halved
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::kPaperEq6;
  std::size_t steps = 300;
};

struct QuadratureNodes {
  std::vector<double> alphas;
  std::vector<double> weights;
};

QuadratureNodes MakeNodes(const QuadratureRule& rule);

enum class Method { kIntegratedGradients, kSequentialIG, kGradientShap, kDeepLift };

std::string_view MethodName(Method m);
std::string_view BaselineName(BaselineKind b);
std::string_view QuadratureName(QuadratureKind q);
// Parsers throw Error(kValidation) on unknown names.
Method ParseMethod(std::string_view name);
BaselineKind ParseBaseline(std::string_view name);
QuadratureKind ParseQuadrature(std::string_view name);

struct GradientShapOptions {
  std::size_t n_samples = 50;
  // Defaults to 0.09 * rms(x - x0) when unset.
  std::optional<double> noise_stdev;
  std::uint64_t seed = 0;
};

struct AttributionSnapshot {
  Method method = Method::kIntegratedGradients;
  BaselineKind baseline = BaselineKind::kZero;
  QuadratureRule rule;
  std::size_t n_samples = 0;
  double noise_stdev = 0.0;
  std::uint64_t seed = 0;
};

struct AttributionVector {
  std::vector<double> scores;  // one per token
  Matrix per_entry;            // L x d contributions; rows sum to scores
  double f_x = 0.0;
  double f_x0 = 0.0;
  AttributionSnapshot config;
};

// Copies special-token rows from x and fills every other row per strategy.
// Throws Error(kMaskUnavailable) (or the PAD / mean analogue) when the
// oracle does not expose the needed reference row.
EmbeddingMatrix MakeBaseline(const EmbeddingMatrix& x,
                             const TokenizedText& tokens,
                             BaselineStrategy strategy,
                             const OracleDescriptor& descriptor);

AttributionVector IntegratedGradients(GradientOracle& oracle,
                                      const EmbeddingMatrix& x,
                                      const EmbeddingMatrix& x0,
                                      const QuadratureRule& rule,
                                      const Target& target,
                                      std::size_t batch_size = 32);

// One IG run per non-special token, each with only that token's row moved
// to the MASK embedding.
AttributionVector SequentialIG(GradientOracle& oracle, const EmbeddingMatrix& x,
                               const TokenizedText& tokens,
                               const QuadratureRule& rule, const Target& target,
                               std::size_t batch_size = 32);

// Monte-Carlo path sampling: uniform alpha, Gaussian noise on non-special
// rows, gradient times (x - x0), averaged. Seeded.
AttributionVector GradientShap(GradientOracle& oracle, const EmbeddingMatrix& x,
                               const EmbeddingMatrix& x0,
                               const TokenizedText& tokens,
                               const GradientShapOptions& options,
                               const Target& target,
                               std::size_t batch_size = 32);

// Rescale-rule DeepLIFT through the reference network. Only the built-in
// model exposes the layers; anything else is Error(kUnsupportedOracle).
AttributionVector DeepLiftRescale(GradientOracle& oracle,
                                  const EmbeddingMatrix& x,
                                  const EmbeddingMatrix& x0,
                                  const Target& target);
AttributionVector DeepLiftRescale(const ModelParams& params,
                                  const EmbeddingMatrix& x,
                                  const EmbeddingMatrix& x0,
                                  const Target& target);

// Sum of scores minus (F(x) - F(x0)), signed.
double CompletenessResidual(const AttributionVector& a);

struct AttributionSettings {
  Method method = Method::kIntegratedGradients;
  BaselineKind baseline = BaselineKind::kZero;
  QuadratureRule rule;
  GradientShapOptions shap;
  std::size_t batch_size = 32;
};

// Builds the baseline the method needs and runs it.
AttributionVector Attribute(GradientOracle& oracle, const TokenizedText& tokens,
                            const EmbeddingMatrix& x,
                            const AttributionSettings& settings,
                            const Target& target);

}  // namespace lexattr

#endif  // LEXATTR_ATTRIBUTION_H_
