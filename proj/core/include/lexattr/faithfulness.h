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

#ifndef LEXATTR_FAITHFULNESS_H_
#define LEXATTR_FAITHFULNESS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lexattr/attribution.h"
#include "lexattr/errors.h"
#include "lexattr/oracle.h"
#include "lexattr/stats.h"
#include "lexattr/text.h"

namespace lexattr {

enum class SelectionLevel { kToken, kWord };

// How a "removed" unit is realized: delete its rows and re-run on the
// shorter sequence, or overwrite them with the MASK embedding.
enum class RemovalMode { kDelete, kMaskSubstitute };

std::string_view LevelName(SelectionLevel level);
SelectionLevel ParseLevel(std::string_view name);
RemovalMode ParseRemoval(std::string_view name);

struct FractionGrid {
  std::vector<double> values;

  // {0, 0.05, 0.1, ..., 0.5, 1}.
  static FractionGrid Default();
  // Throws Error(kValidation) unless strictly increasing within [0, 1].
  void Validate() const;
};

// Scores of the removable units: token scores of non-special tokens, or
// per-word sums. Index = token position (token level) or word index.
struct UnitScores {
  std::vector<std::size_t> units;
  std::vector<double> scores;
};

UnitScores CollectUnits(std::span<const double> token_scores,
                        const TokenizedText& tokens, SelectionLevel level);

// ceil(f * M) units with the largest |score|; ties go to the earlier unit.
// Returned in ranking order.
std::vector<std::size_t> SelectTopFraction(std::span<const double> token_scores,
                                           const TokenizedText& tokens,
                                           double f, SelectionLevel level);

std::size_t UnitCountForFraction(double f, std::size_t removable);

// x with the given units removed (keep_selected = false) or with only the
// given units kept (keep_selected = true). Specials always stay.
EmbeddingMatrix ApplySelection(const EmbeddingMatrix& x,
                               const TokenizedText& tokens,
                               std::span<const std::size_t> units,
                               SelectionLevel level, bool keep_selected,
                               RemovalMode mode,
                               const OracleDescriptor& descriptor);

// |F(x) - F(x')| for the perturbed x'. Returns exactly 0 when nothing
// changes. `f_x` may be passed to skip re-evaluating F(x).
double OutputChange(GradientOracle& oracle, const TokenizedText& tokens,
                    const EmbeddingMatrix& x, std::span<const std::size_t> units,
                    SelectionLevel level, bool keep_selected,
                    const Target& target, RemovalMode mode,
                    std::optional<double> f_x = std::nullopt);

double Comprehensiveness(GradientOracle& oracle, const TokenizedText& tokens,
                         const EmbeddingMatrix& x, const AttributionVector& a,
                         double f, SelectionLevel level, const Target& target,
                         RemovalMode mode = RemovalMode::kDelete);

double Sufficiency(GradientOracle& oracle, const TokenizedText& tokens,
                   const EmbeddingMatrix& x, const AttributionVector& a,
                   double f, SelectionLevel level, const Target& target,
                   RemovalMode mode = RemovalMode::kDelete);

// |sum(a) - (F(x) - F(x0))| / |F(x) - F(x0)|. Throws
// Error(kDegenerateEndpoints) when F(x) == F(x0).
double ApproximationError(const AttributionVector& a);

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepDocument {
  std::string id;
  std::string text;
  Target target;
};

struct SweepSpec {
  std::vector<Method> methods = {Method::kIntegratedGradients};
  std::vector<BaselineKind> baselines = {BaselineKind::kZero};
  std::vector<std::size_t> steps = {300};
  QuadratureKind quadrature = QuadratureKind::kTrapezoid;
  FractionGrid grid = FractionGrid::Default();
  SelectionLevel level = SelectionLevel::kToken;
  RemovalMode removal = RemovalMode::kDelete;
  GradientShapOptions shap;
  std::size_t threads = 1;
  std::size_t batch_size = 32;
};

struct SweepRow {
  std::string document_id;
  Method method;
  BaselineKind baseline;
  std::size_t steps;
  double f;
  double c_f;
  double s_f;
  std::optional<double> ae;  // empty when endpoints are degenerate
  std::size_t token_count;
};

struct SweepFailure {
  std::string document_id;
  std::string combination;
  std::string message;
  std::optional<ErrorKind> kind;  // empty for non-library exceptions
};

struct SweepSummaryRow {
  Method method;
  BaselineKind baseline;
  std::size_t steps;
  double f;
  QuartileSummary c_f;
  QuartileSummary s_f;
  QuartileSummary ae;
  std::size_t degenerate_ae = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summaries;
  std::vector<SweepFailure> failures;
};

// Evaluates the full methods x baselines x steps x grid cross product for
// every document. Per-document failures are recorded, never fatal. Output
// order is independent of thread scheduling.
SweepResult RunSweep(GradientOracle& oracle,
                     const std::vector<SweepDocument>& documents,
                     const SweepSpec& spec);

std::string SweepRowsCsv(const SweepResult& result);
std::string SweepSummaryCsv(const SweepResult& result);

}  // namespace lexattr

#endif  // LEXATTR_FAITHFULNESS_H_
