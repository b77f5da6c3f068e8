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


#ifndef LEXATTR_HIGHLIGHT_H_
#define LEXATTR_HIGHLIGHT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexattr/attribution.h"
#include "lexattr/oracle.h"
#include "lexattr/render.h"
#include "lexattr/text.h"

namespace lexattr {

// Half-open range of scalar-value offsets.
using CharSpan = std::pair<std::size_t, std::size_t>;

// Merged, sign-zeroed word scores rescaled so they sum to F(x). Throws
// Error(kZeroAgency) when F(x) = 0 and Error(kAllZeroAfterPolish) when no
// coherent score survives.
std::vector<double> PolishAttributions(const WordAttribution& wa);

enum class NoiseMode { kAnalytic, kMonteCarlo };

struct NoiseOptions {
  NoiseMode mode = NoiseMode::kAnalytic;
  std::size_t draws = 10000;
  std::uint64_t seed = 0;
};

struct HighlightRecord {
  std::string sentence_id;
  std::string reader;
  // Sum of the polished scores; F(x) up to rounding.
  double a = 0.0;
  double f_h = 0.0;
  double a_h = 0.0;
  double a_max = 0.0;
  double noise = 0.0;
  double noise_stderr = 0.0;  // zero for the analytic noise
  std::size_t words = 0;
  std::size_t highlighted = 0;
};

// Requires at least one highlighted word; throws Error(kValidation)
// otherwise or on a size mismatch.
HighlightRecord HighlightMetrics(std::span<const double> polished,
                                 const std::vector<bool>& highlighted,
                                 const NoiseOptions& noise);

// 0 <= a_h <= a_max <= a for a > 0, mirrored for a < 0.
bool OrderingHolds(const HighlightRecord& r);

struct SlopeBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  // Set only when the bin holds enough records.
  std::optional<double> slope_h, slope_max, slope_noise, ratio;
  std::optional<double> stderr_h, stderr_max, stderr_noise;
};

struct BinnedSlopes {
  std::vector<SlopeBin> bins;
};

// Bin of f_h: (k/n, (k+1)/n].
std::size_t FhBin(double f_h, std::size_t n_bins);

// Least-squares slope through the origin of y against a, with the standard
// error sqrt(sum(res^2) / (n - 1) / sum(a^2)).
std::pair<double, double> SlopeThroughOrigin(std::span<const double> a,
                                             std::span<const double> y);

BinnedSlopes FitSlopes(std::span<const HighlightRecord> records,
                       std::size_t n_bins = 10, std::size_t min_count = 2);

// Word flags: a word counts as highlighted when at least half of its
// characters fall inside the spans.
std::vector<bool> WordHighlightMask(const WordAttribution& words,
                                    std::span<const CharSpan> spans);

// Splits after '.', '!' or '?' runs that are followed by whitespace.
std::vector<CharSpan> SplitSentences(std::string_view text);

struct ReaderHighlights {
  std::string reader;
  std::vector<CharSpan> spans;  // document offsets
};

struct HighlightDocument {
  std::string id;
  std::string text;
  std::vector<CharSpan> sentences;  // empty: split by rule
  std::vector<ReaderHighlights> readers;
};

struct HighlightRunOptions {
  AttributionSettings attribution;
  Target target;
  NoiseOptions noise;
  std::size_t threads = 1;
};

struct HighlightRun {
  std::vector<HighlightRecord> records;
  std::size_t sentences = 0;
  std::size_t zero_agency = 0;
  std::size_t all_zero_after_polish = 0;
  std::size_t unhighlighted = 0;  // (sentence, reader) pairs filtered out
};

// Attributes every sentence once and builds one record per reader who
// highlighted part of it. Record ids are "<doc>#<sentence index>".
HighlightRun EvaluateHighlights(GradientOracle& oracle,
                                const std::vector<HighlightDocument>& documents,
                                const HighlightRunOptions& options);

std::string HighlightRecordsCsv(std::span<const HighlightRecord> records);
std::string SlopesCsv(const BinnedSlopes& slopes);
std::string FhHistogramCsv(std::span<const HighlightRecord> records,
                           std::size_t n_bins = 10);

}  // namespace lexattr

#endif  // LEXATTR_HIGHLIGHT_H_
