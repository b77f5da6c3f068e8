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

#ifndef LEXATTR_RENDER_H_
#define LEXATTR_RENDER_H_

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexattr/text.h"

namespace lexattr {

struct WordScore {
  std::string surface;
  double score = 0.0;
  // Words linked into one group all show the group's summed score.
  std::optional<std::size_t> group;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
};

struct WordAttribution {
  std::vector<WordScore> words;
  double f_x = 0.0;
  // Attribution mass that sat on special tokens (zero for conforming
  // baselines); kept so sums reconcile with the token vector.
  double special_score = 0.0;
};

enum class DepLabel { kNeg, kAcomp, kAuxpass, kPrt, kOther };

struct DepArc {
  std::size_t head = 0;
  DepLabel label = DepLabel::kOther;
};

// One arc per word, indexed like WordAttribution::words.
using DepAnnotation = std::vector<DepArc>;

DepLabel ParseDepLabel(std::string_view label);

enum class Polarity { kPositive, kNegative, kZero };

struct RenderSpan {
  std::string surface;
  double intensity = 0.0;  // [0, 1]
  Polarity polarity = Polarity::kZero;
};

// Word score = sum of its tokens' scores. Throws Error(kAlignmentGap) for a
// non-special token without a word index.
WordAttribution MergeTokensToWords(const TokenizedText& tokens,
                                   std::span<const double> token_scores,
                                   double f_x);

// Sum over words, counting each linked group once, plus special_score.
double GroupedSum(const WordAttribution& wa);

// Groups each negation with its head; when the head also governs an acomp
// or auxpass dependent, that dependent joins. Particles (prt) join their
// verb. Groups merge transitively. Throws Error(kValidation) when the
// annotation does not cover every word.
WordAttribution LinkNegations(const WordAttribution& wa, const DepAnnotation& dep);

// Parser-free fallback: {not, never, no, n't, *n't} attach to the next word
// that is neither a stopword nor punctuation.
WordAttribution LinkNegationsHeuristic(const WordAttribution& wa);

// Zeroes every score whose sign disagrees with F(x); all scores when F(x)=0.
WordAttribution ZeroIncoherentSigns(const WordAttribution& wa);

// intensity = |s| / max|s| * min(1, |F(x)| / global_scale).
std::vector<RenderSpan> NormalizeForDisplay(const WordAttribution& wa,
                                            double global_scale);

// 9-step diverging ramp: index 0 darkest pink, 4 neutral, 8 darkest green.
inline constexpr std::array<std::string_view, 9> kDivergingRamp = {
    "#c51b7d", "#de77ae", "#f1b6da", "#fde0ef", "#f7f7f7",
    "#e6f5d0", "#b8e186", "#7fbc41", "#4d9221"};

// Ramp index for a span; 4 (neutral) for zero intensity.
std::size_t RampIndex(double intensity, Polarity polarity);
// Dark ramp steps carry white text.
bool UsesLightText(std::size_t ramp_index);

enum class EmitFormat { kHtml, kAnsi };

// Spans separated by single spaces. Never modifies the spans.
std::string Emit(std::span<const RenderSpan> spans, EmitFormat format);

std::string HtmlEscape(std::string_view text);

struct ReportEntry {
  std::string id;
  double f_x = 0.0;
  std::vector<RenderSpan> spans;
};

// Self-contained HTML page, one block per entry with an F(x) caption.
std::string RenderHtmlReport(std::string_view title,
                             std::span<const ReportEntry> entries);

}  // namespace lexattr

#endif  // LEXATTR_RENDER_H_
