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

#include "lexattr/render.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "lexattr/errors.h"
#include "lexattr/stats.h"

namespace lexattr {
namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t Find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  // The smaller index becomes the root, so roots are group minima.
  void Union(std::size_t a, std::size_t b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

UnionFind ExistingGroups(const WordAttribution& wa) {
  UnionFind uf(wa.words.size());
  std::map<std::size_t, std::size_t> first;
  for (std::size_t i = 0; i < wa.words.size(); ++i) {
    const auto& g = wa.words[i].group;
    if (!g) continue;
    auto [it, inserted] = first.emplace(*g, i);
    if (!inserted) uf.Union(it->second, i);
  }
  return uf;
}

// Rebuilds scores from the union-find: each pre-existing group contributes
// its shared score once, singletons their own score.
WordAttribution ApplyGroups(const WordAttribution& wa, UnionFind& uf) {
  const std::size_t n = wa.words.size();
  std::map<std::size_t, std::vector<double>> members;
  std::map<std::size_t, std::size_t> sizes;
  std::set<std::size_t> counted_old_groups;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = uf.Find(i);
    ++sizes[root];
    const auto& g = wa.words[i].group;
    if (g && !counted_old_groups.insert(*g).second) continue;
    members[root].push_back(wa.words[i].score);
  }
  std::map<std::size_t, double> sums;
  for (const auto& [root, scores] : members) sums[root] = ExactSum(scores);
  WordAttribution out = wa;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = uf.Find(i);
    if (sizes[root] < 2) {
      out.words[i].group.reset();
      continue;
    }
    out.words[i].group = root;
    out.words[i].score = sums[root];
  }
  return out;
}

bool IsNegation(std::string_view lower) {
  return lower == "not" || lower == "never" || lower == "no" ||
         lower == "n't" ||
         (lower.size() > 3 && lower.substr(lower.size() - 3) == "n't");
}

const std::set<std::string>& Stopwords() {
  static const std::set<std::string> words = {
      "a",    "all",  "am",   "an",    "and",  "any",  "are",  "as",
      "at",   "be",   "been", "being", "but",  "by",   "did",  "do",
      "does", "even", "ever", "for",   "had",  "has",  "have", "in",
      "is",   "it",   "just", "of",    "on",   "or",   "quite", "really",
      "so",   "that", "the",  "this",  "to",   "too",  "very", "was",
      "were", "with", "yet"};
  return words;
}

int AnsiColor(std::string_view hex) {
  const int r = std::stoi(std::string(hex.substr(1, 2)), nullptr, 16);
  const int g = std::stoi(std::string(hex.substr(3, 2)), nullptr, 16);
  const int b = std::stoi(std::string(hex.substr(5, 2)), nullptr, 16);
  static constexpr int kLevels[6] = {0, 95, 135, 175, 215, 255};
  auto nearest = [](int v) {
    int best = 0;
    for (int i = 1; i < 6; ++i) {
      if (std::abs(kLevels[i] - v) < std::abs(kLevels[best] - v)) best = i;
    }
    return best;
  };
  const int ri = nearest(r), gi = nearest(g), bi = nearest(b);
  auto dist = [&](int cr, int cg, int cb) {
    return (cr - r) * (cr - r) + (cg - g) * (cg - g) + (cb - b) * (cb - b);
  };
  const int cube = 16 + 36 * ri + 6 * gi + bi;
  const int cube_dist = dist(kLevels[ri], kLevels[gi], kLevels[bi]);
  const int gray_step = std::clamp((((r + g + b) / 3) - 8 + 5) / 10, 0, 23);
  const int gray = 8 + 10 * gray_step;
  return dist(gray, gray, gray) < cube_dist ? 232 + gray_step : cube;
}

}  // namespace

DepLabel ParseDepLabel(std::string_view label) {
  if (label == "neg") return DepLabel::kNeg;
  if (label == "acomp") return DepLabel::kAcomp;
  if (label == "auxpass") return DepLabel::kAuxpass;
  if (label == "prt") return DepLabel::kPrt;
  return DepLabel::kOther;
}

WordAttribution MergeTokensToWords(const TokenizedText& tokens,
                                   std::span<const double> token_scores,
                                   double f_x) {
  if (token_scores.size() != tokens.size()) {
    throw Error(ErrorKind::kShapeError, "score count != token count");
  }
  struct Acc {
    double score = 0.0;
    std::size_t start = 0, end = 0;
  };
  std::map<std::size_t, Acc> words;
  WordAttribution out;
  out.f_x = f_x;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens.tokens[i];
    if (t.is_special()) {
      out.special_score += token_scores[i];
      continue;
    }
    if (!t.word_index) {
      throw Error(ErrorKind::kAlignmentGap,
                  fmt::format("token {} ('{}') has no word index", i, t.surface));
    }
    auto [it, inserted] = words.try_emplace(*t.word_index);
    Acc& acc = it->second;
    if (inserted) {
      acc.start = t.char_start;
      acc.end = t.char_end;
    } else {
      acc.start = std::min(acc.start, t.char_start);
      acc.end = std::max(acc.end, t.char_end);
    }
    acc.score += token_scores[i];
  }
  const std::u32string source = DecodeUtf8(tokens.source);
  for (const auto& [index, acc] : words) {
    WordScore w;
    const std::size_t end = std::min(acc.end, source.size());
    const std::size_t start = std::min(acc.start, end);
    w.surface = EncodeUtf8(std::u32string_view(source).substr(start, end - start));
    w.score = acc.score;
    w.char_start = acc.start;
    w.char_end = acc.end;
    out.words.push_back(std::move(w));
  }
  return out;
}

double GroupedSum(const WordAttribution& wa) {
  std::vector<double> parts = {wa.special_score};
  std::set<std::size_t> seen;
  for (const WordScore& w : wa.words) {
    if (w.group && !seen.insert(*w.group).second) continue;
    parts.push_back(w.score);
  }
  return ExactSum(parts);
}

WordAttribution LinkNegations(const WordAttribution& wa,
                              const DepAnnotation& dep) {
  const std::size_t n = wa.words.size();
  if (dep.size() != n) {
    throw Error(ErrorKind::kValidation,
                fmt::format("dependency annotation covers {} of {} words",
                            dep.size(), n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dep[i].head >= n) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("word {} has head {} out of range", i, dep[i].head));
    }
    if (dep[i].label == DepLabel::kNeg && dep[i].head == i) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("negation {} is its own head", i));
    }
  }
  UnionFind uf = ExistingGroups(wa);
  for (std::size_t i = 0; i < n; ++i) {
    if (dep[i].label == DepLabel::kPrt && dep[i].head != i) {
      uf.Union(i, dep[i].head);
    }
    if (dep[i].label != DepLabel::kNeg) continue;
    const std::size_t head = dep[i].head;
    uf.Union(i, head);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != head && dep[j].head == head &&
          (dep[j].label == DepLabel::kAcomp ||
           dep[j].label == DepLabel::kAuxpass)) {
        uf.Union(j, head);
      }
    }
  }
  return ApplyGroups(wa, uf);
}

WordAttribution LinkNegationsHeuristic(const WordAttribution& wa) {
  const std::size_t n = wa.words.size();
  UnionFind uf = ExistingGroups(wa);
  for (std::size_t i = 0; i < n; ++i) {
    if (!IsNegation(AsciiLower(wa.words[i].surface))) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::string lower = AsciiLower(wa.words[j].surface);
      if (IsPunctuationWord(lower)) break;
      if (Stopwords().count(lower)) continue;
      uf.Union(i, j);
      break;
    }
  }
  return ApplyGroups(wa, uf);
}

WordAttribution ZeroIncoherentSigns(const WordAttribution& wa) {
  WordAttribution out = wa;
  for (WordScore& w : out.words) {
    if (wa.f_x == 0.0 || (wa.f_x > 0.0 ? w.score < 0.0 : w.score > 0.0)) {
      w.score = 0.0;
    }
  }
  return out;
}

std::vector<RenderSpan> NormalizeForDisplay(const WordAttribution& wa,
                                            double global_scale) {
  if (!(global_scale > 0.0)) {
    throw Error(ErrorKind::kValidation, "global scale must be positive");
  }
  double peak = 0.0;
  for (const WordScore& w : wa.words) peak = std::max(peak, std::abs(w.score));
  const double damp = std::min(1.0, std::abs(wa.f_x) / global_scale);
  std::vector<RenderSpan> spans;
  spans.reserve(wa.words.size());
  for (const WordScore& w : wa.words) {
    RenderSpan s;
    s.surface = w.surface;
    s.intensity = peak > 0.0 ? std::abs(w.score) / peak * damp : 0.0;
    if (s.intensity > 0.0) {
      s.polarity = w.score > 0.0 ? Polarity::kPositive : Polarity::kNegative;
    }
    spans.push_back(std::move(s));
  }
  return spans;
}

std::size_t RampIndex(double intensity, Polarity polarity) {
  if (polarity == Polarity::kZero || !(intensity > 0.0)) return 4;
  const auto level = static_cast<std::size_t>(
      std::clamp(std::ceil(std::min(intensity, 1.0) * 4.0), 1.0, 4.0));
  return polarity == Polarity::kPositive ? 4 + level : 4 - level;
}

bool UsesLightText(std::size_t ramp_index) {
  return ramp_index <= 1 || ramp_index >= 7;
}

std::string HtmlEscape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string Emit(std::span<const RenderSpan> spans, EmitFormat format) {
  std::string out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (i) out.push_back(' ');
    const RenderSpan& s = spans[i];
    const std::size_t ramp = RampIndex(s.intensity, s.polarity);
    if (format == EmitFormat::kHtml) {
      if (ramp == 4) {
        out += HtmlEscape(s.surface);
        continue;
      }
      out += fmt::format("<span style=\"background-color:{}{}\">{}</span>",
                         kDivergingRamp[ramp],
                         UsesLightText(ramp) ? ";color:#ffffff" : "",
                         HtmlEscape(s.surface));
    } else {
      if (ramp == 4) {
        out += s.surface;
        continue;
      }
      out += fmt::format("\x1b[48;5;{}m{}{}\x1b[0m",
                         AnsiColor(kDivergingRamp[ramp]),
                         UsesLightText(ramp) ? "\x1b[38;5;15m" : "\x1b[38;5;16m",
                         s.surface);
    }
  }
  return out;
}

std::string RenderHtmlReport(std::string_view title,
                             std::span<const ReportEntry> entries) {
  std::string out = fmt::format(
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      "<title>{0}</title>\n<style>\n"
      "body {{ font-family: sans-serif; line-height: 1.9; margin: 2em; }}\n"
      ".doc {{ margin: 0 0 1.2em 0; }}\n"
      ".caption {{ color: #555555; font-size: 0.85em; }}\n"
      "span {{ padding: 0.1em 0.2em; border-radius: 0.2em; }}\n"
      "</style>\n</head>\n<body>\n<h1>{0}</h1>\n",
      HtmlEscape(title));
  for (const ReportEntry& e : entries) {
    out += fmt::format(
        "<div class=\"doc\">\n<div class=\"caption\">{} &middot; F(x) = "
        "{:.6f}</div>\n<p>{}</p>\n</div>\n",
        HtmlEscape(e.id), e.f_x, Emit(e.spans, EmitFormat::kHtml));
  }
  out += "</body>\n</html>\n";
  return out;
}

}  // namespace lexattr
