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


#include "lexattr/highlight.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "lexattr/errors.h"
#include "lexattr/rng.h"
#include "lexattr/stats.h"

namespace lexattr {

std::vector<double> PolishAttributions(const WordAttribution& wa) {
  if (wa.f_x == 0.0) {
    throw Error(ErrorKind::kZeroAgency, "F(x) is zero");
  }
  const WordAttribution coherent = ZeroIncoherentSigns(wa);
  std::vector<double> scores;
  scores.reserve(coherent.words.size());
  for (const WordScore& w : coherent.words) scores.push_back(w.score);
  const double total = ExactSum(scores);
  if (total == 0.0) {
    throw Error(ErrorKind::kAllZeroAfterPolish,
                "no score agrees in sign with F(x)");
  }
  const double factor = wa.f_x / total;
  for (double& s : scores) s *= factor;
  return scores;
}

HighlightRecord HighlightMetrics(std::span<const double> polished,
                                 const std::vector<bool>& highlighted,
                                 const NoiseOptions& noise) {
  if (highlighted.size() != polished.size()) {
    throw Error(ErrorKind::kValidation,
                fmt::format("{} highlight flags for {} words",
                            highlighted.size(), polished.size()));
  }
  const std::size_t m = polished.size();
  std::vector<double> chosen;
  for (std::size_t i = 0; i < m; ++i) {
    if (highlighted[i]) chosen.push_back(polished[i]);
  }
  const std::size_t h = chosen.size();
  if (h == 0) {
    throw Error(ErrorKind::kValidation, "sentence has no highlighted word");
  }
  HighlightRecord r;
  r.words = m;
  r.highlighted = h;
  r.a = ExactSum(polished);
  r.f_h = static_cast<double>(h) / static_cast<double>(m);
  r.a_h = ExactSum(chosen);

  std::vector<double> ranked(polished.begin(), polished.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](double x, double y) { return std::abs(x) > std::abs(y); });
  r.a_max = ExactSum(std::span<const double>(ranked).first(h));

  if (noise.mode == NoiseMode::kAnalytic) {
    r.noise = r.f_h * r.a;
    return r;
  }
  if (noise.draws < 2) {
    throw Error(ErrorKind::kValidation, "Monte-Carlo noise needs >= 2 draws");
  }
  Rng rng(noise.seed);
  std::vector<std::size_t> order(m);
  std::vector<double> sums(noise.draws);
  std::vector<double> pick(h);
  for (std::size_t d = 0; d < noise.draws; ++d) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < h; ++i) {
      std::swap(order[i], order[i + rng.Index(m - i)]);
      pick[i] = polished[order[i]];
    }
    sums[d] = ExactSum(pick);
  }
  const double mean = Mean(sums);
  double ss = 0.0;
  for (double s : sums) ss += (s - mean) * (s - mean);
  const double n = static_cast<double>(noise.draws);
  r.noise = mean;
  r.noise_stderr = std::sqrt(ss / (n - 1.0) / n);
  return r;
}

bool OrderingHolds(const HighlightRecord& r) {
  if (r.a >= 0.0) return 0.0 <= r.a_h && r.a_h <= r.a_max && r.a_max <= r.a;
  return 0.0 >= r.a_h && r.a_h >= r.a_max && r.a_max >= r.a;
}

std::size_t FhBin(double f_h, std::size_t n_bins) {
  const double scaled = f_h * static_cast<double>(n_bins);
  const double k = std::ceil(scaled - 1e-9) - 1.0;
  return static_cast<std::size_t>(
      std::clamp(k, 0.0, static_cast<double>(n_bins - 1)));
}

std::pair<double, double> SlopeThroughOrigin(std::span<const double> a,
                                             std::span<const double> y) {
  double saa = 0.0, say = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += a[i] * a[i];
    say += a[i] * y[i];
  }
  if (saa == 0.0) return {0.0, 0.0};
  const double slope = say / saa;
  double res = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = y[i] - slope * a[i];
    res += e * e;
  }
  const double n = static_cast<double>(a.size());
  const double se = a.size() > 1 ? std::sqrt(res / (n - 1.0) / saa) : 0.0;
  return {slope, se};
}

BinnedSlopes FitSlopes(std::span<const HighlightRecord> records,
                       std::size_t n_bins, std::size_t min_count) {
  struct Columns {
    std::vector<double> a, h, max, noise;
  };
  std::vector<Columns> cols(n_bins);
  for (const HighlightRecord& r : records) {
    Columns& c = cols[FhBin(r.f_h, n_bins)];
    c.a.push_back(r.a);
    c.h.push_back(r.a_h);
    c.max.push_back(r.a_max);
    c.noise.push_back(r.noise);
  }
  BinnedSlopes out;
  for (std::size_t k = 0; k < n_bins; ++k) {
    SlopeBin bin;
    bin.lo = static_cast<double>(k) / static_cast<double>(n_bins);
    bin.hi = static_cast<double>(k + 1) / static_cast<double>(n_bins);
    const Columns& c = cols[k];
    bin.count = c.a.size();
    if (bin.count >= std::max<std::size_t>(min_count, 1)) {
      std::tie(bin.slope_h, bin.stderr_h) = SlopeThroughOrigin(c.a, c.h);
      std::tie(bin.slope_max, bin.stderr_max) = SlopeThroughOrigin(c.a, c.max);
      std::tie(bin.slope_noise, bin.stderr_noise) =
          SlopeThroughOrigin(c.a, c.noise);
      if (*bin.slope_max != 0.0) bin.ratio = *bin.slope_h / *bin.slope_max;
    }
    out.bins.push_back(bin);
  }
  return out;
}

std::vector<bool> WordHighlightMask(const WordAttribution& words,
                                    std::span<const CharSpan> spans) {
  std::vector<bool> mask(words.words.size(), false);
  for (std::size_t i = 0; i < words.words.size(); ++i) {
    const WordScore& w = words.words[i];
    const std::size_t len = w.char_end - w.char_start;
    if (len == 0) continue;
    std::size_t covered = 0;
    for (std::size_t c = w.char_start; c < w.char_end; ++c) {
      for (const CharSpan& s : spans) {
        if (c >= s.first && c < s.second) {
          ++covered;
          break;
        }
      }
    }
    mask[i] = 2 * covered >= len;
  }
  return mask;
}

std::vector<CharSpan> SplitSentences(std::string_view text) {
  const std::u32string chars = DecodeUtf8(text);
  auto is_space = [](char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' ||
           c == U'\f' || c == U'\v';
  };
  auto is_end = [](char32_t c) { return c == U'.' || c == U'!' || c == U'?'; };
  std::vector<CharSpan> out;
  std::size_t i = 0;
  const std::size_t n = chars.size();
  while (i < n) {
    while (i < n && is_space(chars[i])) ++i;
    if (i >= n) break;
    const std::size_t start = i;
    std::size_t end = n;
    for (std::size_t j = i; j < n; ++j) {
      if (!is_end(chars[j])) continue;
      std::size_t k = j;
      while (k + 1 < n && is_end(chars[k + 1])) ++k;
      if (k + 1 == n || is_space(chars[k + 1])) {
        end = k + 1;
        break;
      }
      j = k;
    }
    out.emplace_back(start, end);
    i = end;
  }
  return out;
}

HighlightRun EvaluateHighlights(GradientOracle& oracle,
                                const std::vector<HighlightDocument>& documents,
                                const HighlightRunOptions& options) {
  struct Job {
    std::size_t doc;
    std::size_t sentence;
    CharSpan span;
  };
  std::vector<Job> jobs;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const HighlightDocument& doc = documents[d];
    const std::vector<CharSpan> sentences =
        doc.sentences.empty() ? SplitSentences(doc.text) : doc.sentences;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      jobs.push_back({d, s, sentences[s]});
    }
  }
  enum class Outcome { kSkipped, kZeroAgency, kAllZero, kDone };
  struct Slot {
    Outcome outcome = Outcome::kSkipped;
    std::vector<HighlightRecord> records;
    std::size_t unhighlighted = 0;
    bool counted = false;
  };
  std::vector<Slot> slots(jobs.size());
  const std::size_t threads = oracle.thread_safe() ? options.threads : 1;
  ParallelFor(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const HighlightDocument& doc = documents[job.doc];
    Slot& slot = slots[j];
    const std::string sentence =
        Utf8Substr(doc.text, job.span.first, job.span.second);
    EmbeddedText e;
    try {
      e = oracle.Embed(sentence);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::kEmptyInput) return;
      throw;
    }
    slot.counted = true;
    std::vector<double> zeros(e.tokens.size(), 0.0);
    const WordAttribution layout = MergeTokensToWords(e.tokens, zeros, 0.0);
    std::vector<std::pair<std::size_t, std::vector<bool>>> masks;
    for (std::size_t r = 0; r < doc.readers.size(); ++r) {
      std::vector<CharSpan> local;
      for (const CharSpan& s : doc.readers[r].spans) {
        const std::size_t lo = std::max(s.first, job.span.first);
        const std::size_t hi = std::min(s.second, job.span.second);
        if (lo < hi) local.emplace_back(lo - job.span.first, hi - job.span.first);
      }
      std::vector<bool> mask = WordHighlightMask(layout, local);
      if (std::find(mask.begin(), mask.end(), true) == mask.end()) {
        ++slot.unhighlighted;
        continue;
      }
      masks.emplace_back(r, std::move(mask));
    }
    if (masks.empty()) return;
    const AttributionVector a =
        Attribute(oracle, e.tokens, e.x, options.attribution, options.target);
    std::vector<double> polished;
    try {
      polished = PolishAttributions(MergeTokensToWords(e.tokens, a.scores, a.f_x));
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::kZeroAgency) {
        slot.outcome = Outcome::kZeroAgency;
        return;
      }
      if (err.kind() == ErrorKind::kAllZeroAfterPolish) {
        slot.outcome = Outcome::kAllZero;
        return;
      }
      throw;
    }
    slot.outcome = Outcome::kDone;
    for (const auto& [r, mask] : masks) {
      NoiseOptions noise = options.noise;
      noise.seed = options.noise.seed + 0x9E3779B97F4A7C15ULL * (j * 1024 + r + 1);
      HighlightRecord rec = HighlightMetrics(polished, mask, noise);
      rec.sentence_id = fmt::format("{}#{}", doc.id, job.sentence);
      rec.reader = doc.readers[r].reader;
      slot.records.push_back(std::move(rec));
    }
  });
  HighlightRun run;
  for (Slot& slot : slots) {
    if (slot.counted) ++run.sentences;
    run.unhighlighted += slot.unhighlighted;
    if (slot.outcome == Outcome::kZeroAgency) ++run.zero_agency;
    if (slot.outcome == Outcome::kAllZero) ++run.all_zero_after_polish;
    for (HighlightRecord& r : slot.records) run.records.push_back(std::move(r));
  }
  return run;
}

std::string HighlightRecordsCsv(std::span<const HighlightRecord> records) {
  std::string out =
      "sentence_id,reader,a,f_h,a_h,a_max,noise,noise_stderr,words,"
      "highlighted\n";
  for (const HighlightRecord& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n",
                       CsvField(r.sentence_id), CsvField(r.reader), r.a, r.f_h,
                       r.a_h, r.a_max, r.noise, r.noise_stderr, r.words,
                       r.highlighted);
  }
  return out;
}

std::string SlopesCsv(const BinnedSlopes& slopes) {
  auto cell = [](const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string();
  };
  std::string out =
      "f_lo,f_hi,count,slope_h,slope_max,ratio,slope_noise,stderr_h,"
      "stderr_max,stderr_noise\n";
  for (const SlopeBin& b : slopes.bins) {
    out += fmt::format("{:.1f},{:.1f},{},{},{},{},{},{},{},{}\n", b.lo, b.hi,
                       b.count, cell(b.slope_h), cell(b.slope_max),
                       cell(b.ratio), cell(b.slope_noise), cell(b.stderr_h),
                       cell(b.stderr_max), cell(b.stderr_noise));
  }
  return out;
}

std::string FhHistogramCsv(std::span<const HighlightRecord> records,
                           std::size_t n_bins) {
  std::vector<std::size_t> counts(n_bins, 0);
  for (const HighlightRecord& r : records) ++counts[FhBin(r.f_h, n_bins)];
  std::string out = "f_lo,f_hi,count\n";
  for (std::size_t k = 0; k < n_bins; ++k) {
    out += fmt::format("{:.2f},{:.2f},{}\n",
                       static_cast<double>(k) / static_cast<double>(n_bins),
                       static_cast<double>(k + 1) / static_cast<double>(n_bins),
                       counts[k]);
  }
  return out;
}

}  // namespace lexattr
