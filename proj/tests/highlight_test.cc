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


#include <gtest/gtest.h>

#include <cmath>

#include "lexattr/errors.h"
#include "lexattr/highlight.h"
#include "lexattr/stats.h"
#include "test_util.h"

namespace lexattr {
namespace {

WordAttribution Words(std::vector<double> scores, double f_x) {
  WordAttribution wa;
  wa.f_x = f_x;
  std::size_t at = 0;
  for (double s : scores) {
    WordScore w;
    w.surface = "w";
    w.score = s;
    w.char_start = at;
    w.char_end = at + 4;
    at += 5;
    wa.words.push_back(w);
  }
  return wa;
}

TEST(PolishTest, ZeroesAndRescalesToOutput) {
  const std::vector<double> p = PolishAttributions(Words({0.2, -0.1, 0.6}, 2.0));
  ASSERT_EQ(p.size(), 3u);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_DOUBLE_EQ(p[2], 1.5);
  const std::vector<double> n = PolishAttributions(Words({0.2, -0.1, -0.3}, -1.0));
  EXPECT_EQ(n[0], 0.0);
  EXPECT_DOUBLE_EQ(n[1], -0.25);
  EXPECT_DOUBLE_EQ(n[2], -0.75);
}

TEST(PolishTest, Failures) {
  try {
    PolishAttributions(Words({1.0}, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kZeroAgency);
  }
  try {
    PolishAttributions(Words({-1.0, -2.0}, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAllZeroAfterPolish);
  }
}

TEST(MetricsTest, WorkedExample) {
  const std::vector<double> p = {0.5, 0.0, 1.5, 0.25};
  const HighlightRecord r = HighlightMetrics(p, {true, true, false, false}, {});
  EXPECT_EQ(r.a, 2.25);
  EXPECT_EQ(r.f_h, 0.5);
  EXPECT_EQ(r.a_h, 0.5);
  EXPECT_EQ(r.a_max, 2.0);
  EXPECT_EQ(r.noise, 1.125);
  EXPECT_EQ(r.words, 4u);
  EXPECT_EQ(r.highlighted, 2u);
  EXPECT_TRUE(OrderingHolds(r));
  EXPECT_THROW(HighlightMetrics(p, {false, false, false, false}, {}), Error);
  EXPECT_THROW(HighlightMetrics(p, {true}, {}), Error);
}

TEST(MetricsTest, OrderingHoldsOnRandomPolishedVectors) {
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t m = 1 + rng.Index(30);
    std::vector<double> s(m);
    for (double& v : s) v = rng.Normal() * std::pow(10.0, rng.Normal() * 3);
    const double f = rng.Uniform() < 0.5 ? -1.0 - rng.Uniform() : 1e-3 + rng.Uniform();
    s[0] = std::copysign(std::abs(s[0]) + 1e-6, f);
    const std::vector<double> p = PolishAttributions(Words(s, f));
    std::vector<bool> mask(m);
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) any |= (mask[i] = rng.Uniform() < 0.4);
    if (!any) mask[rng.Index(m)] = true;
    EXPECT_TRUE(OrderingHolds(HighlightMetrics(p, mask, {})));
  }
}

TEST(MetricsTest, MonteCarloMatchesAnalytic) {
  const std::vector<double> p = {0.1, 0.7, 0.0, 0.3, 0.9, 0.05};
  NoiseOptions mc{NoiseMode::kMonteCarlo, 20000, 4};
  const HighlightRecord r = HighlightMetrics(p, {true, false, true, false, false, false}, mc);
  const double analytic = (2.0 / 6.0) * ExactSum(p);
  EXPECT_GT(r.noise_stderr, 0.0);
  EXPECT_LT(std::abs(r.noise - analytic), 4.0 * r.noise_stderr);
  const HighlightRecord again =
      HighlightMetrics(p, {true, false, true, false, false, false}, mc);
  EXPECT_EQ(r.noise, again.noise);
}

TEST(SlopeTest, ThroughOrigin) {
  const std::vector<double> a = {1, 2, 3};
  const std::vector<double> y = {2, 4, 6};
  auto [slope, se] = SlopeThroughOrigin(a, y);
  EXPECT_DOUBLE_EQ(slope, 2.0);
  EXPECT_EQ(se, 0.0);
  const std::vector<double> y2 = {1, 3, 3};
  std::tie(slope, se) = SlopeThroughOrigin(a, y2);
  EXPECT_DOUBLE_EQ(slope, 16.0 / 14.0);
  double res = 0.0;
  for (int i = 0; i < 3; ++i) res += std::pow(y2[i] - slope * a[i], 2);
  EXPECT_DOUBLE_EQ(se, std::sqrt(res / 2.0 / 14.0));
}

TEST(SlopeTest, BinsAreRightClosed) {
  EXPECT_EQ(FhBin(0.1, 10), 0u);
  EXPECT_EQ(FhBin(0.3, 10), 2u);
  EXPECT_EQ(FhBin(0.30001, 10), 3u);
  EXPECT_EQ(FhBin(1.0, 10), 9u);
  EXPECT_EQ(FhBin(0.05, 10), 0u);
}

TEST(SlopeTest, FitSlopesPerBin) {
  std::vector<HighlightRecord> records;
  for (int i = 1; i <= 4; ++i) {
    HighlightRecord r;
    r.a = i;
    r.f_h = 0.25;
    r.a_h = 0.5 * i;
    r.a_max = i;
    r.noise = 0.25 * i;
    records.push_back(r);
  }
  HighlightRecord lone;
  lone.a = 1;
  lone.f_h = 0.9;
  records.push_back(lone);
  const BinnedSlopes b = FitSlopes(records);
  ASSERT_EQ(b.bins.size(), 10u);
  EXPECT_EQ(b.bins[2].count, 4u);
  EXPECT_DOUBLE_EQ(*b.bins[2].slope_h, 0.5);
  EXPECT_DOUBLE_EQ(*b.bins[2].slope_noise, 0.25);
  EXPECT_DOUBLE_EQ(*b.bins[2].ratio, 0.5);
  EXPECT_EQ(b.bins[8].count, 1u);
  EXPECT_FALSE(b.bins[8].slope_h.has_value());
  const std::string csv = SlopesCsv(b);
  EXPECT_NE(csv.find("0.2,0.3,4,0.5,1,0.5,0.25,0,0,0"), std::string::npos);
  EXPECT_NE(csv.find("0.8,0.9,1,,,,,,,"), std::string::npos);
  const std::string hist = FhHistogramCsv(records);
  EXPECT_NE(hist.find("0.20,0.30,4"), std::string::npos);
}

TEST(MaskTest, HalfCoverageCounts) {
  const WordAttribution wa = Words({0, 0, 0}, 1.0);  // [0,4) [5,9) [10,14)
  const std::vector<CharSpan> spans = {{2, 4}, {5, 6}};
  EXPECT_EQ(WordHighlightMask(wa, spans), (std::vector<bool>{true, false, false}));
  const std::vector<CharSpan> all = {{0, 14}};
  EXPECT_EQ(WordHighlightMask(wa, all), (std::vector<bool>{true, true, true}));
}

TEST(SplitTest, TerminalRunsFollowedBySpace) {
  const std::string text = "It works... Really?! Yes.no  end";
  const std::vector<CharSpan> s = SplitSentences(text);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], CharSpan(0, 11));
  EXPECT_EQ(s[1], CharSpan(12, 20));
  EXPECT_EQ(s[2], CharSpan(21, 32));
  EXPECT_TRUE(SplitSentences("   ").empty());
  EXPECT_EQ(SplitSentences("é! b").size(), 2u);
  EXPECT_EQ(SplitSentences("é! b")[1], CharSpan(3, 4));
}

TEST(EvaluateTest, RecordsPerReader) {
  BuiltinOracle oracle(testing::FillerModel(testing::SmallArch(), 3));
  HighlightDocument doc;
  doc.id = "d";
  doc.text = "the cat sat. a dog ran far.";
  doc.readers = {{"r1", {{4, 7}}}, {"r2", {{13, 18}, {0, 3}}}, {"r3", {}}};
  HighlightRunOptions opt;
  opt.attribution.rule = {QuadratureKind::kTrapezoid, 50};
  const HighlightRun run = EvaluateHighlights(oracle, {doc}, opt);
  EXPECT_EQ(run.sentences, 2u);
  EXPECT_EQ(run.unhighlighted, 3u);
  ASSERT_EQ(run.records.size(), 3u);
  EXPECT_EQ(run.records[0].highlighted, 1u);
  for (const HighlightRecord& r : run.records) {
    EXPECT_TRUE(OrderingHolds(r));
    EXPECT_TRUE(r.sentence_id == "d#0" || r.sentence_id == "d#1");
    EXPECT_NE(r.reader, "r3");
  }
  const std::string csv = HighlightRecordsCsv(run.records);
  EXPECT_EQ(csv.rfind("sentence_id,reader,a,f_h,a_h,a_max,noise,noise_stderr,words,highlighted\n", 0), 0u);
}

}  // namespace
}  // namespace lexattr
