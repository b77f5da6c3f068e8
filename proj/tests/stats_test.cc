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


#include <atomic>
#include <stdexcept>

#include <gtest/gtest.h>

#include "lexattr/stats.h"

namespace lexattr {
namespace {

TEST(StatsTest, QuantilesInterpolate) {
  const std::vector<double> v = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(Quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(Quantile(v, 0.25), 1.75);
  const QuartileSummary s = Summarize({1, 2, 3, 4, 100});
  EXPECT_DOUBLE_EQ(s.median, 3.0);
  EXPECT_EQ(s.outliers, 1u);
  EXPECT_DOUBLE_EQ(s.mean, 22.0);
  EXPECT_EQ(Summarize({}).count, 0u);
}

TEST(StatsTest, ExactSumIsCorrectlyRounded) {
  EXPECT_EQ(ExactSum(std::vector<double>{1e100, 1.0, -1e100}), 1.0);
  EXPECT_EQ(ExactSum(std::vector<double>{0.1, 0.2, 0.3}), 0.6);
  const std::vector<double> a = {0.1, 0.7, 1e-17, 3.3};
  const std::vector<double> b = {3.3, 1e-17, 0.7, 0.1};
  EXPECT_EQ(ExactSum(a), ExactSum(b));
  std::vector<double> twice = a;
  twice.insert(twice.end(), a.begin(), a.end());
  EXPECT_EQ(ExactSum(twice), 2.0 * ExactSum(a));
  EXPECT_EQ(ExactSum(std::vector<double>{}), 0.0);
}

TEST(StatsTest, ParallelForCoversEveryIndex) {
  std::vector<int> hits(100, 0);
  ParallelFor(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(StatsTest, ParallelForRethrows) {
  EXPECT_THROW(ParallelFor(10, 3,
                           [](std::size_t i) {
                             if (i == 7) throw std::runtime_error("boom");
                           }),
               std::runtime_error);
}

}  // namespace
}  // namespace lexattr
