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

#ifndef LEXATTR_STATS_H_
#define LEXATTR_STATS_H_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace lexattr {

// Box-plot summary: linear-interpolated quartiles and Tukey fences.
struct QuartileSummary {
  std::size_t count = 0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double lower_fence = 0.0;
  double upper_fence = 0.0;
  std::size_t outliers = 0;
  double mean = 0.0;
};

// Quantile with linear interpolation between order statistics (the
// "type 7" definition). `sorted` must be ascending and non-empty.
double Quantile(std::span<const double> sorted, double q);

QuartileSummary Summarize(std::vector<double> values);

double Mean(std::span<const double> values);
// Correctly rounded sum of the values (Shewchuk partials), independent of
// their order.
double ExactSum(std::span<const double> values);
double Median(std::vector<double> values);

// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots for order stability.
void ParallelFor(std::size_t n, std::size_t threads,
                 const std::function<void(std::size_t)>& body);

}  // namespace lexattr

#endif  // LEXATTR_STATS_H_
