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

#ifndef LEXATTR_TRAINER_H_
#define LEXATTR_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lexattr/model.h"

namespace lexattr {

struct TrainerConfig {
  double learning_rate = 1.0;
  std::size_t max_epochs = 500;
  std::uint64_t seed = 1;
  // Scalar head only: converged once every |prediction - label| is below this.
  double scalar_tolerance = 0.05;
};

// `label` is a class index for k-class heads and a real target for the
// scalar head.
struct TrainingExample {
  std::string text;
  double label = 0.0;
};

struct TrainingTrace {
  // Number of gradient steps taken before accuracy 1.0 was observed.
  std::size_t epochs = 0;
  std::vector<double> loss;       // loss before each step, plus the final one
  std::vector<double> best_loss;  // running minimum of `loss`
  double accuracy = 0.0;
};

struct TrainResult {
  ModelParams params;
  TrainingTrace trace;
};

// Deliberately overfits: full-batch gradient descent with a fixed step on
// cross-entropy (classes) or squared error (scalar), using every example,
// until training accuracy is 1.0. The vocabulary is built from the examples.
// Throws Error(kNotConverged) after max_epochs, Error(kValidation) on bad
// input.
TrainResult TrainOverfit(const std::vector<TrainingExample>& examples,
                         const ArchConfig& arch, const TrainerConfig& config);

// Fraction of examples classified correctly (classes) or within tolerance
// (scalar).
double TrainingAccuracy(const ModelParams& params,
                        const std::vector<TrainingExample>& examples,
                        double scalar_tolerance = 0.05);

}  // namespace lexattr

#endif  // LEXATTR_TRAINER_H_
