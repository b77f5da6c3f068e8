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


#ifndef LEXATTR_TOOLS_CLI_CONFIG_H_
#define LEXATTR_TOOLS_CLI_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lexattr/attribution.h"
#include "lexattr/faithfulness.h"
#include "lexattr/highlight.h"
#include "lexattr/model.h"
#include "lexattr/saliency.h"
#include "lexattr/trainer.h"

namespace lexattr::cli {

enum class OracleKind { kBuiltin, kExternal };

struct OracleConfig {
  OracleKind kind = OracleKind::kBuiltin;
  // Builtin: a saved parameter file, or a fresh model from arch + seed.
  ArchConfig arch;
  std::uint64_t seed = 1;
  std::string params_path;
  // External.
  std::string command;
  int timeout_ms = 30000;
};

// attach heuristically, use the corpus dependency annotations, or skip.
enum class NegationMode { kAuto, kHeuristic, kAnnotations, kOff };

struct RunConfig {
  OracleConfig oracle;
  Method method = Method::kIntegratedGradients;
  BaselineKind baseline = BaselineKind::kZero;
  std::size_t steps = 300;
  QuadratureKind quadrature = QuadratureKind::kTrapezoid;
  std::vector<double> f_grid = FractionGrid::Default().values;
  std::uint64_t seed = 0;
  std::string output_dir = "lexattr-out";
  SelectionLevel level = SelectionLevel::kToken;
  RemovalMode removal = RemovalMode::kDelete;
  std::optional<std::size_t> target;
  std::size_t shap_samples = 50;
  std::optional<double> shap_noise;
  std::size_t batch_size = 32;
  bool clean = true;

  // faithfulness sweeps; empty lists fall back to the single settings above
  std::vector<Method> sweep_methods;
  std::vector<BaselineKind> sweep_baselines;
  std::vector<std::size_t> sweep_steps;

  // render
  std::optional<double> global_scale;
  NegationMode negation = NegationMode::kAuto;

  // extract
  std::size_t top_k = 20;
  Aggregation aggregation = Aggregation::kSum;
  NaPolicy na_policy = NaPolicy::kExclude;
  std::vector<LabelBin> bins;
  TrainerConfig trainer;

  // highlights
  NoiseMode noise = NoiseMode::kAnalytic;
  std::size_t noise_draws = 10000;
  bool per_reader = false;
};

// Missing keys keep their defaults. Unknown keys and bad values throw
// Error(kValidation). "fidelity": true switches the default quadrature to
// paper-eq6.
RunConfig ParseRunConfig(const std::string& json_text);
RunConfig LoadRunConfig(const std::string& path);

// Rejects inconsistent settings before any oracle is contacted.
void ValidateRunConfig(const RunConfig& config);

// Fully resolved config, pretty-printed with sorted keys.
std::string RunConfigToJson(const RunConfig& config);

AttributionSettings MakeAttributionSettings(const RunConfig& config);

}  // namespace lexattr::cli

#endif  // LEXATTR_TOOLS_CLI_CONFIG_H_
