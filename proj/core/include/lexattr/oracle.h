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

#ifndef LEXATTR_ORACLE_H_
#define LEXATTR_ORACLE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexattr/matrix.h"
#include "lexattr/model.h"
#include "lexattr/text.h"

namespace lexattr {

inline constexpr int kProtocolVersion = 1;

// What a gradient oracle told us about itself during the handshake.
struct OracleDescriptor {
  int version = kProtocolVersion;
  std::size_t embedding_dim = 0;
  HeadKind head = HeadKind::kScalar;
  std::size_t n_classes = 1;
  std::string vocab_policy;
  // Reference rows for baselines; absent when the oracle cannot supply them.
  std::optional<std::vector<double>> mask_embedding;
  std::optional<std::vector<double>> pad_embedding;
  std::optional<std::vector<double>> mean_embedding;
};

struct EmbeddedText {
  TokenizedText tokens;
  EmbeddingMatrix x;
};

// Anything that answers (value, gradient) queries at arbitrary points in
// embedding space. Implementations need not be thread-safe unless
// thread_safe() says so.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual const OracleDescriptor& descriptor() = 0;
  virtual EmbeddedText Embed(std::string_view text) = 0;
  // One output per input matrix, all evaluated for the same target.
  virtual std::vector<ModelOutput> EvaluateBatch(
      std::span<const EmbeddingMatrix> xs, const Target& target,
      bool want_gradient) = 0;

  ModelOutput Evaluate(const EmbeddingMatrix& x, const Target& target,
                       bool want_gradient) {
    return std::move(EvaluateBatch({&x, 1}, target, want_gradient).front());
  }

  // Layer internals, available only for the in-process reference model.
  virtual const ModelParams* builtin_params() const { return nullptr; }
  virtual bool thread_safe() const { return false; }
};

// Wraps the reference model. Pure and safe for concurrent use.
class BuiltinOracle : public GradientOracle {
 public:
  explicit BuiltinOracle(ModelParams params);

  const OracleDescriptor& descriptor() override { return descriptor_; }
  EmbeddedText Embed(std::string_view text) override;
  std::vector<ModelOutput> EvaluateBatch(std::span<const EmbeddingMatrix> xs,
                                         const Target& target,
                                         bool want_gradient) override;
  const ModelParams* builtin_params() const override { return &params_; }
  bool thread_safe() const override { return true; }

  const ModelParams& params() const { return params_; }

 private:
  ModelParams params_;
  OracleDescriptor descriptor_;
};

// Mean over every row of an embedding table.
std::vector<double> TableMean(const Matrix& table);

// Counts evaluated matrices; forwards everything else.
class CountingOracle : public GradientOracle {
 public:
  explicit CountingOracle(GradientOracle& inner) : inner_(inner) {}

  const OracleDescriptor& descriptor() override { return inner_.descriptor(); }
  EmbeddedText Embed(std::string_view text) override {
    return inner_.Embed(text);
  }
  std::vector<ModelOutput> EvaluateBatch(std::span<const EmbeddingMatrix> xs,
                                         const Target& target,
                                         bool want_gradient) override {
    evaluations_ += xs.size();
    ++batches_;
    return inner_.EvaluateBatch(xs, target, want_gradient);
  }
  const ModelParams* builtin_params() const override {
    return inner_.builtin_params();
  }

  std::size_t evaluations() const { return evaluations_; }
  std::size_t batches() const { return batches_; }

 private:
  GradientOracle& inner_;
  std::size_t evaluations_ = 0;
  std::size_t batches_ = 0;
};

}  // namespace lexattr

#endif  // LEXATTR_ORACLE_H_
