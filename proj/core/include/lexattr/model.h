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

#ifndef LEXATTR_MODEL_H_
#define LEXATTR_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lexattr/matrix.h"
#include "lexattr/text.h"

namespace lexattr {

enum class Activation { kTanh, kIdentity };
enum class HeadKind { kScalar, kClasses };

// Selected output: a class index for k-class heads, nothing for the scalar
// head.
using Target = std::optional<std::size_t>;

struct ArchConfig {
  std::size_t embedding_dim = 16;
  std::size_t hidden_dim = 16;
  Activation activation = Activation::kTanh;
  HeadKind head = HeadKind::kScalar;
  std::size_t n_classes = 1;
  // Stdev of the initial embedding rows; layer weights use 1/sqrt(fan_in).
  double embedding_init_scale = 1.0;
  TokenizerConfig tokenizer;

  std::size_t output_dim() const {
    return head == HeadKind::kScalar ? 1 : n_classes;
  }
};

// Reference network: embedding lookup -> masked mean-pool over non-PAD rows
// -> two dense layers with `activation` -> linear head.
struct ModelParams {
  ArchConfig arch;
  std::uint64_t seed = 0;
  Vocabulary vocab;
  Matrix embeddings;  // V x d
  Matrix w1;          // h x d
  std::vector<double> b1;
  Matrix w2;  // h x h
  std::vector<double> b2;
  Matrix head;  // k x h
  std::vector<double> head_bias;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.seed == b.seed && a.vocab == b.vocab &&
           a.embeddings == b.embeddings && a.w1 == b.w1 && a.b1 == b.b1 &&
           a.w2 == b.w2 && a.b2 == b.b2 && a.head == b.head &&
           a.head_bias == b.head_bias;
  }
};

struct ModelOutput {
  double value = 0.0;
  std::optional<EmbeddingMatrix> gradient;
};

// Intermediate quantities of one forward pass. DeepLIFT consumes these.
struct ForwardTrace {
  std::size_t pooled_rows = 0;
  std::vector<double> pooled;  // d
  std::vector<double> z1, h1;  // h
  std::vector<double> z2, h2;  // h
  std::vector<double> out;     // k
};

ModelParams InitParams(const ArchConfig& arch, Vocabulary vocab,
                       std::uint64_t seed);

double Activate(Activation act, double z);
double ActivationDerivative(Activation act, double z);

EmbeddingMatrix Embed(const TokenizedText& tokens, const ModelParams& params);

// Throws Error(kShapeError) for shape or target mismatches.
void CheckInput(const EmbeddingMatrix& x, const ModelParams& params,
                const Target& target);
std::size_t OutputIndex(const ModelParams& params, const Target& target);

ForwardTrace Trace(const EmbeddingMatrix& x, const ModelParams& params);
ModelOutput Forward(const EmbeddingMatrix& x, const ModelParams& params,
                    const Target& target);
// Value plus the exact derivative of the value w.r.t. every entry of x.
ModelOutput Gradient(const EmbeddingMatrix& x, const ModelParams& params,
                     const Target& target);

// Gradient of the selected output w.r.t. the pooled vector.
std::vector<double> PooledGradient(const ForwardTrace& trace,
                                   const ModelParams& params,
                                   std::size_t output_index);

std::string ArchToJson(const ArchConfig& arch);
ArchConfig ArchFromJson(const std::string& json);

// Versioned JSON; doubles round-trip bit-exactly.
std::string SaveParams(const ModelParams& params);
ModelParams LoadParams(const std::string& json);
void SaveParamsFile(const ModelParams& params, const std::string& path);
ModelParams LoadParamsFile(const std::string& path);

}  // namespace lexattr

#endif  // LEXATTR_MODEL_H_
