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

#include "lexattr/oracle.h"

#include "lexattr/errors.h"

namespace lexattr {

std::vector<double> TableMean(const Matrix& table) {
  std::vector<double> mean(table.cols(), 0.0);
  if (table.rows() == 0) return mean;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto row = table.row(r);
    for (std::size_t c = 0; c < table.cols(); ++c) mean[c] += row[c];
  }
  for (double& v : mean) v /= static_cast<double>(table.rows());
  return mean;
}

BuiltinOracle::BuiltinOracle(ModelParams params) : params_(std::move(params)) {
  descriptor_.embedding_dim = params_.arch.embedding_dim;
  descriptor_.head = params_.arch.head;
  descriptor_.n_classes = params_.arch.output_dim();
  descriptor_.vocab_policy = "closed-vocabulary, unknown tokens map to <unk>";
  auto row = [&](std::size_t id) {
    auto r = params_.embeddings.row(id);
    return std::vector<double>(r.begin(), r.end());
  };
  descriptor_.mask_embedding = row(Vocabulary::kMaskId);
  descriptor_.pad_embedding = row(Vocabulary::kPadId);
  descriptor_.mean_embedding = TableMean(params_.embeddings);
}

EmbeddedText BuiltinOracle::Embed(std::string_view text) {
  EmbeddedText out;
  out.tokens = Tokenize(text, params_.arch.tokenizer);
  out.x = lexattr::Embed(out.tokens, params_);
  return out;
}

std::vector<ModelOutput> BuiltinOracle::EvaluateBatch(
    std::span<const EmbeddingMatrix> xs, const Target& target,
    bool want_gradient) {
  std::vector<ModelOutput> out;
  out.reserve(xs.size());
  for (const EmbeddingMatrix& x : xs) {
    out.push_back(want_gradient ? Gradient(x, params_, target)
                                : Forward(x, params_, target));
  }
  return out;
}

}  // namespace lexattr
