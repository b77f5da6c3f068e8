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

#include "lexattr/trainer.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "lexattr/errors.h"

namespace lexattr {
namespace {

struct Encoded {
  std::vector<std::size_t> ids;
  EmbeddingMatrix x;
  double label;
};

struct Grads {
  Matrix embeddings, w1, w2, head;
  std::vector<double> b1, b2, head_bias;

  explicit Grads(const ModelParams& p)
      : embeddings(p.embeddings.rows(), p.embeddings.cols()),
        w1(p.w1.rows(), p.w1.cols()),
        w2(p.w2.rows(), p.w2.cols()),
        head(p.head.rows(), p.head.cols()),
        b1(p.b1.size()),
        b2(p.b2.size()),
        head_bias(p.head_bias.size()) {}
};

void AddOuter(Matrix& m, std::span<const double> left,
              std::span<const double> right) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (left[r] == 0.0) continue;
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) row[c] += left[r] * right[c];
  }
}

std::vector<double> TransposeTimes(const Matrix& w, std::span<const double> in) {
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto row = w.row(r);
    for (std::size_t c = 0; c < w.cols(); ++c) out[c] += in[r] * row[c];
  }
  return out;
}

void Step(Matrix& w, const Matrix& g, double lr) {
  auto wv = w.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < wv.size(); ++i) wv[i] -= lr * gv[i];
}

void Step(std::vector<double>& w, const std::vector<double>& g, double lr) {
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
}

void Accumulate(std::vector<double>& sum, const std::vector<double>& v) {
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
}

bool IsCorrect(const ModelParams& p, const std::vector<double>& out,
               double label, double tol) {
  if (p.arch.head == HeadKind::kScalar) return std::abs(out[0] - label) < tol;
  const auto best = static_cast<std::size_t>(
      std::max_element(out.begin(), out.end()) - out.begin());
  return best == static_cast<std::size_t>(label);
}

// Accumulates loss gradients for one example; returns (loss, correct).
std::pair<double, bool> Backprop(const ModelParams& p, const Encoded& ex,
                                 double weight, double tol, Grads& g) {
  const ForwardTrace t = Trace(ex.x, p);
  const Activation act = p.arch.activation;
  std::vector<double> g_out(t.out.size(), 0.0);
  double loss;
  if (p.arch.head == HeadKind::kScalar) {
    const double r = t.out[0] - ex.label;
    loss = 0.5 * r * r;
    g_out[0] = r;
  } else {
    const double peak = *std::max_element(t.out.begin(), t.out.end());
    double norm = 0.0;
    for (double o : t.out) norm += std::exp(o - peak);
    const auto y = static_cast<std::size_t>(ex.label);
    loss = -(t.out[y] - peak - std::log(norm));
    for (std::size_t c = 0; c < t.out.size(); ++c) {
      g_out[c] = std::exp(t.out[c] - peak) / norm - (c == y ? 1.0 : 0.0);
    }
  }
  for (double& v : g_out) v *= weight;

  AddOuter(g.head, g_out, t.h2);
  Accumulate(g.head_bias, g_out);
  std::vector<double> g_z2 = TransposeTimes(p.head, g_out);
  for (std::size_t j = 0; j < g_z2.size(); ++j) {
    g_z2[j] *= ActivationDerivative(act, t.z2[j]);
  }
  AddOuter(g.w2, g_z2, t.h1);
  Accumulate(g.b2, g_z2);
  std::vector<double> g_z1 = TransposeTimes(p.w2, g_z2);
  for (std::size_t j = 0; j < g_z1.size(); ++j) {
    g_z1[j] *= ActivationDerivative(act, t.z1[j]);
  }
  AddOuter(g.w1, g_z1, t.pooled);
  Accumulate(g.b1, g_z1);
  if (t.pooled_rows > 0) {
    std::vector<double> g_pool = TransposeTimes(p.w1, g_z1);
    const double inv = 1.0 / static_cast<double>(t.pooled_rows);
    for (std::size_t i = 0; i < ex.ids.size(); ++i) {
      if (ex.x.is_padding(i)) continue;
      auto row = g.embeddings.row(ex.ids[i]);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += g_pool[c] * inv;
    }
  }
  return {loss, IsCorrect(p, t.out, ex.label, tol)};
}

void Validate(const std::vector<TrainingExample>& examples,
              const ArchConfig& arch) {
  if (examples.empty()) {
    throw Error(ErrorKind::kValidation, "training corpus is empty");
  }
  if (arch.head == HeadKind::kScalar) return;
  std::set<std::size_t> seen;
  for (const TrainingExample& ex : examples) {
    if (ex.label < 0 || ex.label != std::floor(ex.label) ||
        ex.label >= static_cast<double>(arch.n_classes)) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("label {} outside [0, {})", ex.label,
                              arch.n_classes));
    }
    seen.insert(static_cast<std::size_t>(ex.label));
  }
  if (arch.n_classes < 2 || seen.size() != arch.n_classes) {
    throw Error(ErrorKind::kValidation,
                "need >= 2 classes and at least one example per class");
  }
}

}  // namespace

TrainResult TrainOverfit(const std::vector<TrainingExample>& examples,
                         const ArchConfig& arch, const TrainerConfig& config) {
  Validate(examples, arch);
  std::vector<std::string> texts;
  texts.reserve(examples.size());
  for (const auto& ex : examples) texts.push_back(ex.text);
  TrainResult result{InitParams(arch, Vocabulary::FromTexts(texts, arch.tokenizer),
                                config.seed),
                     {}};
  ModelParams& p = result.params;

  std::vector<Encoded> data;
  data.reserve(examples.size());
  for (const auto& ex : examples) {
    const TokenizedText tokens = Tokenize(ex.text, arch.tokenizer);
    Encoded e{{}, Embed(tokens, p), ex.label};
    for (const Token& t : tokens.tokens) e.ids.push_back(p.vocab.IdOf(t));
    data.push_back(std::move(e));
  }

  const double weight = 1.0 / static_cast<double>(data.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 0;; ++epoch) {
    // Embedding rows change every step, so re-gather them.
    for (Encoded& e : data) {
      for (std::size_t i = 0; i < e.ids.size(); ++i) {
        auto src = p.embeddings.row(e.ids[i]);
        std::copy(src.begin(), src.end(), e.x.values.row(i).begin());
      }
    }
    Grads g(p);
    double loss = 0.0;
    std::size_t correct = 0;
    for (const Encoded& e : data) {
      const auto [l, ok] = Backprop(p, e, weight, config.scalar_tolerance, g);
      loss += l * weight;
      correct += ok ? 1 : 0;
    }
    best = std::min(best, loss);
    result.trace.loss.push_back(loss);
    result.trace.best_loss.push_back(best);
    result.trace.accuracy =
        static_cast<double>(correct) / static_cast<double>(data.size());
    if (correct == data.size()) {
      result.trace.epochs = epoch;
      return result;
    }
    if (epoch == config.max_epochs) break;
    const double lr = config.learning_rate;
    Step(p.embeddings, g.embeddings, lr);
    Step(p.w1, g.w1, lr);
    Step(p.b1, g.b1, lr);
    Step(p.w2, g.w2, lr);
    Step(p.b2, g.b2, lr);
    Step(p.head, g.head, lr);
    Step(p.head_bias, g.head_bias, lr);
  }
  throw Error(ErrorKind::kNotConverged,
              fmt::format("training accuracy {:.4f} after max_epochs={}",
                          result.trace.accuracy, config.max_epochs));
}

double TrainingAccuracy(const ModelParams& params,
                        const std::vector<TrainingExample>& examples,
                        double scalar_tolerance) {
  if (examples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    const EmbeddingMatrix x =
        Embed(Tokenize(ex.text, params.arch.tokenizer), params);
    correct += IsCorrect(params, Trace(x, params).out, ex.label,
                         scalar_tolerance)
                   ? 1
                   : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace lexattr
