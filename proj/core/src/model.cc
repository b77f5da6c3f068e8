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

#include "lexattr/model.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lexattr/errors.h"
#include "lexattr/rng.h"

namespace lexattr {
namespace {

using nlohmann::json;

constexpr int kParamsFormatVersion = 1;

Matrix RandomMatrix(std::size_t rows, std::size_t cols, double stdev,
                    Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.Normal(0.0, stdev);
  return m;
}

void Affine(const Matrix& w, std::span<const double> in,
            const std::vector<double>& bias, std::vector<double>& out) {
  out.assign(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    out[r] = bias[r] + Dot(w.row(r), in);
  }
}

// out = w^T * in
std::vector<double> TransposeTimes(const Matrix& w, std::span<const double> in) {
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double g = in[r];
    if (g == 0.0) continue;
    auto row = w.row(r);
    for (std::size_t c = 0; c < w.cols(); ++c) out[c] += g * row[c];
  }
  return out;
}

json MatrixToJson(const Matrix& m) {
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", std::vector<double>(m.values().begin(),
                                           m.values().end())}};
}

Matrix MatrixFromJson(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.size()) {
    throw Error(ErrorKind::kValidation, "matrix data length mismatch");
  }
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

std::string_view ActivationName(Activation a) {
  return a == Activation::kTanh ? "tanh" : "identity";
}

Activation ParseActivation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity") return Activation::kIdentity;
  throw Error(ErrorKind::kValidation, "unknown activation '" + s + "'");
}

json ArchJson(const ArchConfig& a) {
  return json{{"embedding_dim", a.embedding_dim},
              {"hidden_dim", a.hidden_dim},
              {"activation", ActivationName(a.activation)},
              {"head", a.head == HeadKind::kScalar ? "scalar" : "classes"},
              {"n_classes", a.n_classes},
              {"embedding_init_scale", a.embedding_init_scale},
              {"max_chunk", a.tokenizer.max_chunk}};
}

ArchConfig ArchFromJsonValue(const json& j) {
  ArchConfig a;
  a.embedding_dim = j.value("embedding_dim", a.embedding_dim);
  a.hidden_dim = j.value("hidden_dim", a.hidden_dim);
  a.activation = ParseActivation(j.value("activation", std::string("tanh")));
  const std::string head = j.value("head", std::string("scalar"));
  if (head == "scalar") {
    a.head = HeadKind::kScalar;
  } else if (head == "classes") {
    a.head = HeadKind::kClasses;
  } else {
    throw Error(ErrorKind::kValidation, "unknown head '" + head + "'");
  }
  a.n_classes = j.value("n_classes", a.head == HeadKind::kScalar
                                         ? std::size_t{1}
                                         : a.n_classes);
  a.embedding_init_scale =
      j.value("embedding_init_scale", a.embedding_init_scale);
  a.tokenizer.max_chunk = j.value("max_chunk", a.tokenizer.max_chunk);
  if (a.embedding_dim == 0 || a.hidden_dim == 0 || a.n_classes == 0 ||
      a.tokenizer.max_chunk == 0) {
    throw Error(ErrorKind::kValidation, "architecture sizes must be positive");
  }
  return a;
}

}  // namespace

ModelParams InitParams(const ArchConfig& arch, Vocabulary vocab,
                       std::uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.arch = arch;
  p.seed = seed;
  p.vocab = std::move(vocab);
  const std::size_t d = arch.embedding_dim;
  const std::size_t h = arch.hidden_dim;
  const std::size_t k = arch.output_dim();
  p.embeddings = RandomMatrix(p.vocab.size(), d, arch.embedding_init_scale, rng);
  p.w1 = RandomMatrix(h, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  p.b1.assign(h, 0.0);
  p.w2 = RandomMatrix(h, h, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  p.b2.assign(h, 0.0);
  p.head = RandomMatrix(k, h, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  p.head_bias.assign(k, 0.0);
  return p;
}

double Activate(Activation act, double z) {
  return act == Activation::kTanh ? std::tanh(z) : z;
}

double ActivationDerivative(Activation act, double z) {
  if (act == Activation::kIdentity) return 1.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

EmbeddingMatrix Embed(const TokenizedText& tokens, const ModelParams& params) {
  const std::size_t d = params.arch.embedding_dim;
  EmbeddingMatrix x(tokens.size(), d);
  bool any_pad = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::size_t id = params.vocab.IdOf(tokens.tokens[i]);
    auto src = params.embeddings.row(id);
    std::copy(src.begin(), src.end(), x.values.row(i).begin());
    any_pad |= tokens.tokens[i].special == SpecialToken::kPad;
  }
  if (any_pad) {
    x.padding.assign(tokens.size(), 0);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      x.padding[i] = tokens.tokens[i].special == SpecialToken::kPad ? 1 : 0;
    }
  }
  return x;
}

void CheckInput(const EmbeddingMatrix& x, const ModelParams& params,
                const Target& target) {
  if (x.cols() != params.arch.embedding_dim) {
    throw Error(ErrorKind::kShapeError,
                fmt::format("input has {} columns, model expects {}", x.cols(),
                            params.arch.embedding_dim));
  }
  if (!x.padding.empty() && x.padding.size() != x.rows()) {
    throw Error(ErrorKind::kShapeError, "padding mask length != row count");
  }
  OutputIndex(params, target);
}

std::size_t OutputIndex(const ModelParams& params, const Target& target) {
  if (params.arch.head == HeadKind::kScalar) {
    if (target && *target != 0) {
      throw Error(ErrorKind::kShapeError, "scalar head accepts no class target");
    }
    return 0;
  }
  if (!target || *target >= params.arch.n_classes) {
    throw Error(ErrorKind::kShapeError,
                fmt::format("class head needs a target in [0, {})",
                            params.arch.n_classes));
  }
  return *target;
}

ForwardTrace Trace(const EmbeddingMatrix& x, const ModelParams& params) {
  const std::size_t d = params.arch.embedding_dim;
  const Activation act = params.arch.activation;
  ForwardTrace t;
  t.pooled.assign(d, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (x.is_padding(i)) continue;
    ++t.pooled_rows;
    auto row = x.values.row(i);
    for (std::size_t c = 0; c < d; ++c) t.pooled[c] += row[c];
  }
  if (t.pooled_rows > 0) {
    const double inv = 1.0 / static_cast<double>(t.pooled_rows);
    for (double& v : t.pooled) v *= inv;
  }
  Affine(params.w1, t.pooled, params.b1, t.z1);
  t.h1.resize(t.z1.size());
  for (std::size_t j = 0; j < t.z1.size(); ++j) t.h1[j] = Activate(act, t.z1[j]);
  Affine(params.w2, t.h1, params.b2, t.z2);
  t.h2.resize(t.z2.size());
  for (std::size_t j = 0; j < t.z2.size(); ++j) t.h2[j] = Activate(act, t.z2[j]);
  Affine(params.head, t.h2, params.head_bias, t.out);
  return t;
}

ModelOutput Forward(const EmbeddingMatrix& x, const ModelParams& params,
                    const Target& target) {
  CheckInput(x, params, target);
  const ForwardTrace t = Trace(x, params);
  return ModelOutput{t.out[OutputIndex(params, target)], std::nullopt};
}

std::vector<double> PooledGradient(const ForwardTrace& trace,
                                   const ModelParams& params,
                                   std::size_t output_index) {
  const Activation act = params.arch.activation;
  auto head_row = params.head.row(output_index);
  std::vector<double> g_z2(head_row.begin(), head_row.end());
  for (std::size_t j = 0; j < g_z2.size(); ++j) {
    g_z2[j] *= ActivationDerivative(act, trace.z2[j]);
  }
  std::vector<double> g_z1 = TransposeTimes(params.w2, g_z2);
  for (std::size_t j = 0; j < g_z1.size(); ++j) {
    g_z1[j] *= ActivationDerivative(act, trace.z1[j]);
  }
  return TransposeTimes(params.w1, g_z1);
}

ModelOutput Gradient(const EmbeddingMatrix& x, const ModelParams& params,
                     const Target& target) {
  CheckInput(x, params, target);
  const std::size_t k = OutputIndex(params, target);
  const ForwardTrace t = Trace(x, params);
  ModelOutput out{t.out[k], EmbeddingMatrix(x.rows(), x.cols())};
  out.gradient->padding = x.padding;
  if (t.pooled_rows == 0) return out;
  std::vector<double> g = PooledGradient(t, params, k);
  const double inv = 1.0 / static_cast<double>(t.pooled_rows);
  for (double& v : g) v *= inv;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (x.is_padding(i)) continue;
    std::copy(g.begin(), g.end(), out.gradient->values.row(i).begin());
  }
  return out;
}

std::string ArchToJson(const ArchConfig& arch) { return ArchJson(arch).dump(); }

ArchConfig ArchFromJson(const std::string& text) {
  try {
    return ArchFromJsonValue(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("arch config: ") + e.what());
  }
}

std::string SaveParams(const ModelParams& p) {
  json j;
  j["format"] = "lexattr-params";
  j["version"] = kParamsFormatVersion;
  j["seed"] = p.seed;
  j["arch"] = ArchJson(p.arch);
  j["vocab"] = p.vocab.entries();
  j["embeddings"] = MatrixToJson(p.embeddings);
  j["w1"] = MatrixToJson(p.w1);
  j["b1"] = p.b1;
  j["w2"] = MatrixToJson(p.w2);
  j["b2"] = p.b2;
  j["head"] = MatrixToJson(p.head);
  j["head_bias"] = p.head_bias;
  return j.dump();
}

ModelParams LoadParams(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "lexattr-params") {
      throw Error(ErrorKind::kValidation, "not a lexattr params file");
    }
    if (j.at("version").get<int>() != kParamsFormatVersion) {
      throw Error(ErrorKind::kVersionMismatch,
                  fmt::format("params version {} unsupported",
                              j.at("version").get<int>()));
    }
    ModelParams p;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.arch = ArchFromJsonValue(j.at("arch"));
    const auto entries = j.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = Vocabulary::kReservedCount; i < entries.size(); ++i) {
      p.vocab.Add(entries[i]);
    }
    if (p.vocab.size() != entries.size()) {
      throw Error(ErrorKind::kValidation, "vocabulary has duplicate entries");
    }
    p.embeddings = MatrixFromJson(j.at("embeddings"));
    p.w1 = MatrixFromJson(j.at("w1"));
    p.b1 = j.at("b1").get<std::vector<double>>();
    p.w2 = MatrixFromJson(j.at("w2"));
    p.b2 = j.at("b2").get<std::vector<double>>();
    p.head = MatrixFromJson(j.at("head"));
    p.head_bias = j.at("head_bias").get<std::vector<double>>();
    const std::size_t d = p.arch.embedding_dim, h = p.arch.hidden_dim,
                      k = p.arch.output_dim();
    if (p.embeddings.rows() != p.vocab.size() || p.embeddings.cols() != d ||
        p.w1.rows() != h || p.w1.cols() != d || p.b1.size() != h ||
        p.w2.rows() != h || p.w2.cols() != h || p.b2.size() != h ||
        p.head.rows() != k || p.head.cols() != h || p.head_bias.size() != k) {
      throw Error(ErrorKind::kShapeError, "params shapes disagree with arch");
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("params file: ") + e.what());
  }
}

void SaveParamsFile(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << SaveParams(params) << '\n';
}

ModelParams LoadParamsFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return LoadParams(buf.str());
}

}  // namespace lexattr
