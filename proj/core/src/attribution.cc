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

#include "lexattr/attribution.h"

#include <cmath>

#include <fmt/format.h>

#include "lexattr/errors.h"
#include "lexattr/rng.h"

namespace lexattr {
namespace {

constexpr double kDeepLiftDeltaFloor = 1e-7;

void CheckPair(const EmbeddingMatrix& x, const EmbeddingMatrix& x0) {
  if (!x.SameShape(x0)) {
    throw Error(ErrorKind::kShapeError,
                fmt::format("input {}x{} vs baseline {}x{}", x.rows(), x.cols(),
                            x0.rows(), x0.cols()));
  }
  if (x.padding != x0.padding) {
    throw Error(ErrorKind::kShapeError, "input and baseline padding differ");
  }
}

void CheckFinite(const ModelOutput& o) {
  if (!std::isfinite(o.value) ||
      (o.gradient && !AllFinite(o.gradient->values.values()))) {
    throw Error(ErrorKind::kNonFiniteGradient,
                "oracle returned a non-finite value or gradient");
  }
}

// x0 + alpha (x - x0), with the endpoints reproduced exactly.
EmbeddingMatrix PathPoint(const EmbeddingMatrix& x, const EmbeddingMatrix& x0,
                          double alpha) {
  if (alpha == 0.0) return x0;
  if (alpha == 1.0) return x;
  EmbeddingMatrix p = x0;
  auto pv = p.values.values();
  auto xv = x.values.values();
  for (std::size_t i = 0; i < pv.size(); ++i) pv[i] += alpha * (xv[i] - pv[i]);
  return p;
}

void FinishScores(AttributionVector& a) {
  a.scores.assign(a.per_entry.rows(), 0.0);
  for (std::size_t r = 0; r < a.per_entry.rows(); ++r) {
    for (double v : a.per_entry.row(r)) a.scores[r] += v;
  }
}

AttributionVector ZeroAttribution(GradientOracle& oracle,
                                  const EmbeddingMatrix& x,
                                  const Target& target) {
  AttributionVector a;
  a.per_entry = Matrix(x.rows(), x.cols());
  const ModelOutput o = oracle.Evaluate(x, target, false);
  CheckFinite(o);
  a.f_x = a.f_x0 = o.value;
  FinishScores(a);
  return a;
}

std::vector<double> Row(const std::optional<std::vector<double>>& row,
                        ErrorKind kind, const char* name, std::size_t d) {
  if (!row) {
    throw Error(kind, fmt::format("oracle exposes no {} embedding", name));
  }
  if (row->size() != d) {
    throw Error(ErrorKind::kShapeError, fmt::format("{} row width != d", name));
  }
  return *row;
}

}  // namespace

QuadratureNodes MakeNodes(const QuadratureRule& rule) {
  if (rule.steps < 1) {
    throw Error(ErrorKind::kValidation, "quadrature needs at least one step");
  }
  const std::size_t n = rule.steps;
  const double inv = 1.0 / static_cast<double>(n);
  QuadratureNodes q;
  const std::size_t count = rule.kind == QuadratureKind::kRiemannLeft ? n : n + 1;
  for (std::size_t k = 0; k < count; ++k) {
    q.alphas.push_back(k == n ? 1.0 : static_cast<double>(k) * inv);
    switch (rule.kind) {
      case QuadratureKind::kPaperEq6:
        q.weights.push_back(1.0 / static_cast<double>(n + 1));
        break;
      case QuadratureKind::kRiemannLeft:
        q.weights.push_back(inv);
        break;
      case QuadratureKind::kTrapezoid:
        q.weights.push_back(k == 0 || k == n ? 0.5 * inv : inv);
        break;
    }
  }
  return q;
}

std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kIntegratedGradients: return "ig";
    case Method::kSequentialIG: return "sig";
    case Method::kGradientShap: return "gradshap";
    case Method::kDeepLift: return "deeplift";
  }
  return "?";
}

std::string_view BaselineName(BaselineKind b) {
  switch (b) {
    case BaselineKind::kZero: return "zero";
    case BaselineKind::kMask: return "mask";
    case BaselineKind::kPadding: return "padding";
    case BaselineKind::kMean: return "mean";
  }
  return "?";
}

std::string_view QuadratureName(QuadratureKind q) {
  switch (q) {
    case QuadratureKind::kPaperEq6: return "paper-eq6";
    case QuadratureKind::kRiemannLeft: return "riemann-left";
    case QuadratureKind::kTrapezoid: return "trapezoid";
  }
  return "?";
}

Method ParseMethod(std::string_view name) {
  for (Method m : {Method::kIntegratedGradients, Method::kSequentialIG,
                   Method::kGradientShap, Method::kDeepLift}) {
    if (MethodName(m) == name) return m;
  }
  throw Error(ErrorKind::kValidation,
              fmt::format("unknown method '{}' (ig|sig|gradshap|deeplift)", name));
}

BaselineKind ParseBaseline(std::string_view name) {
  for (BaselineKind b : {BaselineKind::kZero, BaselineKind::kMask,
                         BaselineKind::kPadding, BaselineKind::kMean}) {
    if (BaselineName(b) == name) return b;
  }
  throw Error(ErrorKind::kValidation,
              fmt::format("unknown baseline '{}' (zero|mask|padding|mean)", name));
}

QuadratureKind ParseQuadrature(std::string_view name) {
  for (QuadratureKind q : {QuadratureKind::kPaperEq6,
                           QuadratureKind::kRiemannLeft,
                           QuadratureKind::kTrapezoid}) {
    if (QuadratureName(q) == name) return q;
  }
  throw Error(ErrorKind::kValidation,
              fmt::format("unknown quadrature '{}' "
                          "(paper-eq6|riemann-left|trapezoid)",
                          name));
}

EmbeddingMatrix MakeBaseline(const EmbeddingMatrix& x,
                             const TokenizedText& tokens,
                             BaselineStrategy strategy,
                             const OracleDescriptor& descriptor) {
  if (tokens.size() != x.rows()) {
    throw Error(ErrorKind::kShapeError,
                fmt::format("{} tokens vs {} embedding rows", tokens.size(),
                            x.rows()));
  }
  const std::size_t d = x.cols();
  std::vector<double> fill(d, 0.0);
  switch (strategy.kind) {
    case BaselineKind::kZero:
      break;
    case BaselineKind::kMask:
      fill = Row(descriptor.mask_embedding, ErrorKind::kMaskUnavailable, "MASK", d);
      break;
    case BaselineKind::kPadding:
      fill = Row(descriptor.pad_embedding, ErrorKind::kMaskUnavailable, "PAD", d);
      break;
    case BaselineKind::kMean:
      fill = Row(descriptor.mean_embedding, ErrorKind::kMaskUnavailable, "mean", d);
      break;
  }
  EmbeddingMatrix x0 = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (tokens.tokens[i].is_special()) continue;
    std::copy(fill.begin(), fill.end(), x0.values.row(i).begin());
  }
  return x0;
}

AttributionVector IntegratedGradients(GradientOracle& oracle,
                                      const EmbeddingMatrix& x,
                                      const EmbeddingMatrix& x0,
                                      const QuadratureRule& rule,
                                      const Target& target,
                                      std::size_t batch_size) {
  CheckPair(x, x0);
  const QuadratureNodes nodes = MakeNodes(rule);
  AttributionVector a;
  if (x.values == x0.values) {
    a = ZeroAttribution(oracle, x, target);
  } else {
    Matrix sum(x.rows(), x.cols());
    auto sv = sum.values();
    bool have_fx = false;
    batch_size = std::max<std::size_t>(batch_size, 1);
    for (std::size_t begin = 0; begin < nodes.alphas.size(); begin += batch_size) {
      const std::size_t end = std::min(begin + batch_size, nodes.alphas.size());
      std::vector<EmbeddingMatrix> points;
      points.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        points.push_back(PathPoint(x, x0, nodes.alphas[k]));
      }
      const auto outputs = oracle.EvaluateBatch(points, target, true);
      for (std::size_t k = begin; k < end; ++k) {
        const ModelOutput& o = outputs[k - begin];
        CheckFinite(o);
        if (!o.gradient || !o.gradient->SameShape(x)) {
          throw Error(ErrorKind::kShapeError, "gradient shape != input shape");
        }
        if (nodes.alphas[k] == 0.0) a.f_x0 = o.value;
        if (nodes.alphas[k] == 1.0) {
          a.f_x = o.value;
          have_fx = true;
        }
        const double w = nodes.weights[k];
        auto gv = o.gradient->values.values();
        for (std::size_t i = 0; i < sv.size(); ++i) sv[i] += w * gv[i];
      }
    }
    if (!have_fx) {
      const ModelOutput o = oracle.Evaluate(x, target, false);
      CheckFinite(o);
      a.f_x = o.value;
    }
    a.per_entry = Matrix(x.rows(), x.cols());
    auto pv = a.per_entry.values();
    auto xv = x.values.values();
    auto bv = x0.values.values();
    for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = (xv[i] - bv[i]) * sv[i];
    FinishScores(a);
  }
  a.config.method = Method::kIntegratedGradients;
  a.config.rule = rule;
  return a;
}

AttributionVector SequentialIG(GradientOracle& oracle, const EmbeddingMatrix& x,
                               const TokenizedText& tokens,
                               const QuadratureRule& rule, const Target& target,
                               std::size_t batch_size) {
  const OracleDescriptor& descriptor = oracle.descriptor();
  const EmbeddingMatrix all_masked =
      MakeBaseline(x, tokens, {BaselineKind::kMask}, descriptor);
  AttributionVector a;
  a.per_entry = Matrix(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (tokens.tokens[i].is_special()) continue;
    EmbeddingMatrix x0 = x;
    auto mask_row = all_masked.values.row(i);
    std::copy(mask_row.begin(), mask_row.end(), x0.values.row(i).begin());
    const AttributionVector one =
        IntegratedGradients(oracle, x, x0, rule, target, batch_size);
    auto src = one.per_entry.row(i);
    std::copy(src.begin(), src.end(), a.per_entry.row(i).begin());
  }
  const std::vector<EmbeddingMatrix> ends = {x, all_masked};
  const auto outputs = oracle.EvaluateBatch(ends, target, false);
  for (const auto& o : outputs) CheckFinite(o);
  a.f_x = outputs[0].value;
  a.f_x0 = outputs[1].value;
  FinishScores(a);
  a.config.method = Method::kSequentialIG;
  a.config.baseline = BaselineKind::kMask;
  a.config.rule = rule;
  return a;
}

AttributionVector GradientShap(GradientOracle& oracle, const EmbeddingMatrix& x,
                               const EmbeddingMatrix& x0,
                               const TokenizedText& tokens,
                               const GradientShapOptions& options,
                               const Target& target, std::size_t batch_size) {
  CheckPair(x, x0);
  if (options.n_samples < 1) {
    throw Error(ErrorKind::kValidation, "gradshap needs n_samples >= 1");
  }
  if (tokens.size() != x.rows()) {
    throw Error(ErrorKind::kShapeError, "token count != embedding rows");
  }
  auto xv = x.values.values();
  auto bv = x0.values.values();
  double sq = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) sq += (xv[i] - bv[i]) * (xv[i] - bv[i]);
  const double rms = xv.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(xv.size()));
  const double stdev = options.noise_stdev.value_or(0.09 * rms);
  if (stdev < 0.0 || !std::isfinite(stdev)) {
    throw Error(ErrorKind::kValidation, "gradshap noise stdev must be >= 0");
  }

  AttributionVector a;
  a.config.method = Method::kGradientShap;
  a.config.n_samples = options.n_samples;
  a.config.noise_stdev = stdev;
  a.config.seed = options.seed;
  if (x.values == x0.values) {
    AttributionVector z = ZeroAttribution(oracle, x, target);
    z.config = a.config;
    return z;
  }

  Rng rng(options.seed);
  Matrix sum(x.rows(), x.cols());
  auto sv = sum.values();
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t begin = 0; begin < options.n_samples; begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, options.n_samples);
    std::vector<EmbeddingMatrix> points;
    for (std::size_t s = begin; s < end; ++s) {
      const double alpha = rng.UniformOpen();
      EmbeddingMatrix p = x0;
      auto pv = p.values.values();
      for (std::size_t i = 0; i < pv.size(); ++i) pv[i] += alpha * (xv[i] - pv[i]);
      if (stdev > 0.0) {
        for (std::size_t r = 0; r < p.rows(); ++r) {
          if (tokens.tokens[r].is_special()) continue;
          for (double& v : p.values.row(r)) v += rng.Normal(0.0, stdev);
        }
      }
      points.push_back(std::move(p));
    }
    const auto outputs = oracle.EvaluateBatch(points, target, true);
    for (const ModelOutput& o : outputs) {
      CheckFinite(o);
      auto gv = o.gradient->values.values();
      for (std::size_t i = 0; i < sv.size(); ++i) sv[i] += gv[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(options.n_samples);
  a.per_entry = Matrix(x.rows(), x.cols());
  auto pv = a.per_entry.values();
  for (std::size_t i = 0; i < pv.size(); ++i) pv[i] = (xv[i] - bv[i]) * (sv[i] * inv);
  const std::vector<EmbeddingMatrix> ends = {x, x0};
  const auto outputs = oracle.EvaluateBatch(ends, target, false);
  for (const auto& o : outputs) CheckFinite(o);
  a.f_x = outputs[0].value;
  a.f_x0 = outputs[1].value;
  FinishScores(a);
  return a;
}

AttributionVector DeepLiftRescale(GradientOracle& oracle,
                                  const EmbeddingMatrix& x,
                                  const EmbeddingMatrix& x0,
                                  const Target& target) {
  const ModelParams* params = oracle.builtin_params();
  if (params == nullptr) {
    throw Error(ErrorKind::kUnsupportedOracle,
                "deeplift needs the built-in model's layer internals");
  }
  return DeepLiftRescale(*params, x, x0, target);
}

AttributionVector DeepLiftRescale(const ModelParams& params,
                                  const EmbeddingMatrix& x,
                                  const EmbeddingMatrix& x0,
                                  const Target& target) {
  CheckPair(x, x0);
  CheckInput(x, params, target);
  const std::size_t k = OutputIndex(params, target);
  const Activation act = params.arch.activation;
  const ForwardTrace tx = Trace(x, params);
  const ForwardTrace t0 = Trace(x0, params);

  AttributionVector a;
  a.config.method = Method::kDeepLift;
  a.f_x = tx.out[k];
  a.f_x0 = t0.out[k];
  a.per_entry = Matrix(x.rows(), x.cols());
  if (x.values == x0.values || tx.pooled_rows == 0) {
    FinishScores(a);
    return a;
  }

  // Multiplier of an activation: secant slope, or the derivative at the
  // midpoint when the pre-activation barely moves.
  auto rescale = [&](double zx, double z0, double hx, double h0) {
    const double dz = zx - z0;
    if (std::abs(dz) < kDeepLiftDeltaFloor) {
      return ActivationDerivative(act, 0.5 * (zx + z0));
    }
    return (hx - h0) / dz;
  };

  auto head_row = params.head.row(k);
  std::vector<double> m_z2(head_row.begin(), head_row.end());
  for (std::size_t j = 0; j < m_z2.size(); ++j) {
    m_z2[j] *= rescale(tx.z2[j], t0.z2[j], tx.h2[j], t0.h2[j]);
  }
  std::vector<double> m_z1(params.w2.cols(), 0.0);
  for (std::size_t r = 0; r < params.w2.rows(); ++r) {
    auto row = params.w2.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) m_z1[c] += m_z2[r] * row[c];
  }
  for (std::size_t j = 0; j < m_z1.size(); ++j) {
    m_z1[j] *= rescale(tx.z1[j], t0.z1[j], tx.h1[j], t0.h1[j]);
  }
  std::vector<double> m_pool(params.w1.cols(), 0.0);
  for (std::size_t r = 0; r < params.w1.rows(); ++r) {
    auto row = params.w1.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) m_pool[c] += m_z1[r] * row[c];
  }
  const double inv = 1.0 / static_cast<double>(tx.pooled_rows);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (x.is_padding(i)) continue;
    auto out = a.per_entry.row(i);
    auto xr = x.values.row(i);
    auto br = x0.values.row(i);
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[c] = m_pool[c] * inv * (xr[c] - br[c]);
    }
  }
  FinishScores(a);
  return a;
}

double CompletenessResidual(const AttributionVector& a) {
  double sum = 0.0;
  for (double s : a.scores) sum += s;
  return sum - (a.f_x - a.f_x0);
}

AttributionVector Attribute(GradientOracle& oracle, const TokenizedText& tokens,
                            const EmbeddingMatrix& x,
                            const AttributionSettings& settings,
                            const Target& target) {
  if (tokens.size() != x.rows()) {
    throw Error(ErrorKind::kShapeError, "token count != embedding rows");
  }
  AttributionVector a;
  switch (settings.method) {
    case Method::kSequentialIG:
      return SequentialIG(oracle, x, tokens, settings.rule, target,
                          settings.batch_size);
    case Method::kIntegratedGradients: {
      const EmbeddingMatrix x0 =
          MakeBaseline(x, tokens, {settings.baseline}, oracle.descriptor());
      a = IntegratedGradients(oracle, x, x0, settings.rule, target,
                              settings.batch_size);
      break;
    }
    case Method::kGradientShap: {
      const EmbeddingMatrix x0 =
          MakeBaseline(x, tokens, {settings.baseline}, oracle.descriptor());
      a = GradientShap(oracle, x, x0, tokens, settings.shap, target,
                       settings.batch_size);
      break;
    }
    case Method::kDeepLift: {
      if (oracle.builtin_params() == nullptr) {
        throw Error(ErrorKind::kUnsupportedOracle,
                    "deeplift needs the built-in model's layer internals");
      }
      const EmbeddingMatrix x0 =
          MakeBaseline(x, tokens, {settings.baseline}, oracle.descriptor());
      a = DeepLiftRescale(oracle, x, x0, target);
      break;
    }
  }
  a.config.baseline = settings.baseline;
  return a;
}

}  // namespace lexattr
