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

#include "lexattr/faithfulness.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "lexattr/errors.h"

namespace lexattr {
namespace {

std::string Num(double v) { return fmt::format("{}", v); }

std::vector<bool> SelectedPositions(const TokenizedText& tokens,
                                    std::span<const std::size_t> units,
                                    SelectionLevel level) {
  std::vector<bool> selected(tokens.size(), false);
  if (level == SelectionLevel::kToken) {
    for (std::size_t u : units) {
      if (u < tokens.size() && !tokens.tokens[u].is_special()) selected[u] = true;
    }
    return selected;
  }
  const std::set<std::size_t> words(units.begin(), units.end());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens.tokens[i];
    if (!t.is_special() && t.word_index && words.count(*t.word_index)) {
      selected[i] = true;
    }
  }
  return selected;
}

}  // namespace

std::string_view LevelName(SelectionLevel level) {
  return level == SelectionLevel::kToken ? "token" : "word";
}

SelectionLevel ParseLevel(std::string_view name) {
  if (name == "token") return SelectionLevel::kToken;
  if (name == "word") return SelectionLevel::kWord;
  throw Error(ErrorKind::kValidation,
              fmt::format("unknown level '{}' (token|word)", name));
}

RemovalMode ParseRemoval(std::string_view name) {
  if (name == "delete") return RemovalMode::kDelete;
  if (name == "mask") return RemovalMode::kMaskSubstitute;
  throw Error(ErrorKind::kValidation,
              fmt::format("unknown removal '{}' (delete|mask)", name));
}

FractionGrid FractionGrid::Default() {
  return FractionGrid{{0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45,
                       0.5, 1.0}};
}

void FractionGrid::Validate() const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("fraction {} outside [0, 1]", values[i]));
    }
    if (i > 0 && !(values[i] > values[i - 1])) {
      throw Error(ErrorKind::kValidation, "fraction grid must strictly increase");
    }
  }
}

UnitScores CollectUnits(std::span<const double> token_scores,
                        const TokenizedText& tokens, SelectionLevel level) {
  if (token_scores.size() != tokens.size()) {
    throw Error(ErrorKind::kShapeError, "score count != token count");
  }
  UnitScores u;
  if (level == SelectionLevel::kToken) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens.tokens[i].is_special()) continue;
      u.units.push_back(i);
      u.scores.push_back(token_scores[i]);
    }
    return u;
  }
  std::map<std::size_t, double> words;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens.tokens[i];
    if (t.is_special()) continue;
    if (!t.word_index) {
      throw Error(ErrorKind::kAlignmentGap,
                  fmt::format("token {} has no word index", i));
    }
    words[*t.word_index] += token_scores[i];
  }
  for (const auto& [w, s] : words) {
    u.units.push_back(w);
    u.scores.push_back(s);
  }
  return u;
}

std::size_t UnitCountForFraction(double f, std::size_t removable) {
  if (f <= 0.0) return 0;
  // The slack absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
  const double raw = std::ceil(f * static_cast<double>(removable) - 1e-9);
  return std::min(removable, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::vector<std::size_t> SelectTopFraction(std::span<const double> token_scores,
                                           const TokenizedText& tokens,
                                           double f, SelectionLevel level) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw Error(ErrorKind::kValidation, fmt::format("fraction {} outside [0, 1]", f));
  }
  const UnitScores u = CollectUnits(token_scores, tokens, level);
  std::vector<std::size_t> order(u.units.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(u.scores[a]) > std::abs(u.scores[b]);
  });
  const std::size_t count = UnitCountForFraction(f, u.units.size());
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(u.units[order[i]]);
  return out;
}

EmbeddingMatrix ApplySelection(const EmbeddingMatrix& x,
                               const TokenizedText& tokens,
                               std::span<const std::size_t> units,
                               SelectionLevel level, bool keep_selected,
                               RemovalMode mode,
                               const OracleDescriptor& descriptor) {
  if (tokens.size() != x.rows()) {
    throw Error(ErrorKind::kShapeError, "token count != embedding rows");
  }
  const std::vector<bool> selected = SelectedPositions(tokens, units, level);
  std::vector<bool> drop(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens.tokens[i].is_special()) continue;
    drop[i] = keep_selected ? !selected[i] : selected[i];
  }
  if (mode == RemovalMode::kMaskSubstitute) {
    if (!descriptor.mask_embedding) {
      throw Error(ErrorKind::kMaskUnavailable,
                  "mask substitution needs a MASK embedding");
    }
    EmbeddingMatrix out = x;
    for (std::size_t i = 0; i < drop.size(); ++i) {
      if (!drop[i]) continue;
      std::copy(descriptor.mask_embedding->begin(),
                descriptor.mask_embedding->end(), out.values.row(i).begin());
    }
    return out;
  }
  const std::size_t kept =
      static_cast<std::size_t>(std::count(drop.begin(), drop.end(), false));
  EmbeddingMatrix out(kept, x.cols());
  if (!x.padding.empty()) out.padding.reserve(kept);
  std::size_t r = 0;
  for (std::size_t i = 0; i < drop.size(); ++i) {
    if (drop[i]) continue;
    auto src = x.values.row(i);
    std::copy(src.begin(), src.end(), out.values.row(r++).begin());
    if (!x.padding.empty()) out.padding.push_back(x.padding[i]);
  }
  return out;
}

double OutputChange(GradientOracle& oracle, const TokenizedText& tokens,
                    const EmbeddingMatrix& x, std::span<const std::size_t> units,
                    SelectionLevel level, bool keep_selected,
                    const Target& target, RemovalMode mode,
                    std::optional<double> f_x) {
  const std::vector<bool> selected = SelectedPositions(tokens, units, level);
  const std::size_t n_selected =
      static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true));
  const std::size_t n_removable = tokens.non_special_count();
  const bool unchanged =
      keep_selected ? n_selected == n_removable : n_selected == 0;
  if (unchanged) return 0.0;
  const EmbeddingMatrix perturbed = ApplySelection(
      x, tokens, units, level, keep_selected, mode, oracle.descriptor());
  if (!f_x) f_x = oracle.Evaluate(x, target, false).value;
  return std::abs(*f_x - oracle.Evaluate(perturbed, target, false).value);
}

double Comprehensiveness(GradientOracle& oracle, const TokenizedText& tokens,
                         const EmbeddingMatrix& x, const AttributionVector& a,
                         double f, SelectionLevel level, const Target& target,
                         RemovalMode mode) {
  const auto units = SelectTopFraction(a.scores, tokens, f, level);
  return OutputChange(oracle, tokens, x, units, level, false, target, mode);
}

double Sufficiency(GradientOracle& oracle, const TokenizedText& tokens,
                   const EmbeddingMatrix& x, const AttributionVector& a,
                   double f, SelectionLevel level, const Target& target,
                   RemovalMode mode) {
  const auto units = SelectTopFraction(a.scores, tokens, f, level);
  return OutputChange(oracle, tokens, x, units, level, true, target, mode);
}

double ApproximationError(const AttributionVector& a) {
  const double delta = a.f_x - a.f_x0;
  if (delta == 0.0) {
    throw Error(ErrorKind::kDegenerateEndpoints,
                "F(x) == F(x0); approximation error undefined");
  }
  return std::abs(CompletenessResidual(a) / delta);
}

SweepResult RunSweep(GradientOracle& oracle,
                     const std::vector<SweepDocument>& documents,
                     const SweepSpec& spec) {
  if (documents.empty()) {
    throw Error(ErrorKind::kValidation, "sweep corpus is empty");
  }
  spec.grid.Validate();
  struct Combination {
    Method method;
    BaselineKind baseline;
    std::size_t steps;
  };
  std::vector<Combination> combos;
  for (Method m : spec.methods) {
    for (BaselineKind b : spec.baselines) {
      for (std::size_t n : spec.steps) combos.push_back({m, b, n});
    }
  }

  struct DocOutcome {
    std::vector<SweepRow> rows;
    std::vector<SweepFailure> failures;
  };
  std::vector<DocOutcome> outcomes(documents.size());
  const std::size_t threads = oracle.thread_safe() ? spec.threads : 1;
  ParallelFor(documents.size(), threads, [&](std::size_t d) {
    const SweepDocument& doc = documents[d];
    DocOutcome& out = outcomes[d];
    EmbeddedText embedded;
    try {
      embedded = oracle.Embed(doc.text);
    } catch (const Error& e) {
      out.failures.push_back({doc.id, "embed", e.what(), e.kind()});
      return;
    } catch (const std::exception& e) {
      out.failures.push_back({doc.id, "embed", e.what(), std::nullopt});
      return;
    }
    for (const Combination& c : combos) {
      const std::string label = fmt::format(
          "{}/{}/N={}", MethodName(c.method), BaselineName(c.baseline), c.steps);
      try {
        AttributionSettings settings;
        settings.method = c.method;
        settings.baseline = c.baseline;
        settings.rule = {spec.quadrature, c.steps};
        settings.shap = spec.shap;
        settings.batch_size = spec.batch_size;
        const AttributionVector a =
            Attribute(oracle, embedded.tokens, embedded.x, settings, doc.target);
        std::optional<double> ae;
        try {
          ae = ApproximationError(a);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kDegenerateEndpoints) throw;
        }
        const double f_x = oracle.Evaluate(embedded.x, doc.target, false).value;
        std::vector<SweepRow> rows;
        for (double f : spec.grid.values) {
          const auto units =
              SelectTopFraction(a.scores, embedded.tokens, f, spec.level);
          const double c_f =
              OutputChange(oracle, embedded.tokens, embedded.x, units, spec.level,
                           false, doc.target, spec.removal, f_x);
          const double s_f =
              OutputChange(oracle, embedded.tokens, embedded.x, units, spec.level,
                           true, doc.target, spec.removal, f_x);
          rows.push_back({doc.id, c.method, c.baseline, c.steps, f, c_f, s_f, ae,
                          embedded.tokens.size()});
        }
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
      } catch (const Error& e) {
        out.failures.push_back({doc.id, label, e.what(), e.kind()});
      } catch (const std::exception& e) {
        out.failures.push_back({doc.id, label, e.what(), std::nullopt});
      }
    }
  });

  SweepResult result;
  for (auto& o : outcomes) {
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
    result.failures.insert(result.failures.end(), o.failures.begin(),
                           o.failures.end());
  }
  for (const Combination& c : combos) {
    for (double f : spec.grid.values) {
      SweepSummaryRow s{c.method, c.baseline, c.steps, f, {}, {}, {}, 0};
      std::vector<double> cs, ss, aes;
      for (const SweepRow& r : result.rows) {
        if (r.method != c.method || r.baseline != c.baseline ||
            r.steps != c.steps || r.f != f) {
          continue;
        }
        cs.push_back(r.c_f);
        ss.push_back(r.s_f);
        if (r.ae) {
          aes.push_back(*r.ae);
        } else {
          ++s.degenerate_ae;
        }
      }
      s.c_f = Summarize(std::move(cs));
      s.s_f = Summarize(std::move(ss));
      s.ae = Summarize(std::move(aes));
      result.summaries.push_back(s);
    }
  }
  return result;
}

std::string SweepRowsCsv(const SweepResult& result) {
  std::string out =
      "document_id,method,baseline,N,f,c_f,s_f,ae,token_count\n";
  for (const SweepRow& r : result.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", CsvField(r.document_id),
                       MethodName(r.method), BaselineName(r.baseline), r.steps,
                       Num(r.f), Num(r.c_f), Num(r.s_f),
                       r.ae ? Num(*r.ae) : "degenerate", r.token_count);
  }
  return out;
}

std::string SweepSummaryCsv(const SweepResult& result) {
  std::string out = "method,baseline,N,f,n";
  for (const char* m : {"c", "s", "ae"}) {
    out += fmt::format(",{0}_q25,{0}_median,{0}_q75,{0}_lower_fence,"
                       "{0}_upper_fence,{0}_outliers,{0}_mean",
                       m);
  }
  out += ",ae_degenerate\n";
  for (const SweepSummaryRow& s : result.summaries) {
    out += fmt::format("{},{},{},{},{}", MethodName(s.method),
                       BaselineName(s.baseline), s.steps, Num(s.f), s.c_f.count);
    for (const QuartileSummary* q : {&s.c_f, &s.s_f, &s.ae}) {
      out += fmt::format(",{},{},{},{},{},{},{}", Num(q->q25), Num(q->median),
                         Num(q->q75), Num(q->lower_fence), Num(q->upper_fence),
                         q->outliers, Num(q->mean));
    }
    out += fmt::format(",{}\n", s.degenerate_ae);
  }
  return out;
}

}  // namespace lexattr
