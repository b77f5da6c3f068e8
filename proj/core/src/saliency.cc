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


#include "lexattr/saliency.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include <fmt/format.h>

#include "lexattr/errors.h"
#include "lexattr/oracle.h"
#include "lexattr/render.h"
#include "lexattr/stats.h"

namespace lexattr {
namespace {

bool IsNaLabel(const std::optional<std::string>& label) {
  if (!label) return true;
  const std::string lower = AsciiLower(*label);
  return lower.empty() || lower == "na" || lower == "n/a";
}

std::optional<double> ParseNumber(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

struct ClassAssignment {
  std::vector<std::string> names;
  // Per document: class index, or nullopt when excluded.
  std::vector<std::optional<std::size_t>> of_document;
  std::size_t excluded_na = 0;
};

ClassAssignment AssignClasses(const std::vector<LabeledDocument>& documents,
                              const ExtractionConfig& config) {
  ClassAssignment out;
  std::vector<std::optional<std::string>> names(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const auto& label = documents[i].label;
    if (IsNaLabel(label)) continue;
    if (config.bins.empty()) {
      names[i] = *label;
      continue;
    }
    const auto value = ParseNumber(*label);
    if (!value) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("document {}: label '{}' is not numeric",
                              documents[i].id, *label));
    }
    for (const LabelBin& bin : config.bins) {
      if (*value >= bin.lo && *value <= bin.hi) {
        names[i] = bin.name;
        break;
      }
    }
    if (!names[i]) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("document {}: label {} falls in no bin",
                              documents[i].id, *label));
    }
  }
  if (config.bins.empty()) {
    std::set<std::string> distinct;
    for (const auto& n : names) {
      if (n) distinct.insert(*n);
    }
    out.names.assign(distinct.begin(), distinct.end());
  } else {
    for (const LabelBin& bin : config.bins) {
      if (std::find(out.names.begin(), out.names.end(), bin.name) ==
          out.names.end()) {
        out.names.push_back(bin.name);
      }
    }
  }
  const bool na_class = config.na_policy == NaPolicy::kExtraClass;
  if (na_class) out.names.emplace_back(kNaClassName);
  out.of_document.resize(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (!names[i]) {
      if (na_class) {
        out.of_document[i] = out.names.size() - 1;
      } else {
        ++out.excluded_na;
      }
      continue;
    }
    const auto it = std::find(out.names.begin(), out.names.end(), *names[i]);
    out.of_document[i] = static_cast<std::size_t>(it - out.names.begin());
  }
  return out;
}

}  // namespace

std::string NormalizeWordForm(std::string_view surface,
                              const std::optional<std::string>& lemma) {
  if (lemma && !lemma->empty()) return *lemma;
  std::u32string chars = DecodeUtf8(AsciiLower(surface));
  auto is_punct = [](char32_t c) {
    return IsPunctuationWord(EncodeUtf8(std::u32string_view(&c, 1)));
  };
  std::size_t begin = 0, end = chars.size();
  while (begin < end && is_punct(chars[begin])) ++begin;
  while (end > begin && is_punct(chars[end - 1])) --end;
  return EncodeUtf8(std::u32string_view(chars).substr(begin, end - begin));
}

ClassKeywordTable AggregateClassKeywords(
    const std::vector<DocumentKeywords>& documents,
    const std::vector<std::string>& class_names, std::size_t k,
    Aggregation aggregation) {
  struct Bin {
    std::vector<double> contributions;
    std::size_t documents = 0;
  };
  std::vector<std::map<std::string, Bin>> bins(class_names.size());
  for (const DocumentKeywords& doc : documents) {
    if (doc.class_index >= class_names.size()) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("class index {} out of range", doc.class_index));
    }
    std::map<std::string, double> per_doc;
    for (const auto& [word, score] : doc.words) {
      if (score > 0.0 && !word.empty()) per_doc[word] += score;
    }
    for (const auto& [word, score] : per_doc) {
      Bin& bin = bins[doc.class_index][word];
      bin.contributions.push_back(score);
      ++bin.documents;
    }
  }
  ClassKeywordTable table;
  table.k = k;
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    if (bins[c].empty()) {
      throw Error(ErrorKind::kEmptyClassTable,
                  fmt::format("class '{}' has no positively attributed word",
                              class_names[c]));
    }
    ClassKeywords ck;
    ck.label = class_names[c];
    for (const auto& [word, bin] : bins[c]) {
      double score = ExactSum(bin.contributions);
      if (aggregation == Aggregation::kMean) {
        score /= static_cast<double>(bin.documents);
      }
      ck.rows.push_back({word, score, bin.documents});
    }
    std::sort(ck.rows.begin(), ck.rows.end(),
              [](const KeywordRow& a, const KeywordRow& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.word < b.word;
              });
    if (ck.rows.size() > k) ck.rows.resize(k);
    table.classes.push_back(std::move(ck));
  }
  return table;
}

ExtractionResult ExtractKeywords(const std::vector<LabeledDocument>& documents,
                                 const ExtractionConfig& config) {
  if (config.top_k == 0) {
    throw Error(ErrorKind::kValidation, "top-k must be positive");
  }
  ClassAssignment classes = AssignClasses(documents, config);
  if (classes.names.size() < 2) {
    throw Error(ErrorKind::kValidation,
                fmt::format("need at least 2 classes, found {}",
                            classes.names.size()));
  }
  std::vector<std::size_t> used;
  std::vector<TrainingExample> examples;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (!classes.of_document[i]) continue;
    used.push_back(i);
    examples.push_back({documents[i].text,
                        static_cast<double>(*classes.of_document[i])});
  }
  ArchConfig arch = config.arch;
  arch.head = HeadKind::kClasses;
  arch.n_classes = classes.names.size();
  TrainResult trained = TrainOverfit(examples, arch, config.trainer);

  BuiltinOracle oracle(trained.params);
  AttributionSettings settings;
  settings.method = Method::kIntegratedGradients;
  settings.baseline = config.baseline;
  settings.rule = config.rule;

  std::vector<DocumentKeywords> per_doc(used.size());
  ParallelFor(used.size(), config.threads, [&](std::size_t j) {
    const LabeledDocument& doc = documents[used[j]];
    const std::size_t cls = *classes.of_document[used[j]];
    EmbeddedText e = oracle.Embed(doc.text);
    if (!doc.lemmas.empty() && doc.lemmas.size() != e.tokens.word_count()) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("document {}: {} lemmas for {} words", doc.id,
                              doc.lemmas.size(), e.tokens.word_count()));
    }
    const AttributionVector a = Attribute(oracle, e.tokens, e.x, settings, cls);
    const WordAttribution words = MergeTokensToWords(e.tokens, a.scores, a.f_x);
    DocumentKeywords& out = per_doc[j];
    out.class_index = cls;
    for (std::size_t w = 0; w < words.words.size(); ++w) {
      const double score = words.words[w].score;
      if (!(score > 0.0)) continue;
      const std::optional<std::string> lemma =
          doc.lemmas.empty() ? std::nullopt : doc.lemmas[w];
      out.words.emplace_back(NormalizeWordForm(words.words[w].surface, lemma),
                             score);
    }
  });

  ExtractionResult result;
  result.table = AggregateClassKeywords(per_doc, classes.names, config.top_k,
                                        config.aggregation);
  result.class_names = std::move(classes.names);
  result.trace = std::move(trained.trace);
  result.params = std::move(trained.params);
  result.excluded_na = classes.excluded_na;
  return result;
}

std::string RenderKeywordTableHtml(const ClassKeywordTable& table,
                                   std::string_view title) {
  std::string out = fmt::format(
      "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      "<title>{0}</title>\n<style>\n"
      "body {{ font-family: sans-serif; margin: 2em; }}\n"
      "table {{ border-collapse: collapse; }}\n"
      "th, td {{ padding: 0.3em 0.6em; text-align: left; }}\n"
      "</style>\n</head>\n<body>\n<h1>{0}</h1>\n<table>\n",
      HtmlEscape(title));
  for (const ClassKeywords& ck : table.classes) {
    out += fmt::format("<tr><th>{}</th>", HtmlEscape(ck.label));
    const double top = ck.rows.empty() ? 0.0 : ck.rows.front().score;
    for (const KeywordRow& row : ck.rows) {
      const double rel = top > 0.0 ? row.score / top : 0.0;
      const std::size_t ramp = RampIndex(rel, Polarity::kPositive);
      out += fmt::format(
          "<td style=\"background-color:{}{}\" title=\"{:.6g}\">{}</td>",
          kDivergingRamp[ramp], UsesLightText(ramp) ? ";color:#ffffff" : "",
          row.score, HtmlEscape(row.word));
    }
    out += "</tr>\n";
  }
  out += "</table>\n</body>\n</html>\n";
  return out;
}

std::string RenderKeywordTableCsv(const ClassKeywordTable& table) {
  std::string out = "class,rank,word,score,document_frequency\n";
  for (const ClassKeywords& ck : table.classes) {
    for (std::size_t r = 0; r < ck.rows.size(); ++r) {
      const KeywordRow& row = ck.rows[r];
      out += fmt::format("{},{},{},{},{}\n", CsvField(ck.label), r + 1,
                         CsvField(row.word), row.score,
                         row.document_frequency);
    }
  }
  return out;
}

}  // namespace lexattr
