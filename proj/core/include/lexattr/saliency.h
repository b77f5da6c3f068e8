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


#ifndef LEXATTR_SALIENCY_H_
#define LEXATTR_SALIENCY_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexattr/attribution.h"
#include "lexattr/model.h"
#include "lexattr/trainer.h"

namespace lexattr {

struct LabeledDocument {
  std::string id;
  std::string text;
  // Absent for unlabeled (NA) documents.
  std::optional<std::string> label;
  // Optional lemma per display word; empty or one entry per word.
  std::vector<std::optional<std::string>> lemmas;
};

// Maps a numeric label in [lo, hi] to a named class, e.g. "low" for 1..2.
struct LabelBin {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

enum class NaPolicy { kExclude, kExtraClass };
// kMean divides a word's class total by its document frequency.
enum class Aggregation { kSum, kMean };

inline constexpr std::string_view kNaClassName = "NA";

struct KeywordRow {
  std::string word;
  double score = 0.0;
  std::size_t document_frequency = 0;
};

struct ClassKeywords {
  std::string label;
  std::vector<KeywordRow> rows;  // score descending
};

struct ClassKeywordTable {
  std::size_t k = 20;
  std::vector<ClassKeywords> classes;
};

// Lemma when given, else the lowercased surface without surrounding
// punctuation.
std::string NormalizeWordForm(std::string_view surface,
                              const std::optional<std::string>& lemma);

// Positive word contributions of one attributed document, keyed by
// normalized form. A form occurring twice in a document is summed.
struct DocumentKeywords {
  std::size_t class_index = 0;
  std::vector<std::pair<std::string, double>> words;
};

// Per-class accumulation and top-k ranking. Ties rank by word. Throws
// Error(kEmptyClassTable) when a class ends up with no positive word.
ClassKeywordTable AggregateClassKeywords(
    const std::vector<DocumentKeywords>& documents,
    const std::vector<std::string>& class_names, std::size_t k,
    Aggregation aggregation);

struct ExtractionConfig {
  ArchConfig arch;
  TrainerConfig trainer;
  BaselineKind baseline = BaselineKind::kZero;
  QuadratureRule rule{QuadratureKind::kTrapezoid, 300};
  std::size_t top_k = 20;
  Aggregation aggregation = Aggregation::kSum;
  NaPolicy na_policy = NaPolicy::kExclude;
  // When non-empty, labels are parsed as numbers and binned; unbinned
  // values are a validation error.
  std::vector<LabelBin> bins;
  std::size_t threads = 1;
};

struct ExtractionResult {
  ClassKeywordTable table;
  std::vector<std::string> class_names;
  TrainingTrace trace;
  ModelParams params;
  std::size_t excluded_na = 0;
};

// Overfits a classifier on the labeled documents, attributes each one toward
// its own class logit, and aggregates positive word scores per class.
// Errors from training (kNotConverged, kValidation) propagate.
ExtractionResult ExtractKeywords(const std::vector<LabeledDocument>& documents,
                                 const ExtractionConfig& config);

// Keywords shaded by score relative to the class maximum.
std::string RenderKeywordTableHtml(const ClassKeywordTable& table,
                                   std::string_view title);
// class,rank,word,score,document_frequency
std::string RenderKeywordTableCsv(const ClassKeywordTable& table);

}  // namespace lexattr

#endif  // LEXATTR_SALIENCY_H_
