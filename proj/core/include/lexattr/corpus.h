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


#ifndef LEXATTR_CORPUS_H_
#define LEXATTR_CORPUS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexattr/highlight.h"
#include "lexattr/render.h"

namespace lexattr {

struct WordAnnotation {
  std::optional<std::string> lemma;
  std::optional<std::size_t> head;
  DepLabel label = DepLabel::kOther;
};

// One line of a corpus file:
//   {"id": "7", "text": "...", "label": "pos", "target": 1,
//    "sentences": [[0, 12], ...],
//    "highlights": [{"reader": "r1", "spans": [[3, 9]]}],
//    "words": [{"lemma": "be", "head": 2, "dep": "neg"}, ...]}
// Only id and text are required. Numeric labels are kept in their JSON
// spelling. Offsets are scalar-value indices into text.
struct CorpusRecord {
  std::string id;
  std::string text;
  std::optional<std::string> label;
  std::optional<std::size_t> target;
  std::vector<CharSpan> sentences;
  std::vector<ReaderHighlights> highlights;
  std::vector<WordAnnotation> words;

  bool has_offsets() const {
    return !sentences.empty() || !highlights.empty() || !words.empty();
  }
  // Dependency arcs from the annotations; nullopt unless every word has a
  // head.
  std::optional<DepAnnotation> dependencies() const;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct Corpus {
  std::vector<CorpusRecord> records;
  std::vector<LineError> errors;
};

// Drops @mentions and URLs, replaces control characters and collapses
// whitespace runs to single spaces.
std::string CleanText(std::string_view text);

// Parses JSONL. Malformed lines are collected, the rest kept. Cleaning is
// applied only to records without offsets, since it would move them.
// Throws Error(kIo) for an unreadable file, Error(kAllLinesMalformed) when
// nothing parses and Error(kValidation) on duplicate ids.
Corpus ParseCorpus(std::string_view content, bool clean);
Corpus LoadCorpus(const std::string& path, bool clean);

}  // namespace lexattr

#endif  // LEXATTR_CORPUS_H_
