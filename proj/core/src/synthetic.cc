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


#include "lexattr/synthetic.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lexattr/errors.h"

namespace lexattr {
namespace {

const std::vector<std::string>& SignalWords() {
  static const std::vector<std::string> words = {"good", "nice", "kind",
                                                 "warm", "glad", "calm"};
  return words;
}

const std::vector<std::string>& MarkerWords() {
  static const std::vector<std::string> words = {"zork", "quux", "blip", "vorn",
                                                 "grok", "yelp", "jinx", "wisp"};
  return words;
}

template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.Index(i)]);
  }
}

std::string Join(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& FillerWords() {
  static const std::vector<std::string> words = {
      "the",  "a",    "of",   "to",   "and",  "in",   "it",   "on",
      "for",  "with", "was",  "as",   "at",   "by",   "this", "from",
      "they", "we",   "she",  "he",   "that", "day",  "road", "tree",
      "book", "rain", "city", "time", "year", "hand", "door", "room",
      "car",  "sea",  "sky",  "bird", "fish", "game", "song", "film",
      "walk", "talk", "look", "read", "sit",  "run",  "eat",  "went",
      "came", "saw",  "made", "took", "gave", "left", "old",  "new",
      "red",  "blue", "long", "late", "near", "far",  "then", "now"};
  return words;
}

std::string RandomSentence(Rng& rng, std::size_t min_words,
                           std::size_t max_words, bool period) {
  const auto& filler = FillerWords();
  const std::size_t n = min_words + rng.Index(max_words - min_words + 1);
  std::vector<std::string> words(n);
  for (auto& w : words) w = filler[rng.Index(filler.size())];
  std::string out = Join(words);
  if (period) out.push_back('.');
  return out;
}

std::vector<std::string> RandomSentences(std::size_t count, std::uint64_t seed,
                                         std::size_t min_words,
                                         std::size_t max_words) {
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(RandomSentence(rng, min_words, max_words));
  }
  return out;
}

PlantedSignalSetup MakePlantedSignal(std::uint64_t seed, std::size_t documents,
                                     const ArchConfig& arch) {
  if (arch.head != HeadKind::kScalar) {
    throw Error(ErrorKind::kValidation, "planted-signal model is scalar");
  }
  Rng rng(seed);
  const auto& filler = FillerWords();
  const auto& signal = SignalWords();
  PlantedSignalSetup setup;
  setup.signal_words = signal;
  for (std::size_t d = 0; d < documents; ++d) {
    const std::size_t n = 5 + rng.Index(10);
    std::vector<std::string> words(n);
    for (auto& w : words) w = filler[rng.Index(filler.size())];
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.Index(n + 1)),
                 signal[rng.Index(signal.size())]);
    setup.documents.push_back(Join(words));
  }
  std::vector<std::string> texts = setup.documents;
  texts.insert(texts.end(), signal.begin(), signal.end());
  ModelParams p = InitParams(
      arch, Vocabulary::FromTexts(texts, arch.tokenizer), rng.Next());

  // Signal rows point along the output gradient at the origin, scaled down
  // until the output is monotone along that ray.
  ForwardTrace origin = Trace(
      EmbeddingMatrix(1, arch.embedding_dim), p);
  std::vector<double> u = PooledGradient(origin, p, 0);
  double norm = 0.0;
  for (double v : u) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw Error(ErrorKind::kValidation, "flat model at origin");
  for (double& v : u) v /= norm;
  auto value_at = [&](double t) {
    EmbeddingMatrix x(1, arch.embedding_dim);
    for (std::size_t c = 0; c < arch.embedding_dim; ++c) x.values(0, c) = t * u[c];
    return Forward(x, p, std::nullopt).value;
  };
  double strength = 4.0;
  for (;;) {
    bool monotone = true;
    double prev = value_at(0.0);
    for (int k = 1; k <= 256 && monotone; ++k) {
      const double v = value_at(strength * k / 256.0);
      monotone = v > prev;
      prev = v;
    }
    if (monotone) break;
    strength *= 0.5;
  }
  p.embeddings = Matrix(p.embeddings.rows(), p.embeddings.cols());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    const std::size_t id = *p.vocab.Find(signal[i]);
    const double g = strength * (1.0 - 0.1 * static_cast<double>(i));
    for (std::size_t c = 0; c < arch.embedding_dim; ++c) {
      p.embeddings(id, c) = g * u[c];
    }
  }
  setup.params = std::move(p);
  return setup;
}

PlantedMarkerCorpus MakePlantedMarkerCorpus(std::uint64_t seed,
                                            std::size_t documents,
                                            std::size_t classes) {
  if (classes < 2 || classes > MarkerWords().size()) {
    throw Error(ErrorKind::kValidation,
                fmt::format("class count must be in [2, {}]", MarkerWords().size()));
  }
  Rng rng(seed);
  const auto& filler = FillerWords();
  PlantedMarkerCorpus corpus;
  for (std::size_t c = 0; c < classes; ++c) {
    corpus.class_names.push_back(fmt::format("class{}", c));
    corpus.markers.push_back(MarkerWords()[c]);
  }
  for (std::size_t d = 0; d < documents; ++d) {
    const std::size_t c = d % classes;
    const std::size_t n = 5 + rng.Index(8);
    std::vector<std::string> words(n);
    for (auto& w : words) w = filler[rng.Index(filler.size())];
    words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.Index(n + 1)),
                 corpus.markers[c]);
    LabeledDocument doc;
    doc.id = fmt::format("d{}", d);
    doc.text = Join(words);
    doc.label = corpus.class_names[c];
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

}  // namespace lexattr
