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


#ifndef LEXATTR_SYNTHETIC_H_
#define LEXATTR_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lexattr/model.h"
#include "lexattr/rng.h"
#include "lexattr/saliency.h"

namespace lexattr {

// Generators for seeded test corpora. Every word they emit is at most four
// characters long unless stated, so one word is one token.

// Filler words shared by every generator.
const std::vector<std::string>& FillerWords();

// Sentence of uniformly drawn filler words, optionally ending with '.'.
std::string RandomSentence(Rng& rng, std::size_t min_words,
                           std::size_t max_words, bool period = true);
std::vector<std::string> RandomSentences(std::size_t count, std::uint64_t seed,
                                         std::size_t min_words = 4,
                                         std::size_t max_words = 14);

// Scalar model where one planted word per document carries all the signal:
// signal rows lie on a ray along which the output increases, every other
// row is zero.
struct PlantedSignalSetup {
  ModelParams params;
  std::vector<std::string> documents;
  std::vector<std::string> signal_words;
};
PlantedSignalSetup MakePlantedSignal(std::uint64_t seed, std::size_t documents,
                                     const ArchConfig& arch = ArchConfig{});

// Documents of filler words plus exactly one class marker each, classes
// balanced round-robin. Markers never occur in filler text.
struct PlantedMarkerCorpus {
  std::vector<LabeledDocument> documents;
  std::vector<std::string> class_names;  // sorted
  std::vector<std::string> markers;      // markers[c] belongs to class c
};
PlantedMarkerCorpus MakePlantedMarkerCorpus(std::uint64_t seed,
                                            std::size_t documents = 64,
                                            std::size_t classes = 3);

}  // namespace lexattr

#endif  // LEXATTR_SYNTHETIC_H_
