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

#ifndef LEXATTR_TEXT_H_
#define LEXATTR_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexattr {

// ---------------------------------------------------------------------------
// UTF-8 helpers. All character offsets in this library are indices of
// Unicode scalar values, not bytes.

std::u32string DecodeUtf8(std::string_view text);
std::string EncodeUtf8(std::u32string_view text);
std::size_t CodepointCount(std::string_view text);
// Substring by scalar-value offsets [start, end).
std::string Utf8Substr(std::string_view text, std::size_t start,
                       std::size_t end);

std::string AsciiLower(std::string_view text);

// True when every scalar value of `word` is punctuation.
bool IsPunctuationWord(std::string_view word);

// Quotes a CSV field when it contains a comma, quote or line break.
std::string CsvField(std::string_view field);

// ---------------------------------------------------------------------------
// Tokens.

enum class SpecialToken : std::uint8_t { kNone, kBos, kEos, kPad, kMask, kUnk };

struct Token {
  std::string surface;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  // Display word this token belongs to; absent for specials.
  std::optional<std::size_t> word_index;
  SpecialToken special = SpecialToken::kNone;

  bool is_special() const { return special != SpecialToken::kNone; }
};

struct TokenizedText {
  std::vector<Token> tokens;
  std::string source;

  std::size_t size() const { return tokens.size(); }
  // Number of distinct display words.
  std::size_t word_count() const;
  std::size_t non_special_count() const;
};

struct TokenizerConfig {
  // Words longer than this many scalar values are chunked into several
  // tokens that share one word_index.
  std::size_t max_chunk = 4;
};

// Whitespace + punctuation split, then fixed-length chunking. BOS/EOS are
// added around the sequence. Throws Error(kEmptyInput) when no word remains.
TokenizedText Tokenize(std::string_view text, const TokenizerConfig& config);

// Surface strings of the reserved rows.
inline constexpr std::string_view kPadSurface = "<pad>";
inline constexpr std::string_view kUnkSurface = "<unk>";
inline constexpr std::string_view kBosSurface = "<s>";
inline constexpr std::string_view kEosSurface = "</s>";
inline constexpr std::string_view kMaskSurface = "<mask>";

// Token-surface to row-id mapping. Ids 0..4 are PAD, UNK, BOS, EOS, MASK;
// regular entries follow in insertion order. Lookup is ASCII case-folded.
class Vocabulary {
 public:
  static constexpr std::size_t kPadId = 0;
  static constexpr std::size_t kUnkId = 1;
  static constexpr std::size_t kBosId = 2;
  static constexpr std::size_t kEosId = 3;
  static constexpr std::size_t kMaskId = 4;
  static constexpr std::size_t kReservedCount = 5;

  Vocabulary();

  // Builds a vocabulary from every token of `texts`, entries sorted so the
  // result does not depend on corpus order.
  static Vocabulary FromTexts(const std::vector<std::string>& texts,
                              const TokenizerConfig& config);

  std::size_t Add(std::string_view surface);
  std::size_t IdOf(const Token& token) const;
  std::optional<std::size_t> Find(std::string_view surface) const;

  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace lexattr

#endif  // LEXATTR_TEXT_H_
