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

#include "lexattr/text.h"

#include <algorithm>
#include <set>

#include "lexattr/errors.h"

namespace lexattr {
namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool IsSpace(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool IsApostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

bool IsPunct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  return c == 0xA1 || c == 0xAB || c == 0xBB || c == 0xBF ||
         (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003);
}

bool IsWordChar(char32_t c) { return !IsSpace(c) && !IsPunct(c); }

}  // namespace

std::u32string DecodeUtf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool valid = len > 0 && i + len <= text.size();
    for (std::size_t k = 1; valid && k < len; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        valid = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!valid) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string EncodeUtf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::size_t CodepointCount(std::string_view text) {
  return DecodeUtf8(text).size();
}

std::string Utf8Substr(std::string_view text, std::size_t start,
                       std::size_t end) {
  const std::u32string cps = DecodeUtf8(text);
  end = std::min(end, cps.size());
  if (start >= end) return {};
  return EncodeUtf8(std::u32string_view(cps).substr(start, end - start));
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool IsPunctuationWord(std::string_view word) {
  const std::u32string cps = DecodeUtf8(word);
  if (cps.empty()) return false;
  return std::all_of(cps.begin(), cps.end(), IsPunct);
}

std::string CsvField(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::size_t TokenizedText::word_count() const {
  std::optional<std::size_t> last;
  std::size_t count = 0;
  for (const Token& t : tokens) {
    if (t.word_index && t.word_index != last) {
      ++count;
      last = t.word_index;
    }
  }
  return count;
}

std::size_t TokenizedText::non_special_count() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(),
                    [](const Token& t) { return !t.is_special(); }));
}

TokenizedText Tokenize(std::string_view text, const TokenizerConfig& config) {
  const std::u32string cps = DecodeUtf8(text);
  const std::size_t n = cps.size();
  const std::size_t chunk = std::max<std::size_t>(config.max_chunk, 1);

  struct Span {
    std::size_t start, end;
  };
  std::vector<Span> words;
  std::size_t i = 0;
  while (i < n) {
    if (IsSpace(cps[i])) {
      ++i;
      continue;
    }
    if (IsPunct(cps[i])) {
      words.push_back({i, i + 1});
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n) {
      if (IsWordChar(cps[i])) {
        ++i;
      } else if (IsApostrophe(cps[i]) && i > start && i + 1 < n &&
                 IsWordChar(cps[i + 1])) {
        ++i;
      } else {
        break;
      }
    }
    words.push_back({start, i});
  }
  if (words.empty()) {
    throw Error(ErrorKind::kEmptyInput, "text contains no words");
  }

  TokenizedText out;
  out.source = std::string(text);
  out.tokens.push_back(
      Token{std::string(kBosSurface), 0, 0, std::nullopt, SpecialToken::kBos});
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t s = words[w].start; s < words[w].end; s += chunk) {
      const std::size_t e = std::min(s + chunk, words[w].end);
      out.tokens.push_back(Token{
          EncodeUtf8(std::u32string_view(cps).substr(s, e - s)), s, e, w,
          SpecialToken::kNone});
    }
  }
  out.tokens.push_back(
      Token{std::string(kEosSurface), n, n, std::nullopt, SpecialToken::kEos});
  return out;
}

Vocabulary::Vocabulary() {
  for (std::string_view s :
       {kPadSurface, kUnkSurface, kBosSurface, kEosSurface, kMaskSurface}) {
    Add(s);
  }
}

Vocabulary Vocabulary::FromTexts(const std::vector<std::string>& texts,
                                 const TokenizerConfig& config) {
  std::set<std::string> surfaces;
  for (const std::string& text : texts) {
    TokenizedText tokens;
    try {
      tokens = Tokenize(text, config);
    } catch (const Error&) {
      continue;
    }
    for (const Token& t : tokens.tokens) {
      if (!t.is_special()) surfaces.insert(AsciiLower(t.surface));
    }
  }
  Vocabulary vocab;
  for (const std::string& s : surfaces) vocab.Add(s);
  return vocab;
}

std::size_t Vocabulary::Add(std::string_view surface) {
  std::string key = AsciiLower(surface);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  const std::size_t id = entries_.size();
  index_.emplace(key, id);
  entries_.push_back(std::move(key));
  return id;
}

std::optional<std::size_t> Vocabulary::Find(std::string_view surface) const {
  if (auto it = index_.find(AsciiLower(surface)); it != index_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::size_t Vocabulary::IdOf(const Token& token) const {
  switch (token.special) {
    case SpecialToken::kBos: return kBosId;
    case SpecialToken::kEos: return kEosId;
    case SpecialToken::kPad: return kPadId;
    case SpecialToken::kMask: return kMaskId;
    case SpecialToken::kUnk: return kUnkId;
    case SpecialToken::kNone: break;
  }
  return Find(token.surface).value_or(kUnkId);
}

}  // namespace lexattr
