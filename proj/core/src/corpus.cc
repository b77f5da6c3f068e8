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


#include "lexattr/corpus.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lexattr/errors.h"
#include "lexattr/text.h"

namespace lexattr {
namespace {

using json = nlohmann::json;

bool IsSpace(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v';
}

bool IsWordChar(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
         (c >= U'0' && c <= U'9') || c == U'_' || c > 0x7f;
}

bool StartsWith(std::u32string_view s, std::u32string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string LabelText(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw Error(ErrorKind::kValidation, "label must be a string or number");
}

CharSpan ParseSpan(const json& v, std::size_t length, std::string_view what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() ||
      !v[1].is_number_unsigned()) {
    throw Error(ErrorKind::kValidation,
                fmt::format("{} must be [start, end] offsets", what));
  }
  const CharSpan s{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
  if (s.first > s.second || s.second > length) {
    throw Error(ErrorKind::kValidation,
                fmt::format("{} [{}, {}) outside text of length {}", what,
                            s.first, s.second, length));
  }
  return s;
}

CorpusRecord ParseRecord(const std::string& line, bool clean) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kValidation, "not a JSON object");
  CorpusRecord r;
  const auto id = j.find("id");
  if (id == j.end() || !(id->is_string() || id->is_number_integer())) {
    throw Error(ErrorKind::kValidation, "missing id");
  }
  r.id = id->is_string() ? id->get<std::string>() : id->dump();
  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) {
    throw Error(ErrorKind::kValidation, fmt::format("record {}: missing text", r.id));
  }
  r.text = text->get<std::string>();
  try {
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
      r.label = LabelText(*it);
    }
    if (auto it = j.find("target"); it != j.end() && !it->is_null()) {
      if (!it->is_number_unsigned()) {
        throw Error(ErrorKind::kValidation, "target must be a class index");
      }
      r.target = it->get<std::size_t>();
    }
    const std::size_t length = CodepointCount(r.text);
    if (auto it = j.find("sentences"); it != j.end()) {
      for (const json& s : *it) r.sentences.push_back(ParseSpan(s, length, "sentence"));
    }
    if (auto it = j.find("highlights"); it != j.end()) {
      for (const json& h : *it) {
        ReaderHighlights rh;
        rh.reader = h.value("reader", std::string());
        for (const json& s : h.at("spans")) {
          rh.spans.push_back(ParseSpan(s, length, "highlight"));
        }
        r.highlights.push_back(std::move(rh));
      }
    }
    if (auto it = j.find("words"); it != j.end()) {
      for (const json& w : *it) {
        WordAnnotation a;
        if (auto l = w.find("lemma"); l != w.end() && l->is_string()) {
          a.lemma = l->get<std::string>();
        }
        if (auto h = w.find("head"); h != w.end() && h->is_number_unsigned()) {
          a.head = h->get<std::size_t>();
        }
        if (auto d = w.find("dep"); d != w.end() && d->is_string()) {
          a.label = ParseDepLabel(d->get<std::string>());
        }
        r.words.push_back(std::move(a));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation,
                fmt::format("record {}: {}", r.id, e.what()));
  } catch (const Error& e) {
    throw Error(ErrorKind::kValidation,
                fmt::format("record {}: {}", r.id, e.message()));
  }
  if (clean && !r.has_offsets()) r.text = CleanText(r.text);
  std::size_t words = 0;
  try {
    words = Tokenize(r.text, TokenizerConfig{}).word_count();
  } catch (const Error&) {
    throw Error(ErrorKind::kValidation,
                fmt::format("record {}: text has no words", r.id));
  }
  if (!r.words.empty()) {
    if (r.words.size() != words) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("record {}: {} word annotations for {} words",
                              r.id, r.words.size(), words));
    }
    for (const WordAnnotation& a : r.words) {
      if (a.head && *a.head >= words) {
        throw Error(ErrorKind::kValidation,
                    fmt::format("record {}: head {} out of range", r.id, *a.head));
      }
    }
  }
  return r;
}

}  // namespace

std::optional<DepAnnotation> CorpusRecord::dependencies() const {
  if (words.empty()) return std::nullopt;
  DepAnnotation dep;
  for (const WordAnnotation& a : words) {
    if (!a.head) return std::nullopt;
    dep.push_back({*a.head, a.label});
  }
  return dep;
}

std::string CleanText(std::string_view text) {
  const std::u32string chars = DecodeUtf8(text);
  std::vector<std::u32string> pieces;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) pieces.push_back(std::move(current));
    current.clear();
  };
  for (char32_t c : chars) {
    if (IsSpace(c) || c < 0x20 || c == 0x7f || (c >= 0x80 && c < 0xa0)) {
      flush();
    } else {
      current.push_back(c);
    }
  }
  flush();
  std::u32string out;
  for (const std::u32string& piece : pieces) {
    if (StartsWith(piece, U"http://") || StartsWith(piece, U"https://") ||
        StartsWith(piece, U"www.")) {
      continue;
    }
    std::u32string kept;
    for (std::size_t i = 0; i < piece.size();) {
      if (piece[i] == U'@' && i + 1 < piece.size() && IsWordChar(piece[i + 1])) {
        ++i;
        while (i < piece.size() && IsWordChar(piece[i])) ++i;
        continue;
      }
      kept.push_back(piece[i++]);
    }
    if (kept.empty()) continue;
    if (!out.empty()) out.push_back(U' ');
    out += kept;
  }
  return EncodeUtf8(out);
}

Corpus ParseCorpus(std::string_view content, bool clean) {
  Corpus corpus;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      corpus.records.push_back(ParseRecord(line, clean));
    } catch (const Error& e) {
      corpus.errors.push_back({number, e.message()});
    }
  }
  if (corpus.records.empty()) {
    throw Error(ErrorKind::kAllLinesMalformed,
                fmt::format("no valid record ({} malformed line(s))",
                            corpus.errors.size()));
  }
  std::map<std::string, std::size_t> seen;
  std::set<std::string> duplicates;
  for (const CorpusRecord& r : corpus.records) {
    if (++seen[r.id] > 1) duplicates.insert(r.id);
  }
  if (!duplicates.empty()) {
    std::string list;
    for (const std::string& id : duplicates) {
      list += (list.empty() ? "" : ", ") + id;
    }
    throw Error(ErrorKind::kValidation, "duplicate ids: " + list);
  }
  return corpus;
}

Corpus LoadCorpus(const std::string& path, bool clean) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read corpus " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseCorpus(buf.str(), clean);
}

}  // namespace lexattr
