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


#include <gtest/gtest.h>

#include "lexattr/errors.h"
#include "lexattr/text.h"

namespace lexattr {
namespace {

TEST(TextTest, Utf8RoundTrip) {
  const std::string s = "naïve café ✓";
  EXPECT_EQ(EncodeUtf8(DecodeUtf8(s)), s);
  EXPECT_EQ(CodepointCount(s), 12u);
  EXPECT_EQ(Utf8Substr(s, 6, 10), "café");
}

TEST(TextTest, InvalidBytesBecomeReplacement) {
  const std::u32string cps = DecodeUtf8("a\xff" "b");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], U'�');
}

TEST(TextTest, TokenizeSplitsPunctuationAndChunks) {
  const TokenizedText t = Tokenize("unmotivated, ok!", TokenizerConfig{});
  // <s> unmo tiva ted , ok ! </s>
  ASSERT_EQ(t.size(), 8u);
  EXPECT_EQ(t.tokens[0].special, SpecialToken::kBos);
  EXPECT_EQ(t.tokens[1].surface, "unmo");
  EXPECT_EQ(t.tokens[3].surface, "ted");
  EXPECT_EQ(t.tokens[1].word_index, t.tokens[3].word_index);
  EXPECT_EQ(t.tokens[4].surface, ",");
  EXPECT_EQ(t.tokens[7].special, SpecialToken::kEos);
  EXPECT_EQ(t.word_count(), 4u);
  EXPECT_EQ(t.non_special_count(), 6u);
  EXPECT_FALSE(t.tokens[0].word_index.has_value());
}

TEST(TextTest, OffsetsAreScalarValues) {
  const TokenizedText t = Tokenize("é ab", TokenizerConfig{});
  EXPECT_EQ(t.tokens[1].char_start, 0u);
  EXPECT_EQ(t.tokens[1].char_end, 1u);
  EXPECT_EQ(t.tokens[2].char_start, 2u);
  EXPECT_EQ(t.tokens[3].char_start, 4u);  // EOS at the end
}

TEST(TextTest, InternalApostropheStaysInWord) {
  const TokenizedText t = Tokenize("isn't 'quoted'", TokenizerConfig{8});
  EXPECT_EQ(t.tokens[1].surface, "isn't");
  EXPECT_EQ(t.tokens[2].surface, "'");
  EXPECT_EQ(t.tokens[3].surface, "quoted");
}

TEST(TextTest, EmptyInputThrows) {
  try {
    Tokenize("   \n ", TokenizerConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyInput);
  }
}

TEST(TextTest, VocabularyIsCaseFoldedAndSorted) {
  const Vocabulary v = Vocabulary::FromTexts({"b A", "a c"}, TokenizerConfig{});
  ASSERT_EQ(v.size(), Vocabulary::kReservedCount + 3);
  EXPECT_EQ(v.entries()[Vocabulary::kReservedCount], "a");
  EXPECT_EQ(*v.Find("B"), Vocabulary::kReservedCount + 1);
  const TokenizedText t = Tokenize("zzz", TokenizerConfig{});
  EXPECT_EQ(v.IdOf(t.tokens[0]), Vocabulary::kBosId);
  EXPECT_EQ(v.IdOf(t.tokens[1]), Vocabulary::kUnkId);
  EXPECT_EQ(v.IdOf(t.tokens[2]), Vocabulary::kEosId);
}

TEST(TextTest, CsvFieldQuotes) {
  EXPECT_EQ(CsvField("plain"), "plain");
  EXPECT_EQ(CsvField("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvField("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(TextTest, PunctuationWord) {
  EXPECT_TRUE(IsPunctuationWord("!?"));
  EXPECT_FALSE(IsPunctuationWord("a!"));
}

}  // namespace
}  // namespace lexattr
