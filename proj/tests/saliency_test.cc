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
#include "lexattr/saliency.h"
#include "lexattr/synthetic.h"

namespace lexattr {
namespace {

TEST(WordFormTest, LemmaOrFoldedSurface) {
  EXPECT_EQ(NormalizeWordForm("Obsessed", std::string("obsess")), "obsess");
  EXPECT_EQ(NormalizeWordForm("Walking", std::nullopt), "walking");
  EXPECT_EQ(NormalizeWordForm("dog,", std::nullopt), "dog");
  EXPECT_EQ(NormalizeWordForm("\"Hi!\"", std::nullopt), "hi");
  EXPECT_EQ(NormalizeWordForm("!!", std::nullopt), "");
}

TEST(AggregateTest, SumsPositiveScoresAndCountsDocuments) {
  const std::vector<DocumentKeywords> docs = {
      {0, {{"a", 0.5}, {"b", 0.2}, {"a", 0.1}}},
      {0, {{"b", 0.3}, {"c", -1.0}}},
      {1, {{"z", 1.0}}}};
  const ClassKeywordTable t = AggregateClassKeywords(docs, {"x", "y"}, 5, Aggregation::kSum);
  ASSERT_EQ(t.classes[0].rows.size(), 2u);
  EXPECT_EQ(t.classes[0].rows[0].word, "a");
  EXPECT_DOUBLE_EQ(t.classes[0].rows[0].score, 0.6);
  EXPECT_EQ(t.classes[0].rows[0].document_frequency, 1u);
  EXPECT_EQ(t.classes[0].rows[1].document_frequency, 2u);
  const ClassKeywordTable mean = AggregateClassKeywords(docs, {"x", "y"}, 5, Aggregation::kMean);
  EXPECT_DOUBLE_EQ(mean.classes[0].rows[1].score, 0.25);
}

TEST(AggregateTest, DuplicationDoublesExactly) {
  std::vector<DocumentKeywords> docs = {{0, {{"a", 0.1}, {"b", 0.7}}},
                                        {0, {{"a", 0.2}, {"c", 1e-9}}},
                                        {1, {{"d", 0.3}}}};
  const ClassKeywordTable once = AggregateClassKeywords(docs, {"x", "y"}, 10, Aggregation::kSum);
  std::vector<DocumentKeywords> twice = docs;
  twice.push_back(docs[0]);
  twice.push_back(docs[1]);
  const ClassKeywordTable doubled =
      AggregateClassKeywords(twice, {"x", "y"}, 10, Aggregation::kSum);
  ASSERT_EQ(once.classes[0].rows.size(), doubled.classes[0].rows.size());
  for (std::size_t i = 0; i < once.classes[0].rows.size(); ++i) {
    EXPECT_EQ(doubled.classes[0].rows[i].word, once.classes[0].rows[i].word);
    EXPECT_EQ(doubled.classes[0].rows[i].score, 2.0 * once.classes[0].rows[i].score);
  }
  EXPECT_EQ(doubled.classes[1].rows[0].score, 0.3);
}

TEST(AggregateTest, TruncatesAndRejectsEmptyClass) {
  const std::vector<DocumentKeywords> docs = {{0, {{"a", 1}, {"b", 2}}}, {1, {{"c", 1}}}};
  EXPECT_EQ(AggregateClassKeywords(docs, {"x", "y"}, 1, Aggregation::kSum).classes[0].rows.size(), 1u);
  EXPECT_EQ(AggregateClassKeywords(docs, {"x", "y"}, 50, Aggregation::kSum).classes[0].rows.size(), 2u);
  try {
    AggregateClassKeywords({{0, {{"a", 1}}}, {1, {{"c", -1}}}}, {"x", "y"}, 5, Aggregation::kSum);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyClassTable);
  }
}

TEST(ExtractTest, RecoversPlantedMarkers) {
  const PlantedMarkerCorpus corpus = MakePlantedMarkerCorpus(2);
  ExtractionConfig config;
  config.top_k = 5;
  config.rule.steps = 50;
  config.threads = 2;
  const ExtractionResult r = ExtractKeywords(corpus.documents, config);
  ASSERT_EQ(r.class_names, corpus.class_names);
  for (std::size_t c = 0; c < 3; ++c) {
    bool found = false;
    for (const KeywordRow& row : r.table.classes[c].rows) found |= row.word == corpus.markers[c];
    EXPECT_TRUE(found) << corpus.markers[c];
  }
  const ExtractionResult again = ExtractKeywords(corpus.documents, config);
  EXPECT_EQ(RenderKeywordTableCsv(r.table), RenderKeywordTableCsv(again.table));
}

TEST(ExtractTest, NaDocumentsAreExcludedOrClassed) {
  PlantedMarkerCorpus corpus = MakePlantedMarkerCorpus(5, 12, 2);
  corpus.documents.push_back({"na1", "the sky and sea", std::nullopt, {}});
  corpus.documents.push_back({"na2", "a bird on a tree", std::string("NA"), {}});
  ExtractionConfig config;
  config.rule.steps = 20;
  const ExtractionResult r = ExtractKeywords(corpus.documents, config);
  EXPECT_EQ(r.excluded_na, 2u);
  EXPECT_EQ(r.class_names.size(), 2u);
  config.na_policy = NaPolicy::kExtraClass;
  const ExtractionResult with_na = ExtractKeywords(corpus.documents, config);
  EXPECT_EQ(with_na.class_names.back(), "NA");
  EXPECT_EQ(with_na.excluded_na, 0u);
}

TEST(ExtractTest, NumericLabelsAreBinned) {
  std::vector<LabeledDocument> docs = {{"1", "zork the sea", std::string("1"), {}},
                                       {"2", "zork a road", std::string("2"), {}},
                                       {"3", "quux the sea", std::string("6"), {}},
                                       {"4", "quux a road", std::string("7"), {}}};
  ExtractionConfig config;
  config.rule.steps = 20;
  config.bins = {{"low", 1, 2}, {"high", 6, 7}};
  const ExtractionResult r = ExtractKeywords(docs, config);
  EXPECT_EQ(r.class_names, (std::vector<std::string>{"low", "high"}));
  EXPECT_EQ(r.table.classes[0].rows[0].word, "zork");
  docs[0].label = "4";
  EXPECT_THROW(ExtractKeywords(docs, config), Error);
}

TEST(ExtractTest, InseparableCorpusDoesNotConverge) {
  std::vector<LabeledDocument> docs = {{"1", "same text", std::string("a"), {}},
                                       {"2", "same text", std::string("b"), {}}};
  ExtractionConfig config;
  config.trainer.max_epochs = 30;
  try {
    ExtractKeywords(docs, config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotConverged);
  }
}

TEST(ExtractTest, LemmasKeyTheTable) {
  std::vector<LabeledDocument> docs = {
      {"1", "Zorks run", std::string("a"), {std::string("zork"), std::nullopt}},
      {"2", "zork ran", std::string("a"), {}},
      {"3", "quux sat", std::string("b"), {}}};
  ExtractionConfig config;
  config.rule.steps = 20;
  const ExtractionResult r = ExtractKeywords(docs, config);
  bool zork = false, zorks = false;
  for (const KeywordRow& row : r.table.classes[0].rows) {
    zork |= row.word == "zork";
    zorks |= row.word == "zorks";
  }
  EXPECT_TRUE(zork);
  EXPECT_FALSE(zorks);
  docs[0].lemmas.pop_back();
  EXPECT_THROW(ExtractKeywords(docs, config), Error);
}

TEST(KeywordTableTest, Rendering) {
  ClassKeywordTable t;
  t.classes = {{"pos", {{"good", 2.0, 3}, {"fine, ok", 0.5, 1}}}, {"empty", {}}};
  const std::string csv = RenderKeywordTableCsv(t);
  EXPECT_EQ(csv,
            "class,rank,word,score,document_frequency\n"
            "pos,1,good,2,3\n"
            "pos,2,\"fine, ok\",0.5,1\n");
  const std::string html = RenderKeywordTableHtml(t, "Keywords");
  EXPECT_NE(html.find("background-color:#4d9221;color:#ffffff\" title=\"2\">good"),
            std::string::npos);
  EXPECT_NE(html.find("<tr><th>empty</th></tr>"), std::string::npos);
}

}  // namespace
}  // namespace lexattr
