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


#include <cmath>

#include <gtest/gtest.h>

#include "lexattr/errors.h"
#include "lexattr/model.h"
#include "lexattr/trainer.h"
#include "test_util.h"

namespace lexattr {
namespace {

using testing::FillerModel;
using testing::RandomInput;
using testing::SmallArch;

double CentralDifference(const ModelParams& p, EmbeddingMatrix x,
                         const Target& target, std::size_t r, std::size_t c,
                         double h) {
  const double orig = x.values(r, c);
  x.values(r, c) = orig + h;
  const double up = Forward(x, p, target).value;
  x.values(r, c) = orig - h;
  const double down = Forward(x, p, target).value;
  return (up - down) / (2.0 * h);
}

TEST(ModelTest, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const ArchConfig arch = SmallArch(Activation::kTanh, HeadKind::kClasses, 3);
    const ModelParams p = FillerModel(arch, 100 + trial);
    const EmbeddingMatrix x = RandomInput(rng, 2 + trial % 5, arch.embedding_dim);
    const Target target = trial % 3;
    const ModelOutput g = Gradient(x, p, target);
    ASSERT_TRUE(g.gradient);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) {
        const double fd = CentralDifference(p, x, target, r, c, 1e-5);
        EXPECT_NEAR(g.gradient->values(r, c), fd, 1e-8);
      }
    }
  }
}

TEST(ModelTest, PadRowsAreIgnored) {
  Rng rng(3);
  const ModelParams p = FillerModel(SmallArch(), 5);
  EmbeddingMatrix x = RandomInput(rng, 4, 6);
  const double base = Forward(x, p, std::nullopt).value;
  EmbeddingMatrix padded(5, 6);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 6; ++c) padded.values(r, c) = x.values(r, c);
  }
  for (std::size_t c = 0; c < 6; ++c) padded.values(4, c) = 9.0;
  padded.padding = {0, 0, 0, 0, 1};
  EXPECT_DOUBLE_EQ(Forward(padded, p, std::nullopt).value, base);
  const ModelOutput g = Gradient(padded, p, std::nullopt);
  for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(g.gradient->values(4, c), 0.0);
}

TEST(ModelTest, EmbedMapsTokensToRows) {
  const ModelParams p = FillerModel(SmallArch(), 1);
  const TokenizedText t = Tokenize("the road", p.arch.tokenizer);
  const EmbeddingMatrix x = Embed(t, p);
  ASSERT_EQ(x.rows(), 4u);
  const std::size_t id = *p.vocab.Find("road");
  for (std::size_t c = 0; c < x.cols(); ++c) {
    EXPECT_EQ(x.values(2, c), p.embeddings(id, c));
    EXPECT_EQ(x.values(0, c), p.embeddings(Vocabulary::kBosId, c));
  }
  EXPECT_TRUE(x.padding.empty());
}

TEST(ModelTest, ShapeAndTargetErrors) {
  const ModelParams p = FillerModel(SmallArch(Activation::kTanh, HeadKind::kClasses, 2), 1);
  EmbeddingMatrix wrong(3, 4);
  EXPECT_THROW(Forward(wrong, p, 0), Error);
  EmbeddingMatrix ok(3, 6);
  try {
    Forward(ok, p, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShapeError);
  }
}

TEST(ModelTest, SaveLoadRoundTripsExactly) {
  const ModelParams p = FillerModel(SmallArch(Activation::kIdentity), 77);
  const ModelParams q = LoadParams(SaveParams(p));
  EXPECT_TRUE(p == q);
  EXPECT_EQ(q.arch.activation, Activation::kIdentity);
  EXPECT_THROW(LoadParams("{\"format\":\"other\"}"), Error);
}

TEST(ModelTest, InitIsDeterministic) {
  EXPECT_TRUE(FillerModel(SmallArch(), 9) == FillerModel(SmallArch(), 9));
  EXPECT_FALSE(FillerModel(SmallArch(), 9) == FillerModel(SmallArch(), 10));
}

TEST(TrainerTest, OverfitsPlantedMarkers) {
  const PlantedMarkerCorpus corpus = MakePlantedMarkerCorpus(4, 30, 3);
  std::vector<TrainingExample> examples;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    examples.push_back({corpus.documents[i].text, static_cast<double>(i % 3)});
  }
  ArchConfig arch;
  arch.head = HeadKind::kClasses;
  arch.n_classes = 3;
  TrainerConfig config;
  config.max_epochs = 200;
  const TrainResult r = TrainOverfit(examples, arch, config);
  EXPECT_EQ(r.trace.accuracy, 1.0);
  EXPECT_LE(r.trace.epochs, 200u);
  EXPECT_EQ(TrainingAccuracy(r.params, examples), 1.0);
  EXPECT_EQ(r.trace.best_loss.back(), *std::min_element(r.trace.loss.begin(), r.trace.loss.end()));
  // Same seed, same model.
  EXPECT_TRUE(TrainOverfit(examples, arch, config).params == r.params);
}

TEST(TrainerTest, IdenticalDocumentsDoNotConverge) {
  std::vector<TrainingExample> examples = {{"same words here", 0},
                                           {"same words here", 1}};
  ArchConfig arch;
  arch.head = HeadKind::kClasses;
  arch.n_classes = 2;
  TrainerConfig config;
  config.max_epochs = 50;
  try {
    TrainOverfit(examples, arch, config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNotConverged);
  }
}

TEST(TrainerTest, RejectsSingleClass) {
  ArchConfig arch;
  arch.head = HeadKind::kClasses;
  arch.n_classes = 2;
  EXPECT_THROW(TrainOverfit({{"a b", 0}, {"c d", 0}}, arch, TrainerConfig{}),
               Error);
}

TEST(TrainerTest, ScalarRegressionConverges) {
  ArchConfig arch;
  TrainerConfig config;
  config.learning_rate = 0.5;
  config.max_epochs = 3000;
  const TrainResult r =
      TrainOverfit({{"good day", 0.8}, {"bad day", -0.6}, {"day", 0.1}}, arch, config);
  EXPECT_EQ(r.trace.accuracy, 1.0);
}

}  // namespace
}  // namespace lexattr
