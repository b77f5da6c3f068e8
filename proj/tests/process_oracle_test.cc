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

#include <chrono>

#include "lexattr/attribution.h"
#include "lexattr/errors.h"
#include "lexattr/process_oracle.h"
#include "test_util.h"

namespace lexattr {
namespace {

const std::string kFixture = LEXATTR_FIXTURE_ORACLE;

ErrorKind KindOfCall(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

ModelParams FixtureDefaultParams() {
  return InitParams(ArchConfig{}, Vocabulary::FromTexts(FillerWords(), {}), 1);
}

TEST(ProcessOracleTest, MatchesBuiltinBitForBit) {
  ProcessOracle remote(kFixture);
  BuiltinOracle local(FixtureDefaultParams());
  EXPECT_EQ(remote.descriptor().embedding_dim, local.descriptor().embedding_dim);
  EXPECT_EQ(remote.descriptor().mask_embedding, local.descriptor().mask_embedding);
  const EmbeddedText e = remote.Embed("the sun was very warm");
  EXPECT_EQ(e.x, local.Embed("the sun was very warm").x);
  AttributionSettings s;
  s.rule = {QuadratureKind::kTrapezoid, 40};
  const AttributionVector a = Attribute(remote, e.tokens, e.x, s, std::nullopt);
  const AttributionVector b = Attribute(local, e.tokens, e.x, s, std::nullopt);
  EXPECT_EQ(a.scores, b.scores);
  EXPECT_EQ(a.f_x, b.f_x);
}

TEST(ProcessOracleTest, BatchesRequests) {
  ProcessOracleOptions opt;
  opt.batch_size = 8;
  ProcessOracle remote(kFixture, opt);
  const EmbeddedText e = remote.Embed("a b c");
  const std::size_t before = remote.requests_sent();
  std::vector<EmbeddingMatrix> xs(20, e.x);
  EXPECT_EQ(remote.EvaluateBatch(xs, std::nullopt, true).size(), 20u);
  EXPECT_EQ(remote.requests_sent() - before, 3u);
}

TEST(ProcessOracleTest, HandshakeFailures) {
  EXPECT_EQ(KindOfCall([] { ProcessOracle p(kFixture + " --bad-version"); }),
            ErrorKind::kVersionMismatch);
  EXPECT_EQ(KindOfCall([] { ProcessOracle p(kFixture + " --garbage-after 0"); }),
            ErrorKind::kProtocolError);
  EXPECT_EQ(KindOfCall([] { ProcessOracle p("/nonexistent/oracle-binary"); }),
            ErrorKind::kTimeout);
}

TEST(ProcessOracleTest, DeadChildPoisonsSession) {
  ProcessOracle remote(kFixture + " --exit-after 2");
  const EmbeddedText e = remote.Embed("a b");
  EXPECT_EQ(KindOfCall([&] { remote.Evaluate(e.x, std::nullopt, true); }),
            ErrorKind::kTimeout);
  EXPECT_EQ(KindOfCall([&] { remote.Embed("a"); }), ErrorKind::kTimeout);
}

TEST(ProcessOracleTest, GarbageIsProtocolError) {
  ProcessOracle remote(kFixture + " --garbage-after 1");
  EXPECT_EQ(KindOfCall([&] { remote.Embed("a b"); }), ErrorKind::kProtocolError);
}

TEST(ProcessOracleTest, HangTimesOut) {
  ProcessOracleOptions opt;
  opt.timeout_ms = 300;
  ProcessOracle remote(kFixture + " --hang-after 1", opt);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(KindOfCall([&] { remote.Embed("a b"); }), ErrorKind::kTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  EXPECT_EQ(KindOfCall([&] { remote.Embed("a"); }), ErrorKind::kTimeout);
}

TEST(ProcessOracleTest, MissingMaskRow) {
  ProcessOracle remote(kFixture + " --no-mask");
  const EmbeddedText e = remote.Embed("a b");
  AttributionSettings s;
  s.baseline = BaselineKind::kMask;
  EXPECT_EQ(KindOfCall([&] { Attribute(remote, e.tokens, e.x, s, std::nullopt); }),
            ErrorKind::kMaskUnavailable);
  s.method = Method::kDeepLift;
  s.baseline = BaselineKind::kZero;
  EXPECT_EQ(KindOfCall([&] { Attribute(remote, e.tokens, e.x, s, std::nullopt); }),
            ErrorKind::kUnsupportedOracle);
}

}  // namespace
}  // namespace lexattr
