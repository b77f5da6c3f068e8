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

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.h"
#include "test_util.h"

namespace lexattr {
namespace {

using testing::TempDir;

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int RunCli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "lexattr");
  std::ostringstream out, err;
  const int code = cli::Run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::ofstream(dir_.file("corpus.jsonl"))
        << "{\"id\": \"1\", \"text\": \"the sun was warm.\", \"label\": \"a\", "
           "\"highlights\": [{\"reader\": \"r\", \"spans\": [[8, 11]]}]}\n"
        << "{\"id\": \"2\", \"text\": \"a cold wind\", \"label\": \"b\"}\n";
  }
  std::string corpus() const { return dir_.file("corpus.jsonl"); }
  TempDir dir_;
};

TEST_F(CliTest, AttributeWritesDeterministicOutputs) {
  ASSERT_EQ(RunCli({"attribute", corpus(), "--out", dir_.file("o1")}), cli::kExitOk);
  ASSERT_EQ(RunCli({"attribute", corpus(), "--out", dir_.file("o2"), "--threads", "3"}),
            cli::kExitOk);
  const std::string a = Slurp(dir_.file("o1/attributions.jsonl"));
  EXPECT_EQ(a, Slurp(dir_.file("o2/attributions.jsonl")));
  std::istringstream lines(a);
  std::string line;
  std::getline(lines, line);
  const nlohmann::json j = nlohmann::json::parse(line);
  EXPECT_EQ(j["id"], "1");
  EXPECT_EQ(j["quadrature"], "trapezoid");
  EXPECT_EQ(j["steps"], 300);
  EXPECT_LT(std::abs(j["residual"].get<double>()), 1e-3);
  const nlohmann::json config = nlohmann::json::parse(Slurp(dir_.file("o1/config.json")));
  EXPECT_EQ(config["method"], "ig");
  EXPECT_NE(Slurp(dir_.file("o1/report.html")).find("<html"), std::string::npos);
}

TEST_F(CliTest, ConfigFileIsValidated) {
  std::ofstream(dir_.file("bad.json")) << "{\"stepz\": 10}";
  std::string err;
  EXPECT_EQ(RunCli({"attribute", corpus(), "--config", dir_.file("bad.json"), "--out",
                    dir_.file("o")},
                   &err),
            cli::kExitValidation);
  EXPECT_NE(err.find("stepz"), std::string::npos);
  std::ofstream(dir_.file("good.json"))
      << "{\"method\": \"sig\", \"baseline\": \"mask\", \"steps\": 20, "
         "\"quadrature\": \"riemann-left\"}";
  EXPECT_EQ(RunCli({"attribute", corpus(), "--config", dir_.file("good.json"), "--out",
                    dir_.file("o")}),
            cli::kExitOk);
  const nlohmann::json echo = nlohmann::json::parse(Slurp(dir_.file("o/config.json")));
  EXPECT_EQ(echo["method"], "sig");
  EXPECT_EQ(echo["steps"], 20);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(RunCli({"attribute", dir_.file("missing.jsonl")}), cli::kExitValidation);
  EXPECT_EQ(RunCli({"frobnicate"}), cli::kExitValidation);
  EXPECT_EQ(RunCli({"--help"}), cli::kExitOk);
  const std::string fixture = LEXATTR_FIXTURE_ORACLE;
  EXPECT_EQ(RunCli({"oracle-check", "--external", fixture + " --bad-version"}),
            cli::kExitOracle);
  EXPECT_EQ(RunCli({"oracle-check", "--external", fixture}), cli::kExitOk);
  EXPECT_EQ(RunCli({"attribute", corpus(), "--external", fixture + " --exit-after 3",
                    "--out", dir_.file("o")}),
            cli::kExitOracle);
}

TEST_F(CliTest, OtherSubcommands) {
  std::ofstream(dir_.file("small.json")) << "{\"steps\": 20, \"f_grid\": [0.5, 1.0]}";
  const std::string cfg = dir_.file("small.json");
  EXPECT_EQ(RunCli({"faithfulness", corpus(), "--config", cfg, "--out", dir_.file("f")}),
            cli::kExitOk);
  EXPECT_NE(Slurp(dir_.file("f/faithfulness_summary.csv")).size(), 0u);
  EXPECT_EQ(RunCli({"highlights", corpus(), "--config", cfg, "--out", dir_.file("h")}),
            cli::kExitOk);
  EXPECT_NE(Slurp(dir_.file("h/highlight_slopes.csv")).find("f_lo"), std::string::npos);
  EXPECT_EQ(RunCli({"render", corpus(), "--config", cfg, "--out", dir_.file("r")}),
            cli::kExitOk);
  EXPECT_EQ(RunCli({"extract", corpus(), "--config", cfg, "--out", dir_.file("e")}),
            cli::kExitOk);
  EXPECT_EQ(Slurp(dir_.file("e/keywords.csv")).rfind("class,rank,word", 0), 0u);
}

}  // namespace
}  // namespace lexattr
