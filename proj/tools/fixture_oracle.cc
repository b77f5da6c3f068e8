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


// Serves the builtin model over the stdio protocol, with switches that make
// it misbehave on purpose. Used by the adapter tests.
//
//   lexattr_fixture_oracle [--params FILE] [--no-mask] [--bad-version]
//                          [--garbage-after N] [--hang-after N]
//                          [--exit-after N]
//
// N counts answered requests, the handshake included.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lexattr/model.h"
#include "lexattr/oracle.h"
#include "lexattr/protocol.h"
#include "lexattr/synthetic.h"

namespace {

class NoReferenceRows : public lexattr::GradientOracle {
 public:
  explicit NoReferenceRows(lexattr::GradientOracle& inner)
      : inner_(inner), descriptor_(inner.descriptor()) {
    descriptor_.mask_embedding.reset();
    descriptor_.pad_embedding.reset();
    descriptor_.mean_embedding.reset();
  }
  const lexattr::OracleDescriptor& descriptor() override { return descriptor_; }
  lexattr::EmbeddedText Embed(std::string_view text) override {
    return inner_.Embed(text);
  }
  std::vector<lexattr::ModelOutput> EvaluateBatch(
      std::span<const lexattr::EmbeddingMatrix> xs, const lexattr::Target& target,
      bool want_gradient) override {
    return inner_.EvaluateBatch(xs, target, want_gradient);
  }

 private:
  lexattr::GradientOracle& inner_;
  lexattr::OracleDescriptor descriptor_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixture gradient oracle"};
  std::string params_path;
  bool no_mask = false, bad_version = false;
  std::optional<long> garbage_after, hang_after, exit_after;
  app.add_option("--params", params_path);
  app.add_flag("--no-mask", no_mask);
  app.add_flag("--bad-version", bad_version);
  app.add_option("--garbage-after", garbage_after);
  app.add_option("--hang-after", hang_after);
  app.add_option("--exit-after", exit_after);
  CLI11_PARSE(app, argc, argv);

  lexattr::ModelParams params;
  if (params_path.empty()) {
    params = lexattr::InitParams(
        lexattr::ArchConfig{},
        lexattr::Vocabulary::FromTexts(lexattr::FillerWords(), {}), 1);
  } else {
    params = lexattr::LoadParamsFile(params_path);
  }
  lexattr::BuiltinOracle builtin(std::move(params));
  NoReferenceRows stripped(builtin);
  lexattr::GradientOracle& oracle =
      no_mask ? static_cast<lexattr::GradientOracle&>(stripped) : builtin;

  std::ios::sync_with_stdio(false);
  std::string line;
  long answered = 0;
  while (std::getline(std::cin, line)) {
    if (exit_after && answered >= *exit_after) return 3;
    if (hang_after && answered >= *hang_after) {
      for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
    }
    std::string reply;
    if (garbage_after && answered >= *garbage_after) {
      reply = "this is not json {";
    } else {
      reply = lexattr::HandleRequestLine(oracle, line);
      if (bad_version && answered == 0) {
        auto j = nlohmann::json::parse(reply);
        j["version"] = lexattr::kProtocolVersion + 1;
        reply = j.dump();
      }
    }
    std::cout << reply << '\n' << std::flush;
    ++answered;
  }
  return 0;
}
