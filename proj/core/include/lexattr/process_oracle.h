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

#ifndef LEXATTR_PROCESS_ORACLE_H_
#define LEXATTR_PROCESS_ORACLE_H_

#include <sys/types.h>

#include <cstddef>
#include <cstdint>
#include <string>

#include "lexattr/oracle.h"

namespace lexattr {

struct ProcessOracleOptions {
  // Budget for each request/response round trip.
  int timeout_ms = 30000;
  // Interpolation points per eval line.
  std::size_t batch_size = 32;
};

// Drives an external model process over the line-delimited protocol on its
// standard input/output. The command runs under /bin/sh. One request is in
// flight at a time. A timeout or a dead child poisons the session: every
// later call fails fast with the same error kind.
class ProcessOracle : public GradientOracle {
 public:
  // Spawns the child and performs the handshake; throws on any failure.
  explicit ProcessOracle(std::string command, ProcessOracleOptions options = {});
  ~ProcessOracle() override;

  ProcessOracle(const ProcessOracle&) = delete;
  ProcessOracle& operator=(const ProcessOracle&) = delete;

  const OracleDescriptor& descriptor() override { return descriptor_; }
  EmbeddedText Embed(std::string_view text) override;
  std::vector<ModelOutput> EvaluateBatch(std::span<const EmbeddingMatrix> xs,
                                         const Target& target,
                                         bool want_gradient) override;

  pid_t pid() const { return pid_; }
  std::size_t requests_sent() const { return static_cast<std::size_t>(next_id_); }

 private:
  std::string RoundTrip(const std::string& request);
  void Shutdown();

  std::string command_;
  ProcessOracleOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;
  std::int64_t next_id_ = 0;
  bool broken_ = false;
  std::string broken_reason_;
  OracleDescriptor descriptor_;
};

}  // namespace lexattr

#endif  // LEXATTR_PROCESS_ORACLE_H_
