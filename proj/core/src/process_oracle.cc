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

#include "lexattr/process_oracle.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include <fmt/format.h>

#include "lexattr/errors.h"
#include "lexattr/protocol.h"

extern char** environ;

namespace lexattr {
namespace {

using Clock = std::chrono::steady_clock;

void IgnoreSigpipeOnce() {
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

bool SameLayout(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  return a.SameShape(b) && a.padding == b.padding;
}

}  // namespace

ProcessOracle::ProcessOracle(std::string command, ProcessOracleOptions options)
    : command_(std::move(command)), options_(options) {
  IgnoreSigpipeOnce();
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) {
    throw Error(ErrorKind::kIo, std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorKind::kIo, std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) {
    posix_spawn_file_actions_addclose(&actions, fd);
  }
  // Own process group, so the shell's children can be killed with it.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  const char* argv[] = {"sh", "-c", command_.c_str(), nullptr};
  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, &attr,
                             const_cast<char* const*>(argv), environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  if (rc != 0) {
    pid_ = -1;
    Shutdown();
    throw Error(ErrorKind::kIo, "cannot spawn '" + command_ +
                                    "': " + std::strerror(rc));
  }
  try {
    const std::int64_t id = next_id_++;
    descriptor_ = protocol::DecodeHandshakeResponse(
        RoundTrip(protocol::EncodeHandshakeRequest(id)), id);
  } catch (...) {
    Shutdown();
    throw;
  }
}

ProcessOracle::~ProcessOracle() { Shutdown(); }

void ProcessOracle::Shutdown() {
  if (to_child_ >= 0) {
    ::close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    ::close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0) {
    // Closing stdin asks a well-behaved child to exit; give it a moment.
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        ::kill(-pid_, SIGKILL);
        pid_ = -1;
        return;
      }
      ::usleep(2000);
    }
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

std::string ProcessOracle::RoundTrip(const std::string& request) {
  if (broken_) throw Error(ErrorKind::kTimeout, broken_reason_);
  auto fail = [&](ErrorKind kind, std::string reason) -> std::string {
    broken_ = true;
    broken_reason_ = "session unusable after earlier failure: " + reason;
    throw Error(kind, reason);
  };

  std::string line = request;
  line.push_back('\n');
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n =
        ::write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      return fail(ErrorKind::kTimeout,
                  "oracle process exited (write failed: " +
                      std::string(std::strerror(errno)) + ")");
    }
    written += static_cast<std::size_t>(n);
  }

  const auto deadline = Clock::now() + std::chrono::milliseconds(options_.timeout_ms);
  char buf[65536];
  while (true) {
    if (const auto nl = pending_.find('\n'); nl != std::string::npos) {
      std::string response = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return response;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - Clock::now())
                          .count();
    if (left <= 0) {
      return fail(ErrorKind::kTimeout,
                  fmt::format("no response within {} ms", options_.timeout_ms));
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return fail(ErrorKind::kIo, std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    const ssize_t n = ::read(from_child_, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      return fail(ErrorKind::kTimeout, std::string("oracle process exited (") +
                                           std::strerror(errno) + ")");
    }
    if (n == 0) {
      return fail(ErrorKind::kTimeout,
                  "oracle process exited before answering");
    }
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

EmbeddedText ProcessOracle::Embed(std::string_view text) {
  const std::int64_t id = next_id_++;
  EmbeddedText out = protocol::DecodeEmbedResponse(
      RoundTrip(protocol::EncodeEmbedRequest(id, text)), id, text);
  if (out.x.cols() != descriptor_.embedding_dim) {
    throw Error(ErrorKind::kProtocolError, "embedding width != handshake d");
  }
  return out;
}

std::vector<ModelOutput> ProcessOracle::EvaluateBatch(
    std::span<const EmbeddingMatrix> xs, const Target& target,
    bool want_gradient) {
  std::vector<ModelOutput> out;
  out.reserve(xs.size());
  const std::size_t limit = std::max<std::size_t>(options_.batch_size, 1);
  std::size_t begin = 0;
  while (begin < xs.size()) {
    if (xs[begin].cols() != descriptor_.embedding_dim) {
      throw Error(ErrorKind::kShapeError,
                  fmt::format("input has {} columns, oracle expects {}",
                              xs[begin].cols(), descriptor_.embedding_dim));
    }
    std::size_t end = begin + 1;
    while (end < xs.size() && end - begin < limit &&
           SameLayout(xs[begin], xs[end])) {
      ++end;
    }
    const auto group = xs.subspan(begin, end - begin);
    const std::int64_t id = next_id_++;
    auto outputs = protocol::DecodeEvalResponse(
        RoundTrip(protocol::EncodeEvalRequest(id, group, target, want_gradient)),
        id, group.size(), group.front(), want_gradient);
    for (auto& o : outputs) out.push_back(std::move(o));
    begin = end;
  }
  return out;
}

}  // namespace lexattr
