// Copyright 2026 The mdlfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal POSIX child-process wrapper: fork/exec with optional pipes, exec
// failures reported back to the parent, deadline-aware reads and waits.

#ifndef MDLFUZZ_SUBPROCESS_H_
#define MDLFUZZ_SUBPROCESS_H_

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mdlfuzz {

using Clock = std::chrono::steady_clock;

// Splits a command line into argv with shell-like quoting: whitespace
// separates words, '...' is literal, "..." honours backslash escapes. No
// expansion of any kind happens. Throws Error(kInvalidConfig) on an unclosed
// quote.
std::vector<std::string> SplitCommandLine(std::string_view command);

class ChildProcess {
 public:
  struct Options {
    std::vector<std::string> argv;
    bool pipe_stdin = false;
    bool pipe_stdout = false;
    bool pipe_stderr = false;
    // Put the child in its own process group so Kill() reaches grandchildren.
    bool own_process_group = false;
  };

  // Throws Error(kCommandNotFound) when the program cannot be found or is not
  // executable, Error(kSpawnFailure) for any other fork/exec failure.
  static ChildProcess Spawn(const Options& options);

  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  // Kills (SIGKILL) and reaps a child that is still running.
  ~ChildProcess();

  pid_t pid() const { return pid_; }
  int stderr_fd() const { return stderr_fd_; }

  // False if the pipe is closed (the child went away).
  bool WriteAll(std::string_view data);
  void CloseStdin();

  // Next '\n'-terminated line from stdout, without the newline. nullopt on
  // EOF or when the deadline passes first.
  std::optional<std::string> ReadLine(Clock::time_point deadline);

  // Non-blocking reap; returns the raw wait status once the child has exited.
  std::optional<int> TryWait();
  // Blocks until exit or deadline.
  std::optional<int> WaitUntil(Clock::time_point deadline);
  void Kill(int signal);

 private:
  ChildProcess() = default;
  void Release();

  pid_t pid_ = -1;
  bool own_group_ = false;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  int stderr_fd_ = -1;
  std::optional<int> status_;
  std::string stdout_buffer_;
};

}  // namespace mdlfuzz

#endif  // MDLFUZZ_SUBPROCESS_H_
