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

#include "mdlfuzz/subprocess.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mdlfuzz/error.h"

namespace mdlfuzz {
namespace {

void CloseFd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

struct Pipe {
  int read = -1;
  int write = -1;
};

Pipe MakePipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorCode::kSpawnFailure,
                std::string("pipe2: ") + std::strerror(errno));
  }
  return {fds[0], fds[1]};
}

int RemainingMillis(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  if (left.count() <= 0) return 0;
  return left.count() > 1000 ? 1000 : static_cast<int>(left.count());
}

}  // namespace

std::vector<std::string> SplitCommandLine(std::string_view command) {
  std::vector<std::string> words;
  std::string word;
  bool in_word = false;
  for (std::size_t i = 0; i < command.size(); ++i) {
    const char c = command[i];
    if (c == '\'') {
      const auto close = command.find('\'', i + 1);
      if (close == std::string_view::npos) {
        throw Error(ErrorCode::kInvalidConfig, "unclosed ' in command");
      }
      word.append(command.substr(i + 1, close - i - 1));
      in_word = true;
      i = close;
    } else if (c == '"') {
      std::size_t j = i + 1;
      for (; j < command.size() && command[j] != '"'; ++j) {
        if (command[j] == '\\' && j + 1 < command.size()) ++j;
        word += command[j];
      }
      if (j >= command.size()) {
        throw Error(ErrorCode::kInvalidConfig, "unclosed \" in command");
      }
      in_word = true;
      i = j;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) words.push_back(std::move(word));
      word.clear();
      in_word = false;
    } else {
      word += c;
      in_word = true;
    }
  }
  if (in_word) words.push_back(std::move(word));
  return words;
}

ChildProcess ChildProcess::Spawn(const Options& options) {
  if (options.argv.empty()) {
    throw Error(ErrorCode::kCommandNotFound, "empty command");
  }
  std::vector<char*> argv;
  for (const auto& arg : options.argv) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  Pipe in, out, err;
  if (options.pipe_stdin) in = MakePipe();
  if (options.pipe_stdout) out = MakePipe();
  if (options.pipe_stderr) err = MakePipe();
  Pipe exec_status = MakePipe();

  const pid_t pid = ::fork();
  if (pid < 0) {
    const int saved = errno;
    for (int* fd : {&in.read, &in.write, &out.read, &out.write, &err.read,
                    &err.write, &exec_status.read, &exec_status.write}) {
      CloseFd(*fd);
    }
    throw Error(ErrorCode::kSpawnFailure,
                std::string("fork: ") + std::strerror(saved));
  }
  if (pid == 0) {
    // Child: async-signal-safe calls only until exec.
    if (options.own_process_group) ::setpgid(0, 0);
    const int devnull = ::open("/dev/null", O_RDWR);
    ::dup2(options.pipe_stdin ? in.read : devnull, STDIN_FILENO);
    ::dup2(options.pipe_stdout ? out.write : devnull, STDOUT_FILENO);
    if (options.pipe_stderr) ::dup2(err.write, STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    const int saved = errno;
    [[maybe_unused]] auto n = ::write(exec_status.write, &saved, sizeof(saved));
    ::_exit(127);
  }

  ChildProcess child;
  child.pid_ = pid;
  child.own_group_ = options.own_process_group;
  if (options.own_process_group) ::setpgid(pid, pid);
  CloseFd(in.read);
  CloseFd(out.write);
  CloseFd(err.write);
  CloseFd(exec_status.write);
  child.stdin_fd_ = in.write;
  child.stdout_fd_ = out.read;
  child.stderr_fd_ = err.read;

  int exec_errno = 0;
  ssize_t n;
  do {
    n = ::read(exec_status.read, &exec_errno, sizeof(exec_errno));
  } while (n < 0 && errno == EINTR);
  CloseFd(exec_status.read);
  if (n == static_cast<ssize_t>(sizeof(exec_errno))) {
    child.WaitUntil(Clock::now() + std::chrono::seconds(5));
    const std::string what = options.argv[0] + ": " + std::strerror(exec_errno);
    if (exec_errno == ENOENT || exec_errno == EACCES || exec_errno == ENOTDIR) {
      throw Error(ErrorCode::kCommandNotFound, what);
    }
    throw Error(ErrorCode::kSpawnFailure, what);
  }
  return child;
}

ChildProcess::ChildProcess(ChildProcess&& other) noexcept { *this = std::move(other); }

ChildProcess& ChildProcess::operator=(ChildProcess&& other) noexcept {
  if (this != &other) {
    Release();
    pid_ = std::exchange(other.pid_, -1);
    own_group_ = other.own_group_;
    stdin_fd_ = std::exchange(other.stdin_fd_, -1);
    stdout_fd_ = std::exchange(other.stdout_fd_, -1);
    stderr_fd_ = std::exchange(other.stderr_fd_, -1);
    status_ = std::exchange(other.status_, std::nullopt);
    stdout_buffer_ = std::move(other.stdout_buffer_);
  }
  return *this;
}

ChildProcess::~ChildProcess() { Release(); }

void ChildProcess::Release() {
  CloseFd(stdin_fd_);
  CloseFd(stdout_fd_);
  CloseFd(stderr_fd_);
  if (pid_ > 0 && !status_) {
    Kill(SIGKILL);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }
  pid_ = -1;
}

bool ChildProcess::WriteAll(std::string_view data) {
  while (!data.empty()) {
    if (stdin_fd_ < 0) return false;
    const ssize_t n = ::write(stdin_fd_, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

void ChildProcess::CloseStdin() { CloseFd(stdin_fd_); }

std::optional<std::string> ChildProcess::ReadLine(Clock::time_point deadline) {
  char chunk[4096];
  for (;;) {
    if (const auto nl = stdout_buffer_.find('\n'); nl != std::string::npos) {
      std::string line = stdout_buffer_.substr(0, nl);
      stdout_buffer_.erase(0, nl + 1);
      return line;
    }
    if (stdout_fd_ < 0) return std::nullopt;
    const int wait_ms = RemainingMillis(deadline);
    if (wait_ms == 0 && Clock::now() >= deadline) return std::nullopt;
    pollfd pfd{stdout_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, wait_ms);
    if (ready < 0 && errno != EINTR) return std::nullopt;
    if (ready <= 0) continue;
    const ssize_t n = ::read(stdout_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      return std::nullopt;
    }
    if (n == 0) {
      CloseFd(stdout_fd_);
      continue;
    }
    stdout_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::optional<int> ChildProcess::TryWait() {
  if (status_ || pid_ <= 0) return status_;
  int status = 0;
  const pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) status_ = status;
  return status_;
}

std::optional<int> ChildProcess::WaitUntil(Clock::time_point deadline) {
  for (;;) {
    if (auto s = TryWait()) return s;
    if (Clock::now() >= deadline) return std::nullopt;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
}

void ChildProcess::Kill(int signal) {
  if (pid_ <= 0 || status_) return;
  ::kill(own_group_ ? -pid_ : pid_, signal);
}

}  // namespace mdlfuzz
