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

#include "mdlfuzz/harness.h"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <regex>
#include <set>
#include <unordered_map>
#include <utility>

#include "mdlfuzz/error.h"
#include "mdlfuzz/subprocess.h"

namespace mdlfuzz {
namespace {

// ---------------------------------------------------------------------------
// Static checks
// ---------------------------------------------------------------------------

class Checker {
 public:
  std::vector<Finding> Run(const SyntaxTree& tree) {
    const Section& root = tree.root;
    if (root.name != "Model") {
      Add(Severity::kError, "STRUCT", "root section is '" + root.name + "'",
          root.name);
    }
    const Section* system = root.FindChild("System");
    if (system == nullptr) {
      Add(Severity::kError, "STRUCT", "no System section", root.name);
      return std::move(findings_);
    }
    const std::string base = root.name + "/System";
    CollectBlocks(*system, base);
    CheckLines(*system, base);
    return std::move(findings_);
  }

 private:
  void Add(Severity severity, std::string rule, std::string message,
           std::string location) {
    findings_.push_back({severity, std::move(rule), std::move(message),
                         std::move(location)});
  }

  void CollectBlocks(const Section& system, const std::string& base) {
    int block_index = 0;
    bool line_seen = false;
    std::set<std::string> reported_dupes;
    for (const auto& child : system.children) {
      if (child.name == "Line") line_seen = true;
      if (child.name != "Block") continue;
      const std::string where =
          base + "/Block[" + std::to_string(++block_index) + "]";
      if (line_seen) {
        Add(Severity::kError, "ORDER", "Block appears after a Line", where);
      }
      const Param* name = child.FindParam("Name");
      const Param* type = child.FindParam("BlockType");
      if (name == nullptr || type == nullptr) {
        Add(Severity::kError, "STRUCT",
            name == nullptr ? "Block without Name" : "Block without BlockType",
            where);
      }
      if (name != nullptr) {
        const std::string text = name->value.Text();
        if (!names_.insert(text).second && reported_dupes.insert(text).second) {
          Add(Severity::kError, "UNIQ", "block name '" + text + "' is not unique",
              where);
        }
      }
      if (type != nullptr && type->value.Text() == "Scope") CheckScope(child, where);
    }
    if (block_index == 0) {
      Add(Severity::kError, "STRUCT", "System has no Block", base);
    }
  }

  void CheckScope(const Section& block, const std::string& where) {
    const Param* floating = block.FindParam("Floating");
    const Param* ports = block.FindParam("Ports");
    if (floating == nullptr || ports == nullptr) return;
    if (floating->value.Text() != "off") return;
    std::string value = ports->value.Text();
    value.erase(std::remove_if(value.begin(), value.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                value.end());
    // A bare 0 (or a one-element vector [0]) instead of an input/output
    // port-count vector.
    if (value == "0" || value == "[0]") {
      Add(Severity::kWarning, "SCOPE-PORTS",
          "Scope with Floating off has scalar Ports 0", where);
    }
  }

  void CheckPort(const Section& section, std::string_view key,
                 const std::string& where) {
    const Param* p = section.FindParam(key);
    if (p == nullptr) {
      Add(Severity::kError, "PORT", std::string(key) + " missing", where);
      return;
    }
    const std::string text = p->value.Text();
    long long port = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), port);
    if (ec != std::errc() || ptr != text.data() + text.size() || port < 1) {
      Add(Severity::kError, "PORT",
          std::string(key) + " '" + text + "' is not an integer >= 1", where);
    }
  }

  void CheckRef(const Param& p, const std::string& where) {
    const std::string name = p.value.Text();
    if (!names_.contains(name)) {
      Add(Severity::kError, "REF",
          p.key + " '" + name + "' names no block", where);
    }
  }

  // Returns the number of destinations reachable in this section.
  int CheckDestinations(const Section& section, const std::string& where) {
    int destinations = 0;
    if (const Param* dst = section.FindParam("DstBlock")) {
      ++destinations;
      CheckRef(*dst, where);
      CheckPort(section, "DstPort", where);
    }
    int branch_index = 0;
    for (const auto& child : section.children) {
      if (child.name != "Branch") continue;
      destinations += CheckDestinations(
          child, where + "/Branch[" + std::to_string(++branch_index) + "]");
    }
    return destinations;
  }

  void CheckLines(const Section& system, const std::string& base) {
    int line_index = 0;
    for (const auto& child : system.children) {
      if (child.name != "Line") continue;
      const std::string where =
          base + "/Line[" + std::to_string(++line_index) + "]";
      const Param* src = child.FindParam("SrcBlock");
      if (src == nullptr) {
        Add(Severity::kError, "STRUCT", "Line without SrcBlock", where);
      } else {
        CheckRef(*src, where);
        CheckPort(child, "SrcPort", where);
      }
      if (CheckDestinations(child, where) == 0) {
        Add(Severity::kError, "STRUCT", "Line without destination", where);
      }
    }
  }

  std::vector<Finding> findings_;
  std::set<std::string> names_;
};

// ---------------------------------------------------------------------------
// Validator
// ---------------------------------------------------------------------------

constexpr std::size_t kMaxCapturedStderr = 64 * 1024;

void ReadAvailable(int fd, std::string& sink, bool& eof) {
  char chunk[4096];
  const ssize_t n = ::read(fd, chunk, sizeof(chunk));
  if (n > 0) {
    const std::size_t room = kMaxCapturedStderr - std::min(kMaxCapturedStderr, sink.size());
    sink.append(chunk, std::min(room, static_cast<std::size_t>(n)));
  } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
    eof = true;
  }
}

// Polls `fd` until `until`, appending whatever arrives. Returns early on EOF.
void PumpStderr(int fd, std::string& sink, bool& eof, Clock::time_point until) {
  while (!eof) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        until - Clock::now());
    if (left.count() <= 0) return;
    pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno != EINTR) {
      eof = true;
    } else if (ready > 0) {
      ReadAvailable(fd, sink, eof);
    }
  }
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::uint64_t Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<Finding> StaticCheck(const SyntaxTree& tree) {
  return Checker().Run(tree);
}

bool IsStaticValid(const std::vector<Finding>& findings) {
  return std::none_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::kError;
  });
}

std::string_view OutcomeKindName(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kValid:
      return "valid";
    case OutcomeKind::kRejected:
      return "rejected";
    case OutcomeKind::kCrash:
      return "crash";
    case OutcomeKind::kTimeout:
      return "timeout";
  }
  return "unknown";
}

std::optional<OutcomeKind> ParseOutcomeKind(std::string_view name) {
  for (auto kind : {OutcomeKind::kValid, OutcomeKind::kRejected,
                    OutcomeKind::kCrash, OutcomeKind::kTimeout}) {
    if (OutcomeKindName(kind) == name) return kind;
  }
  return std::nullopt;
}

ValidationOutcome RunValidator(const std::filesystem::path& model,
                               std::string_view command_template,
                               double timeout_seconds) {
  static constexpr std::string_view kPlaceholder = "{model}";
  auto argv = SplitCommandLine(command_template);
  bool substituted = false;
  for (auto& arg : argv) {
    for (auto pos = arg.find(kPlaceholder); pos != std::string::npos;
         pos = arg.find(kPlaceholder, pos)) {
      arg.replace(pos, kPlaceholder.size(), model.string());
      pos += model.string().size();
      substituted = true;
    }
  }
  if (!substituted) {
    throw Error(ErrorCode::kInvalidConfig,
                "validator command lacks the {model} placeholder");
  }

  ChildProcess::Options options;
  options.argv = std::move(argv);
  options.pipe_stderr = true;
  options.own_process_group = true;

  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::chrono::duration<double>(timeout_seconds));
  ChildProcess child = ChildProcess::Spawn(options);

  std::string err;
  bool eof = false;
  std::optional<int> status;
  while (!(status = child.TryWait())) {
    if (Clock::now() >= deadline) break;
    const auto slice = std::min(deadline, Clock::now() + std::chrono::milliseconds(10));
    if (eof) {
      child.WaitUntil(slice);
    } else {
      PumpStderr(child.stderr_fd(), err, eof, slice);
    }
  }

  ValidationOutcome outcome;
  if (!status) {
    child.Kill(SIGKILL);
    child.WaitUntil(Clock::now() + std::chrono::seconds(5));
    outcome.kind = OutcomeKind::kTimeout;
  } else {
    // Grandchildren may keep stderr open; drain briefly, never indefinitely.
    PumpStderr(child.stderr_fd(), err, eof,
               Clock::now() + std::chrono::milliseconds(200));
    if (WIFEXITED(*status)) {
      outcome.exit_code = WEXITSTATUS(*status);
      outcome.kind = *outcome.exit_code == 0 ? OutcomeKind::kValid
                                             : OutcomeKind::kRejected;
    } else {
      outcome.term_signal = WIFSIGNALED(*status) ? WTERMSIG(*status) : 0;
      outcome.kind = OutcomeKind::kCrash;
    }
  }
  outcome.wall_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  outcome.diag = SelectDiagnosticLine(err);
  return outcome;
}

std::string SelectDiagnosticLine(std::string_view stderr_text) {
  static const char* const kMarkers[] = {"error", "fatal",  "abort", "assert",
                                         "exception", "fault", "panic", "crash",
                                         "signal"};
  std::optional<std::string> first_nonempty;
  std::size_t pos = 0;
  while (pos <= stderr_text.size()) {
    auto nl = stderr_text.find('\n', pos);
    if (nl == std::string_view::npos) nl = stderr_text.size();
    const std::string line = Trim(stderr_text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (!first_nonempty) first_nonempty = line;
    const std::string lower = ToLower(line);
    for (const char* marker : kMarkers) {
      if (lower.find(marker) != std::string::npos) return line;
    }
  }
  return first_nonempty.value_or("");
}

std::string NormalizeDiagnostic(std::string_view diag) {
  // Order matters: paths swallow their own digits, hex before decimal.
  static const std::regex kPath(
      R"((?:[A-Za-z]:)?[\w.~-]*(?:[/\\][\w.~-]+)+[/\\]?)");
  static const std::regex kHex(R"(0[xX][0-9a-fA-F]+)");
  static const std::regex kNumber(R"(\d+)");
  static const std::regex kSpace(R"(\s+)");
  std::string s(diag);
  s = std::regex_replace(s, kPath, "<path>");
  s = std::regex_replace(s, kHex, "<hex>");
  s = std::regex_replace(s, kNumber, "<n>");
  s = std::regex_replace(s, kSpace, " ");
  return Trim(s);
}

std::string CrashSignature(const ValidationOutcome& outcome) {
  if (outcome.kind != OutcomeKind::kCrash && outcome.kind != OutcomeKind::kTimeout) {
    throw Error(ErrorCode::kNotACrash,
                "outcome is " + std::string(OutcomeKindName(outcome.kind)));
  }
  std::string key(OutcomeKindName(outcome.kind));
  key += '\x1f';
  if (outcome.kind == OutcomeKind::kCrash) {
    key += std::to_string(outcome.term_signal.value_or(0));
  }
  key += '\x1f';
  key += NormalizeDiagnostic(outcome.diag);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(key)));
  return hex;
}

std::optional<std::string> CrashTriage::Add(const std::string& model,
                                            const ValidationOutcome& outcome) {
  if (outcome.kind != OutcomeKind::kCrash && outcome.kind != OutcomeKind::kTimeout) {
    return std::nullopt;
  }
  std::string signature = CrashSignature(outcome);
  AddSigned(model, outcome.kind, signature, outcome.diag);
  return signature;
}

void CrashTriage::AddSigned(const std::string& model, OutcomeKind kind,
                            const std::string& signature,
                            const std::string& diag) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto& bucket : buckets_) {
    if (bucket.signature == signature) {
      bucket.members.push_back(model);
      return;
    }
  }
  buckets_.push_back({signature, kind, diag, {model},
                      std::chrono::system_clock::now()});
}

std::vector<CrashBucket> CrashTriage::Buckets() const {
  std::lock_guard<std::mutex> lock(mu_);
  return buckets_;
}

}  // namespace mdlfuzz
