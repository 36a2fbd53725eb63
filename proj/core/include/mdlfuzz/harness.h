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

#ifndef MDLFUZZ_HARNESS_H_
#define MDLFUZZ_HARNESS_H_

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdlfuzz/syntax.h"

namespace mdlfuzz {

// ---------------------------------------------------------------------------
// Static checks
// ---------------------------------------------------------------------------

enum class Severity { kError, kWarning };

struct Finding {
  Severity severity = Severity::kError;
  std::string rule;
  std::string message;
  std::string location;  // e.g. "Model/System/Line[3]/Branch[1]"

  bool operator==(const Finding&) const = default;
};

// Rule catalog (ids are stable):
//   STRUCT       error    root is not Model; no System section; no Block at
//                         all; Block without Name/BlockType; Line without
//                         SrcBlock or without any destination
//   ORDER        error    a Block appears after the first Line
//   REF          error    a line endpoint names no block
//   PORT         error    SrcPort/DstPort is not an integer >= 1
//   UNIQ         error    two blocks share a Name
//   SCOPE-PORTS  warning  Scope with Floating off but a scalar 0 Ports value
//                         (a docked scope needs a port vector; this shape
//                         crashed some tool releases while compiling)
std::vector<Finding> StaticCheck(const SyntaxTree& tree);

// No error-severity findings.
bool IsStaticValid(const std::vector<Finding>& findings);

// ---------------------------------------------------------------------------
// External validator
// ---------------------------------------------------------------------------

enum class OutcomeKind { kValid, kRejected, kCrash, kTimeout };

std::string_view OutcomeKindName(OutcomeKind kind);
std::optional<OutcomeKind> ParseOutcomeKind(std::string_view name);

struct ValidationOutcome {
  OutcomeKind kind = OutcomeKind::kValid;
  std::optional<int> exit_code;    // normal exit
  std::optional<int> term_signal;  // abnormal termination
  std::string diag;                // first diagnostic stderr line
  double wall_seconds = 0.0;
};

// Substitutes the model path for every "{model}" in the template, runs the
// command directly (no shell), and classifies: exit 0 -> valid, other exit
// -> rejected, killed by a signal -> crash, deadline passed -> timeout (the
// whole process group is killed). Throws Error(kInvalidConfig) when the
// template lacks "{model}", Error(kCommandNotFound) or Error(kSpawnFailure).
ValidationOutcome RunValidator(const std::filesystem::path& model,
                               std::string_view command_template,
                               double timeout_seconds);

// The first stderr line that looks like a failure message (error, fatal,
// abort, assert, exception, fault, panic, crash, signal; case-insensitive),
// else the first non-empty line.
std::string SelectDiagnosticLine(std::string_view stderr_text);

// Masks paths, hex literals and numbers; collapses whitespace.
std::string NormalizeDiagnostic(std::string_view diag);

// Stable 16-hex-digit FNV-1a hash of the termination kind (with the signal
// for crashes) and the normalized diagnostic. Throws Error(kNotACrash) for
// valid or rejected outcomes.
std::string CrashSignature(const ValidationOutcome& outcome);

// ---------------------------------------------------------------------------
// Triage
// ---------------------------------------------------------------------------

struct CrashBucket {
  std::string signature;
  OutcomeKind kind = OutcomeKind::kCrash;
  std::string example_diag;
  std::vector<std::string> members;  // model paths in insertion order
  std::chrono::system_clock::time_point first_seen;
};

// Thread-safe accumulation of crash/timeout outcomes into buckets. Buckets
// are listed in order of their first member.
class CrashTriage {
 public:
  // Returns the signature; valid/rejected outcomes are ignored (nullopt).
  std::optional<std::string> Add(const std::string& model,
                                 const ValidationOutcome& outcome);
  // For re-triage of persisted records that already carry a signature.
  void AddSigned(const std::string& model, OutcomeKind kind,
                 const std::string& signature, const std::string& diag);

  std::vector<CrashBucket> Buckets() const;

 private:
  mutable std::mutex mu_;
  std::vector<CrashBucket> buckets_;
};

}  // namespace mdlfuzz

#endif  // MDLFUZZ_HARNESS_H_
