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

// Budgeted fuzzing loop: generate, restore, check statically, optionally run
// an external validator, persist, and bucket failures.

#ifndef MDLFUZZ_CAMPAIGN_H_
#define MDLFUZZ_CAMPAIGN_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdlfuzz/harness.h"
#include "mdlfuzz/sampler.h"
#include "mdlfuzz/syntax.h"

namespace mdlfuzz {

// One line of outcomes.jsonl:
//   {"model": path, "kind": ..., "exit": ..., "diag": ..., "sig": ..., "ms": ...}
// kind is one of parse-failure, static-invalid, static-valid (no validator
// configured), valid, rejected, crash, timeout. exit is the exit code, the
// negated signal number for crashes, or null.
struct OutcomeRecord {
  std::string model;
  std::string kind;
  std::optional<int> exit;
  std::string diag;
  std::string sig;
  long long ms = 0;

  bool operator==(const OutcomeRecord&) const = default;
};

inline constexpr std::string_view kKindParseFailure = "parse-failure";
inline constexpr std::string_view kKindStaticInvalid = "static-invalid";
inline constexpr std::string_view kKindStaticValid = "static-valid";

std::string OutcomeRecordToJson(const OutcomeRecord& record);
// Throws Error(kInvalidConfig) on a malformed line.
OutcomeRecord OutcomeRecordFromJson(std::string_view line);
std::vector<OutcomeRecord> ReadOutcomeRecords(const std::filesystem::path& path);

// Rebuilds buckets from persisted records (crash and timeout kinds only), in
// record order. Identical input gives identical buckets.
std::vector<CrashBucket> TriageRecords(const std::vector<OutcomeRecord>& records);

// Restore plus static check of one generated text.
struct SampleEvaluation {
  bool parsed = false;
  std::string parse_error;
  SyntaxTree restored;
  std::vector<Finding> findings;
  bool static_valid = false;
};

SampleEvaluation EvaluateSample(std::string_view text);

struct CampaignConfig {
  SamplerConfig sampler;           // sample i uses rng_seed + i
  std::size_t budget_count = 100;  // 0: unbounded (needs budget_seconds)
  double budget_seconds = 0.0;     // 0: unbounded (needs budget_count)
  std::optional<std::string> validator_cmd;
  double timeout_seconds = 60.0;
  std::size_t jobs = 0;            // 0: logical CPU count
  std::filesystem::path out_dir;
};

struct CampaignReport {
  std::size_t generated = 0;
  std::size_t parse_ok = 0;
  std::size_t parse_failures = 0;
  std::size_t static_valid = 0;
  std::size_t static_failures = 0;
  bool validator_enabled = false;
  std::size_t validator_valid = 0;
  std::size_t rejected = 0;
  std::size_t crashes = 0;
  std::size_t timeouts = 0;
  std::vector<CrashBucket> buckets;
  std::string aborted;  // non-empty when the loop stopped on an error

  std::size_t ValidatorOutcomes() const {
    return validator_valid + rejected + crashes + timeouts;
  }
  // generated = parse failures + static failures + validator outcomes (or
  // static-valid samples when no validator ran).
  bool Conserved() const;
};

// Writes <out>/samples/sample_NNNNNN.txt (raw text), <out>/models/
// sample_NNNNNN.mdl (restored, when parsable), outcomes.jsonl, report.csv,
// buckets.csv and summary.txt. Throws Error(kInvalidConfig) for a bad config.
// A backend, spawn or I/O error stops the loop; the partial report is written
// and the error rethrown.
CampaignReport RunCampaign(LanguageBackend& backend, const CampaignConfig& config);

// Tallies records into a report (used by RunCampaign and for re-reporting).
CampaignReport TallyRecords(const std::vector<OutcomeRecord>& records,
                            bool validator_enabled);

void WriteCampaignReport(const CampaignReport& report,
                         const std::filesystem::path& out_dir);
std::string CampaignSummary(const CampaignReport& report);

}  // namespace mdlfuzz

#endif  // MDLFUZZ_CAMPAIGN_H_
