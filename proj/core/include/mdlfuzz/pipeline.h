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

// Corpus ingestion, the canonical training form, and the staged batch
// pipeline behind the command-line tool.

#ifndef MDLFUZZ_PIPELINE_H_
#define MDLFUZZ_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdlfuzz/sampler.h"
#include "mdlfuzz/simplify.h"
#include "mdlfuzz/syntax.h"

namespace mdlfuzz {

// Lowercase hex SHA-256.
std::string Sha256Hex(std::string_view data);

// Simplified tree -> BFS-ordered, renamed canonical text (printer normal
// form). Unresolvable blocks/lines are dropped, as in lenient graph building.
std::string CanonicalizeForTraining(const SyntaxTree& simplified);

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

enum class ParseStatus { kOk, kRecovered, kFailed };
enum class FlatnessStatus { kFlat, kNonFlat, kUnknown };
enum class SimplifyStatus { kOk, kEmpty, kSkipped };

std::string_view StatusName(ParseStatus s);       // ok, recovered, failed
std::string_view StatusName(FlatnessStatus s);    // flat, nonflat, unknown
std::string_view StatusName(SimplifyStatus s);    // ok, empty, skipped

struct ManifestEntry {
  std::string path;  // relative to the corpus directory, '/' separated
  std::string sha256;
  ParseStatus parse = ParseStatus::kFailed;
  FlatnessStatus flatness = FlatnessStatus::kUnknown;
  SimplifyStatus simplify = SimplifyStatus::kSkipped;
  std::size_t tokens_raw = 0;
  std::size_t tokens_simplified = 0;  // before renaming
  std::size_t tokens_canonical = 0;   // after BFS ordering and renaming
  std::string note;

  bool Accepted() const {
    return parse != ParseStatus::kFailed && flatness == FlatnessStatus::kFlat &&
           simplify == SimplifyStatus::kOk;
  }
  bool operator==(const ManifestEntry&) const = default;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;  // sorted by path

  std::size_t AcceptedCount() const;
  std::string ToCsv() const;
  // Throws Error(kInvalidConfig) on malformed input.
  static CorpusManifest FromCsv(std::string_view csv);
  // Human-readable totals, including token reduction over accepted entries.
  std::string Summary() const;
};

// Recursively collects *.mdl files (sorted), parses each leniently, checks
// flatness and simplifies. A bad file only marks its own entry. Throws
// Error(kDirectoryNotFound).
CorpusManifest Ingest(const std::filesystem::path& dir,
                      const SimplifyPolicy& policy, std::size_t jobs = 0);

// The *.mdl files under `dir`, sorted by relative path.
std::vector<std::filesystem::path> ListModelFiles(const std::filesystem::path& dir);

// metrics CSV (header plus one row per model).
std::string MetricsCsv(const std::vector<std::pair<std::string, SyntaxTree>>& models);

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

// Plain `key = value` lines; '#' at line start begins a comment. Keys:
//   corpus_dir, output_dir, policy, ngram_order, samples, seed_text,
//   temperature, nucleus, max_tokens, rng_seed, eot_token, bridge_cmd,
//   validator_cmd, timeout, jobs
// Relative paths resolve against `base_dir`.
struct PipelineConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir = "mdlfuzz-out";
  std::optional<std::filesystem::path> policy_path;
  int ngram_order = 5;
  std::size_t samples = 100;
  SamplerConfig sampler;
  std::optional<std::string> bridge_cmd;
  std::optional<std::string> validator_cmd;
  double timeout_seconds = 60.0;
  std::size_t jobs = 0;

  // Throws Error(kInvalidConfig) for unknown keys or bad values.
  static PipelineConfig FromText(std::string_view text,
                                 const std::filesystem::path& base_dir = ".");
  static PipelineConfig FromFile(const std::filesystem::path& path);

  // Checks values and that referenced paths exist: Error(kInvalidConfig),
  // Error(kDirectoryNotFound).
  void Validate() const;

  SimplifyPolicy LoadPolicy() const;
};

inline constexpr const char* kPipelineStages[] = {
    "ingest", "simplify", "canon", "train", "sample", "restore", "check", "report"};

struct StageRun {
  std::string stage;
  bool skipped = false;
  double seconds = 0.0;
};

struct PipelineOptions {
  std::vector<std::string> stages;  // empty: all, in pipeline order
  bool force = false;               // rerun even when up to date
  std::ostream* log = nullptr;
};

// Runs the requested stages in pipeline order. Each writes into
// <output_dir>/<stage>/ and leaves a .stamp holding a fingerprint of its
// inputs and settings; a stage whose stamp matches is skipped. Throws
// Error(kStageFailure) naming the stage and the offending artifact.
std::vector<StageRun> RunPipeline(const PipelineConfig& config,
                                  const PipelineOptions& options = {});

}  // namespace mdlfuzz

#endif  // MDLFUZZ_PIPELINE_H_
