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

#include "mdlfuzz/campaign.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "mdlfuzz/canonical.h"
#include "mdlfuzz/error.h"
#include "mdlfuzz/graph.h"
#include "mdlfuzz/parallel.h"
#include "mdlfuzz/subprocess.h"

namespace mdlfuzz {
namespace {

namespace fs = std::filesystem;

std::string SampleStem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%06zu", index);
  return buf;
}

void WriteFile(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string IsoTime(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string OutcomeRecordToJson(const OutcomeRecord& record) {
  nlohmann::json j = {{"model", record.model}, {"kind", record.kind},
                      {"exit", nullptr},       {"diag", record.diag},
                      {"sig", record.sig},     {"ms", record.ms}};
  if (record.exit) j["exit"] = *record.exit;
  if (record.sig.empty()) j["sig"] = nullptr;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

OutcomeRecord OutcomeRecordFromJson(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    OutcomeRecord r;
    r.model = j.at("model").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    if (j.contains("exit") && !j["exit"].is_null()) r.exit = j["exit"].get<int>();
    if (j.contains("diag") && !j["diag"].is_null()) r.diag = j["diag"].get<std::string>();
    if (j.contains("sig") && !j["sig"].is_null()) r.sig = j["sig"].get<std::string>();
    if (j.contains("ms") && !j["ms"].is_null()) r.ms = j["ms"].get<long long>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("malformed outcome record: ") + e.what());
  }
}

std::vector<OutcomeRecord> ReadOutcomeRecords(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<OutcomeRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(OutcomeRecordFromJson(line));
  }
  return records;
}

std::vector<CrashBucket> TriageRecords(const std::vector<OutcomeRecord>& records) {
  CrashTriage triage;
  for (const auto& r : records) {
    const auto kind = ParseOutcomeKind(r.kind);
    if (!kind || (*kind != OutcomeKind::kCrash && *kind != OutcomeKind::kTimeout)) {
      continue;
    }
    triage.AddSigned(r.model, *kind, r.sig, r.diag);
  }
  return triage.Buckets();
}

SampleEvaluation EvaluateSample(std::string_view text) {
  SampleEvaluation eval;
  try {
    eval.restored = Restore(text);
  } catch (const Error& e) {
    eval.parse_error = e.what();
    return eval;
  }
  eval.parsed = true;
  eval.findings = StaticCheck(eval.restored);
  eval.static_valid = IsStaticValid(eval.findings);
  return eval;
}

bool CampaignReport::Conserved() const {
  const std::size_t tail = validator_enabled ? ValidatorOutcomes() : static_valid;
  return generated == parse_failures + static_failures + tail &&
         parse_ok + parse_failures == generated &&
         static_valid + static_failures == parse_ok;
}

CampaignReport TallyRecords(const std::vector<OutcomeRecord>& records,
                            bool validator_enabled) {
  CampaignReport report;
  report.validator_enabled = validator_enabled;
  for (const auto& r : records) {
    ++report.generated;
    if (r.kind == kKindParseFailure) {
      ++report.parse_failures;
      continue;
    }
    ++report.parse_ok;
    if (r.kind == kKindStaticInvalid) {
      ++report.static_failures;
      continue;
    }
    ++report.static_valid;
    if (r.kind == "valid") ++report.validator_valid;
    if (r.kind == "rejected") ++report.rejected;
    if (r.kind == "crash") ++report.crashes;
    if (r.kind == "timeout") ++report.timeouts;
  }
  report.buckets = TriageRecords(records);
  return report;
}

std::string CampaignSummary(const CampaignReport& r) {
  std::ostringstream out;
  out << "generated        " << r.generated << "\n"
      << "parse-ok         " << r.parse_ok << "\n"
      << "parse-failures   " << r.parse_failures << "\n"
      << "static-valid     " << r.static_valid << "\n"
      << "static-failures  " << r.static_failures << "\n";
  if (r.validator_enabled) {
    out << "validator-valid  " << r.validator_valid << "\n"
        << "rejected         " << r.rejected << "\n"
        << "crashes          " << r.crashes << "\n"
        << "timeouts         " << r.timeouts << "\n"
        << "buckets          " << r.buckets.size() << "\n";
    for (const auto& b : r.buckets) {
      out << "  " << b.signature << "  " << OutcomeKindName(b.kind) << "  x"
          << b.members.size() << "  " << b.example_diag << "\n";
    }
  }
  out << "conserved        " << (r.Conserved() ? "yes" : "NO") << "\n";
  if (!r.aborted.empty()) out << "aborted          " << r.aborted << "\n";
  return out.str();
}

void WriteCampaignReport(const CampaignReport& r, const fs::path& out_dir) {
  std::ostringstream csv;
  csv << "metric,value\n"
      << "generated," << r.generated << "\n"
      << "parse_ok," << r.parse_ok << "\n"
      << "parse_failures," << r.parse_failures << "\n"
      << "static_valid," << r.static_valid << "\n"
      << "static_failures," << r.static_failures << "\n"
      << "validator_enabled," << (r.validator_enabled ? 1 : 0) << "\n"
      << "validator_valid," << r.validator_valid << "\n"
      << "rejected," << r.rejected << "\n"
      << "crashes," << r.crashes << "\n"
      << "timeouts," << r.timeouts << "\n"
      << "buckets," << r.buckets.size() << "\n"
      << "conserved," << (r.Conserved() ? 1 : 0) << "\n";
  WriteFile(out_dir / "report.csv", csv.str());

  std::ostringstream buckets;
  buckets << "signature,kind,members,first_seen,first_member,diag\n";
  for (const auto& b : r.buckets) {
    buckets << b.signature << ',' << OutcomeKindName(b.kind) << ','
            << b.members.size() << ',' << IsoTime(b.first_seen) << ','
            << CsvField(b.members.front()) << ',' << CsvField(b.example_diag)
            << "\n";
  }
  WriteFile(out_dir / "buckets.csv", buckets.str());
  WriteFile(out_dir / "summary.txt", CampaignSummary(r));
}

CampaignReport RunCampaign(LanguageBackend& backend, const CampaignConfig& config) {
  config.sampler.Validate();
  if (config.budget_count == 0 && config.budget_seconds <= 0.0) {
    throw Error(ErrorCode::kInvalidConfig,
                "campaign needs a count or a time budget");
  }
  if (config.validator_cmd && config.timeout_seconds <= 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "validator timeout must be positive");
  }
  if (config.validator_cmd &&
      config.validator_cmd->find("{model}") == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig,
                "validator command lacks the {model} placeholder");
  }
  std::error_code ec;
  fs::create_directories(config.out_dir / "samples", ec);
  fs::create_directories(config.out_dir / "models", ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "cannot create " + config.out_dir.string() + ": " + ec.message());
  }
  std::ofstream outcomes(config.out_dir / "outcomes.jsonl", std::ios::trunc);
  if (!outcomes) {
    throw Error(ErrorCode::kIoError, "cannot write outcomes.jsonl");
  }

  std::mutex backend_mu;
  std::mutex record_mu;
  std::vector<OutcomeRecord> records;
  const bool shared_backend = backend.ConcurrentSafe();
  const auto start = Clock::now();

  auto one_sample = [&](std::size_t i) {
    const auto sample_start = Clock::now();
    SamplerConfig sampler = config.sampler;
    sampler.rng_seed = config.sampler.rng_seed + i;
    GenerationResult gen;
    if (shared_backend) {
      gen = Generate(backend, sampler);
    } else {
      std::lock_guard<std::mutex> lock(backend_mu);
      gen = Generate(backend, sampler);
    }
    const std::string stem = SampleStem(i);
    const fs::path sample_path = config.out_dir / "samples" / (stem + ".txt");
    WriteFile(sample_path, gen.text);

    OutcomeRecord record;
    const SampleEvaluation eval = EvaluateSample(gen.text);
    if (!eval.parsed) {
      record.model = sample_path.string();
      record.kind = kKindParseFailure;
      record.diag = eval.parse_error;
    } else {
      const fs::path model_path = config.out_dir / "models" / (stem + ".mdl");
      WriteFile(model_path, Print(eval.restored));
      record.model = model_path.string();
      if (!eval.static_valid) {
        record.kind = kKindStaticInvalid;
        for (const auto& f : eval.findings) {
          if (f.severity == Severity::kError) {
            record.diag = f.rule + ": " + f.message + " at " + f.location;
            break;
          }
        }
      } else if (!config.validator_cmd) {
        record.kind = kKindStaticValid;
      } else {
        const ValidationOutcome v =
            RunValidator(model_path, *config.validator_cmd, config.timeout_seconds);
        record.kind = std::string(OutcomeKindName(v.kind));
        if (v.exit_code) record.exit = *v.exit_code;
        if (v.term_signal) record.exit = -*v.term_signal;
        record.diag = v.diag;
        if (v.kind == OutcomeKind::kCrash || v.kind == OutcomeKind::kTimeout) {
          record.sig = CrashSignature(v);
        }
      }
    }
    record.ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    Clock::now() - sample_start)
                    .count();

    std::lock_guard<std::mutex> lock(record_mu);
    outcomes << OutcomeRecordToJson(record) << '\n';
    outcomes.flush();
    if (!outcomes) throw Error(ErrorCode::kIoError, "cannot append outcomes.jsonl");
    records.push_back(std::move(record));
  };

  const std::size_t n = config.budget_count == 0
                            ? std::numeric_limits<std::size_t>::max()
                            : config.budget_count;
  std::function<bool()> keep_going;
  if (config.budget_seconds > 0.0) {
    keep_going = [&] {
      return std::chrono::duration<double>(Clock::now() - start).count() <
             config.budget_seconds;
    };
  }

  std::exception_ptr failure;
  std::string failure_text;
  try {
    ParallelFor(n, config.jobs, one_sample, keep_going);
  } catch (const std::exception& e) {
    failure = std::current_exception();
    failure_text = e.what();
  }

  std::vector<OutcomeRecord> snapshot;
  {
    std::lock_guard<std::mutex> lock(record_mu);
    snapshot = records;
  }
  CampaignReport report = TallyRecords(snapshot, config.validator_cmd.has_value());
  report.aborted = failure_text;
  WriteCampaignReport(report, config.out_dir);
  if (failure) std::rethrow_exception(failure);
  return report;
}

}  // namespace mdlfuzz
