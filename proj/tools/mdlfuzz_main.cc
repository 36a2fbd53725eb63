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

// mdlfuzz command-line tool.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error
// (unparsable or invalid input), 3 stage or runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdlfuzz/bridge_client.h"
#include "mdlfuzz/campaign.h"
#include "mdlfuzz/canonical.h"
#include "mdlfuzz/error.h"
#include "mdlfuzz/graph.h"
#include "mdlfuzz/harness.h"
#include "mdlfuzz/ngram.h"
#include "mdlfuzz/parallel.h"
#include "mdlfuzz/pipeline.h"
#include "mdlfuzz/simplify.h"
#include "mdlfuzz/subprocess.h"
#include "mdlfuzz/syntax.h"

namespace fs = std::filesystem;
using namespace mdlfuzz;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitFailure = 3;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kDirectoryNotFound:
    case ErrorCode::kCommandNotFound:
    case ErrorCode::kNonPositiveTemperature:
    case ErrorCode::kInvalidNucleus:
      return kExitUsage;
    case ErrorCode::kEmptyInput:
    case ErrorCode::kUnbalancedBraces:
    case ErrorCode::kUnterminatedString:
    case ErrorCode::kUnterminatedVector:
    case ErrorCode::kUnrecognizedConstruct:
    case ErrorCode::kInvalidEncoding:
    case ErrorCode::kDanglingReference:
    case ErrorCode::kDuplicateBlockName:
    case ErrorCode::kMalformedElement:
    case ErrorCode::kPathSearchBudgetExceeded:
    case ErrorCode::kDuplicateOriginalName:
    case ErrorCode::kUnparsableSample:
    case ErrorCode::kEmptyDistribution:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kNotACrash:
      return kExitData;
    case ErrorCode::kBackendFailure:
    case ErrorCode::kSpawnFailure:
    case ErrorCode::kIoError:
    case ErrorCode::kStageFailure:
      return kExitFailure;
  }
  return kExitFailure;
}

std::string ReadInput(const std::string& path) {
  if (path == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    return buffer.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteOutput(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << data;
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
}

struct Globals {
  std::string config_path;
  std::size_t jobs = 0;
  std::optional<std::uint64_t> seed;
  PipelineConfig config;  // defaults, overlaid by --config
};

struct SamplingFlags {
  std::string model_path;
  std::string bridge_cmd;
  std::optional<std::string> seed_text;
  std::optional<double> temperature;
  std::optional<double> nucleus;
  std::optional<std::size_t> max_tokens;
};

void AddSamplingFlags(CLI::App* cmd, SamplingFlags& f) {
  cmd->add_option("--model", f.model_path, "n-gram model JSON (from train-ngram)");
  cmd->add_option("--bridge-cmd", f.bridge_cmd,
                  "language-model server command speaking the JSON line protocol");
  cmd->add_option("--seed-text", f.seed_text, "initial text");
  cmd->add_option("--temperature", f.temperature, "softmax temperature (> 0)");
  cmd->add_option("--nucleus", f.nucleus, "nucleus threshold in (0, 1]");
  cmd->add_option("--max-tokens", f.max_tokens, "token limit per sample");
}

SamplerConfig SamplerFrom(const Globals& g, const SamplingFlags& f) {
  SamplerConfig s = g.config.sampler;
  if (f.seed_text) s.seed_text = *f.seed_text;
  if (f.temperature) s.temperature = *f.temperature;
  if (f.nucleus) s.nucleus = *f.nucleus;
  if (f.max_tokens) s.max_tokens = *f.max_tokens;
  if (g.seed) s.rng_seed = *g.seed;
  s.Validate();
  return s;
}

// Owns whichever backend the flags select.
struct Backend {
  std::unique_ptr<NGramModel> model;
  std::unique_ptr<LanguageBackend> backend;
};

Backend MakeBackend(const Globals& g, const SamplingFlags& f) {
  Backend b;
  std::string bridge = f.bridge_cmd;
  if (bridge.empty() && f.model_path.empty() && g.config.bridge_cmd) {
    bridge = *g.config.bridge_cmd;
  }
  if (!bridge.empty()) {
    b.backend = std::make_unique<BridgeClient>(SplitCommandLine(bridge));
  } else if (!f.model_path.empty()) {
    b.model = std::make_unique<NGramModel>(NGramModel::Load(f.model_path));
    b.backend = std::make_unique<NGramBackend>(*b.model);
  } else {
    throw Error(ErrorCode::kInvalidConfig, "give --model or --bridge-cmd");
  }
  return b;
}

std::string FormatFindings(const std::vector<Finding>& findings) {
  std::string out;
  for (const auto& f : findings) {
    out += (f.severity == Severity::kError ? "error   " : "warning ") + f.rule + "  " +
           f.location + "  " + f.message + "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdlfuzz: language-model-driven generation and fuzzing of "
               "block-diagram models in the MDL text format"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "pipeline config file (key = value)");
  app.add_option("--jobs", g.jobs, "worker threads (0: logical CPUs)");
  app.add_option("--seed", g.seed, "base RNG seed");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "build a corpus manifest");
  std::string ingest_dir, ingest_out, policy_path;
  ingest->add_option("dir", ingest_dir, "corpus directory")->required();
  ingest->add_option("-o,--out", ingest_out, "manifest CSV (default stdout)");
  ingest->add_option("--policy", policy_path, "simplification policy file");

  // simplify
  auto* simplify = app.add_subcommand("simplify", "simplify one model");
  std::string simplify_in, simplify_out;
  std::vector<std::string> keep_params, drop_params;
  bool simplify_rename = false;
  simplify->add_option("input", simplify_in, "model file or - for stdin")->required();
  simplify->add_option("-o,--out", simplify_out, "output (default stdout)");
  simplify->add_option("--policy", policy_path, "simplification policy file");
  simplify->add_option("--keep-param", keep_params, "keep a parameter key");
  simplify->add_option("--drop-param", drop_params, "drop a parameter key");
  simplify->add_flag("--rename", simplify_rename, "rename blocks a, b, c, ...");

  // canon
  auto* canon = app.add_subcommand("canon", "emit the canonical training form");
  std::string canon_in, canon_out;
  bool canon_simplify = false;
  canon->add_option("input", canon_in, "model file or -")->required();
  canon->add_option("-o,--out", canon_out, "output (default stdout)");
  canon->add_flag("--simplify", canon_simplify, "simplify with the default policy first");

  // restore
  auto* restore = app.add_subcommand("restore", "restore a sampled text to a loadable model");
  std::string restore_in, restore_out;
  restore->add_option("input", restore_in, "sample file or -")->required();
  restore->add_option("-o,--out", restore_out, "output (default stdout)");

  // check
  auto* check = app.add_subcommand("check", "run static checks on one model");
  std::string check_in;
  check->add_option("input", check_in, "model file or -")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "graph metrics CSV");
  std::vector<std::string> metrics_in;
  std::string metrics_out;
  metrics->add_option("inputs", metrics_in, "model files or directories")->required();
  metrics->add_option("-o,--out", metrics_out, "output CSV (default stdout)");

  // train-ngram
  auto* train = app.add_subcommand("train-ngram", "train the n-gram backend");
  std::string train_dir, train_out;
  std::optional<int> train_order;
  train->add_option("dir", train_dir, "directory of canonical models")->required();
  train->add_option("-o,--out", train_out, "model JSON")->required();
  train->add_option("--order", train_order, "n-gram order (default 5)");

  // sample
  auto* sample = app.add_subcommand("sample", "generate samples");
  SamplingFlags sample_flags;
  std::size_t sample_count = 1;
  std::string sample_dir;
  AddSamplingFlags(sample, sample_flags);
  sample->add_option("-n,--count", sample_count, "number of samples");
  sample->add_option("-o,--out-dir", sample_dir, "write sample_NNNNNN.txt files here");

  // fuzz
  auto* fuzz = app.add_subcommand("fuzz", "run a fuzzing campaign");
  SamplingFlags fuzz_flags;
  CampaignConfig campaign;
  std::string fuzz_dir;
  std::optional<std::string> validator_cmd;
  std::optional<double> timeout;
  AddSamplingFlags(fuzz, fuzz_flags);
  fuzz->add_option("--budget-count", campaign.budget_count, "samples to generate (0: no limit)");
  fuzz->add_option("--budget-seconds", campaign.budget_seconds, "wall-clock budget (0: none)");
  fuzz->add_option("--validator-cmd", validator_cmd, "validator command containing {model}");
  fuzz->add_option("--timeout", timeout, "validator timeout in seconds");
  fuzz->add_option("-o,--out-dir", fuzz_dir, "campaign output directory")->required();
  fuzz->add_option("--jobs", g.jobs, "concurrent workers");

  // report
  auto* report = app.add_subcommand("report", "re-triage a campaign's outcome records");
  std::string report_in, report_dir;
  bool report_validator = false;
  report->add_option("outcomes", report_in, "outcomes.jsonl")->required();
  report->add_option("-o,--out-dir", report_dir, "write report files here");
  report->add_flag("--validator", report_validator,
                   "records came from a validator run (default: detect)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run the staged batch pipeline");
  std::vector<std::string> stages;
  bool force = false;
  pipeline->add_option("--stages", stages, "stages to run (default all)")->delimiter(',');
  pipeline->add_flag("--force", force, "rerun stages that are up to date");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!g.config_path.empty()) g.config = PipelineConfig::FromFile(g.config_path);
    if (app.get_option("--jobs")->count() > 0 || fuzz->get_option("--jobs")->count() > 0) {
      g.config.jobs = g.jobs;
    }
    if (g.seed) g.config.sampler.rng_seed = *g.seed;

    auto load_policy = [&] {
      if (!policy_path.empty()) return SimplifyPolicy::FromConfigFile(policy_path);
      return g.config.LoadPolicy();
    };

    if (*ingest) {
      const CorpusManifest manifest = Ingest(ingest_dir, load_policy(), g.config.jobs);
      if (manifest.entries.empty()) {
        std::cerr << "warning: no .mdl files under " << ingest_dir << "\n";
      }
      WriteOutput(ingest_out, manifest.ToCsv());
      std::cerr << manifest.Summary();
      return kExitOk;
    }

    if (*simplify) {
      SimplifyPolicy policy = load_policy();
      for (const auto& k : keep_params) policy.KeepParam(k);
      for (const auto& k : drop_params) policy.DropParam(k);
      const SyntaxTree tree = Parse(ReadInput(simplify_in), ParseMode::kLenient);
      const SimplifyResult result = Simplify(tree, policy);
      if (result.empty_after_simplify) {
        std::cerr << "warning: no blocks left after simplification\n";
      }
      const SyntaxTree out =
          simplify_rename ? RenameIdentifiers(result.tree, {}).tree : result.tree;
      WriteOutput(simplify_out, Print(out));
      return kExitOk;
    }

    if (*canon) {
      SyntaxTree tree = Parse(ReadInput(canon_in), ParseMode::kLenient);
      if (canon_simplify) tree = Simplify(tree, load_policy()).tree;
      WriteOutput(canon_out, CanonicalizeForTraining(tree));
      return kExitOk;
    }

    if (*restore) {
      std::vector<Diagnostic> diagnostics;
      const SyntaxTree tree = Restore(ReadInput(restore_in), &diagnostics);
      for (const auto& d : diagnostics) {
        std::cerr << "line " << d.line << ": " << d.message << "\n";
      }
      WriteOutput(restore_out, Print(tree));
      return kExitOk;
    }

    if (*check) {
      const auto findings = StaticCheck(Parse(ReadInput(check_in), ParseMode::kLenient));
      std::cout << FormatFindings(findings);
      return IsStaticValid(findings) ? kExitOk : kExitData;
    }

    if (*metrics) {
      std::vector<std::pair<std::string, SyntaxTree>> models;
      for (const auto& input : metrics_in) {
        std::vector<fs::path> files;
        if (fs::is_directory(input)) {
          files = ListModelFiles(input);
        } else {
          files.push_back(input);
        }
        for (const auto& f : files) {
          models.emplace_back(f.string(), Parse(ReadInput(f.string()), ParseMode::kLenient));
        }
      }
      WriteOutput(metrics_out, MetricsCsv(models));
      return kExitOk;
    }

    if (*train) {
      if (!fs::is_directory(train_dir)) {
        throw Error(ErrorCode::kDirectoryNotFound, train_dir);
      }
      std::vector<TokenSeq> corpus;
      for (const auto& f : ListModelFiles(train_dir)) {
        corpus.push_back(Tokenize(ReadInput(f.string())));
      }
      const int order = train_order.value_or(g.config.ngram_order);
      const NGramModel model = NGramModel::Train(corpus, order, g.config.sampler.eot_token);
      model.Save(train_out);
      std::cerr << "trained order-" << order << " model on " << corpus.size()
                << " documents, vocabulary " << model.vocabulary().size() << "\n";
      return kExitOk;
    }

    if (*sample) {
      const SamplerConfig base = SamplerFrom(g, sample_flags);
      Backend backend = MakeBackend(g, sample_flags);
      if (!sample_dir.empty()) fs::create_directories(sample_dir);
      const std::size_t jobs = backend.backend->ConcurrentSafe() ? g.config.jobs : 1;
      std::vector<std::string> texts(sample_count);
      ParallelFor(sample_count, jobs, [&](std::size_t i) {
        SamplerConfig cfg = base;
        cfg.rng_seed = base.rng_seed + i;
        texts[i] = Generate(*backend.backend, cfg).text;
      });
      for (std::size_t i = 0; i < sample_count; ++i) {
        if (sample_dir.empty()) {
          std::cout << texts[i] << "\n" << base.eot_token << "\n";
        } else {
          char name[32];
          std::snprintf(name, sizeof(name), "sample_%06zu.txt", i);
          WriteOutput((fs::path(sample_dir) / name).string(), texts[i]);
        }
      }
      return kExitOk;
    }

    if (*fuzz) {
      campaign.sampler = SamplerFrom(g, fuzz_flags);
      campaign.validator_cmd = validator_cmd ? validator_cmd : g.config.validator_cmd;
      campaign.timeout_seconds = timeout.value_or(g.config.timeout_seconds);
      campaign.jobs = g.config.jobs;
      campaign.out_dir = fuzz_dir;
      Backend backend = MakeBackend(g, fuzz_flags);
      const CampaignReport result = RunCampaign(*backend.backend, campaign);
      std::cout << CampaignSummary(result);
      return result.Conserved() ? kExitOk : kExitFailure;
    }

    if (*report) {
      const auto records = ReadOutcomeRecords(report_in);
      bool validator = report_validator;
      for (const auto& r : records) {
        if (ParseOutcomeKind(r.kind)) validator = true;
      }
      const CampaignReport result = TallyRecords(records, validator);
      if (!report_dir.empty()) {
        fs::create_directories(report_dir);
        WriteCampaignReport(result, report_dir);
      }
      std::cout << CampaignSummary(result);
      return kExitOk;
    }

    if (*pipeline) {
      if (g.config_path.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "pipeline needs --config");
      }
      PipelineOptions options;
      options.stages = stages;
      options.force = force;
      options.log = &std::cerr;
      for (const auto& run : RunPipeline(g.config, options)) {
        std::cerr << run.stage << (run.skipped ? " skipped" : " done") << " in "
                  << run.seconds << " s\n";
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "mdlfuzz: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "mdlfuzz: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
