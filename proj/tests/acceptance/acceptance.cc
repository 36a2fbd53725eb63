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

// Acceptance suite. Prints one PASS/FAIL line per criterion, with detail
// lines indented beneath it, and exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mdlfuzz/campaign.h"
#include "mdlfuzz/canonical.h"
#include "mdlfuzz/error.h"
#include "mdlfuzz/graph.h"
#include "mdlfuzz/harness.h"
#include "mdlfuzz/ngram.h"
#include "mdlfuzz/pipeline.h"
#include "mdlfuzz/sampler.h"
#include "mdlfuzz/simplify.h"
#include "mdlfuzz/syntax.h"
#include "testing/testing.h"

namespace mdlfuzz {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned thresholds.
constexpr int kRoundTripTrees = 1000;
constexpr double kRoundTripSeconds = 10.0;
constexpr int kBfsGraphs = 1000;
constexpr double kBfsSeconds = 10.0;
constexpr int kRestoreDocs = 1000;
constexpr int kMetricsMinCases = 5000;
constexpr double kMetricsSeconds = 60.0;
constexpr double kNucleusTolerance = 1e-12;
constexpr int kDraws = 100'000;
constexpr double kMaxL1 = 0.02;
constexpr double kMinStaticValidRate = 0.30;
constexpr double kEndToEndSeconds = 300.0;
constexpr double kMinTokenReduction = 0.50;
constexpr double kHangTimeout = 0.5;

const std::vector<unsigned> kEndToEndSeeds = {0, 1000, 2000, 3000, 4000};

// A criterion reports "" on success or the first failure, and may append
// informational lines to `notes`.
using Check = std::function<std::string(std::vector<std::string>& notes)>;

struct Criterion {
  const char* name;
  double max_seconds;  // 0: no runtime bound
  Check check;
};

std::string Fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, value);
  return buf;
}

std::vector<fs::path> AllModelFiles(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mdl") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

std::string ParserRoundTrip(std::vector<std::string>& notes) {
  std::mt19937_64 rng(20260101);
  for (int i = 0; i < kRoundTripTrees; ++i) {
    const SyntaxTree t = testing::RandomTree(rng);
    const std::string text = Print(t);
    if (Parse(text, ParseMode::kStrict) != t) {
      return "random tree " + std::to_string(i) + " differs after round trip";
    }
  }
  std::size_t files = 0;
  for (const fs::path& dir : {testing::FixtureDir(), testing::CorpusDir()}) {
    for (const auto& path : AllModelFiles(dir)) {
      const SyntaxTree t = Parse(testing::ReadFile(path), ParseMode::kLenient);
      if (Parse(Print(t), ParseMode::kStrict) != t) return path.string() + " differs";
      ++files;
    }
  }
  std::size_t normal = 0;
  for (const auto& path : AllModelFiles(testing::FixtureDir() / "printer_normal")) {
    const std::string bytes = testing::ReadFile(path);
    if (Print(Parse(bytes, ParseMode::kStrict)) != bytes) {
      return path.string() + " is not reproduced byte for byte";
    }
    ++normal;
  }
  if (normal == 0) return "no printer-normal fixtures found";
  notes.push_back(std::to_string(kRoundTripTrees) + " random trees, " +
                  std::to_string(files) + " model files, " + std::to_string(normal) +
                  " byte-exact");
  return "";
}

std::string BfsProperties(std::vector<std::string>& notes) {
  std::mt19937_64 rng(1789);
  std::size_t cases = 0;
  auto check = [&](const ModelGraph& g) {
    ++cases;
    return testing::CheckBfsProperties(g, BfsRestructure(g));
  };
  for (int i = 0; i < kBfsGraphs; ++i) {
    testing::GraphShape shape;
    shape.max_blocks = 50;
    shape.edge_density = 0.25 * (i % 12);
    const std::string v = check(testing::RandomGraph(rng, shape));
    if (!v.empty()) return "random graph " + std::to_string(i) + ": " + v;
  }
  for (std::size_t n = 1; n <= 50; ++n) {
    std::string v = check(testing::DanglingOnly(n));
    if (!v.empty()) return "dangling-only " + std::to_string(n) + ": " + v;
    v = check(testing::SourcelessCycle(n));
    if (!v.empty()) return "sourceless cycle " + std::to_string(n) + ": " + v;
  }
  // The two-cycle has no source; the walk must still start.
  const ModelGraph two = testing::MakeGraph({"a", "b"}, {{"a", "b"}, {"b", "a"}});
  std::vector<std::string> trace;
  for (const auto& el : BfsRestructure(two).elements) {
    if (const auto* b = std::get_if<BlockNode>(&el)) {
      trace.push_back(b->name);
    } else {
      const auto& e = std::get<PortEdge>(el);
      trace.push_back(e.src.block + ">" + e.dst.block);
    }
  }
  if (trace != std::vector<std::string>{"a", "a>b", "b>a", "b"}) {
    return "two-cycle emitted in the wrong order";
  }
  notes.push_back(std::to_string(cases + 1) + " graphs");
  return "";
}

std::string RestoreContract(std::vector<std::string>& notes) {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < kRestoreDocs; ++i) {
    testing::GraphShape shape;
    shape.edge_density = 0.25 * (i % 10);
    const CanonicalDoc doc = BfsRestructure(testing::RandomGraph(rng, shape));
    const std::string v = testing::CheckRestoreContract(doc);
    if (!v.empty()) return "doc " + std::to_string(i) + ": " + v;
  }
  notes.push_back(std::to_string(kRestoreDocs) + " canonical docs");
  return "";
}

std::string CompareMetrics(const ModelGraph& g) {
  const MetricsRecord m = ComputeMetrics(g);
  const auto comps = testing::UnionFindComponents(g);
  std::size_t largest = 0;
  for (const auto& c : comps) largest = std::max(largest, c.size());
  if (m.blk_count != g.blocks().size()) return "blk_count";
  if (m.n_subgraphs != comps.size()) return "n_subgraphs";
  if (m.max_subgraph_size != largest) return "max_subgraph_size";
  if (m.max_src_sink_path != testing::BruteForceLongestPath(g)) return "max_src_sink_path";
  if (testing::SortedComponents(ConnectedComponents(g)) != comps) return "components";
  return "";
}

std::string MetricsOracle(std::vector<std::string>& notes) {
  std::size_t cases = 0;
  // Every simple digraph on three blocks, self-loops included.
  const std::vector<std::string> names = {"a", "b", "c"};
  for (unsigned mask = 0; mask < (1u << 9); ++mask) {
    std::vector<std::pair<std::string, std::string>> edges;
    for (unsigned bit = 0; bit < 9; ++bit) {
      if (mask & (1u << bit)) edges.emplace_back(names[bit / 3], names[bit % 3]);
    }
    const std::string v = CompareMetrics(testing::MakeGraph(names, edges));
    if (!v.empty()) return "3-block graph " + std::to_string(mask) + ": " + v;
    ++cases;
  }
  std::mt19937_64 rng(99);
  testing::GraphShape shape;
  shape.max_blocks = 8;
  for (int i = 0; i < kMetricsMinCases; ++i) {
    shape.edge_density = 0.25 * (i % 13);
    const std::string v = CompareMetrics(testing::RandomGraph(rng, shape));
    if (!v.empty()) return "random graph " + std::to_string(i) + ": " + v;
    ++cases;
  }
  if (cases < kMetricsMinCases) return "too few cases";
  notes.push_back(std::to_string(cases) + " graphs with at most 8 blocks");
  return "";
}

TokenDistribution Pmf(std::vector<std::pair<std::string, double>> entries) {
  TokenDistribution pmf;
  for (auto& [t, p] : entries) pmf.entries.push_back({t, p});
  return pmf;
}

std::map<std::string, double> AsMap(const TokenDistribution& pmf) {
  std::map<std::string, double> out;
  for (const auto& e : pmf.entries) out[e.token] += e.prob;
  return out;
}

std::string SamplerMath(std::vector<std::string>& notes) {
  const TokenDistribution four = Pmf({{"a", 0.5}, {"b", 0.3}, {"c", 0.15}, {"d", 0.05}});
  const auto kept = AsMap(NucleusFilter(four, 0.7));
  if (kept.size() != 2 || std::fabs(kept.at("a") - 0.625) > kNucleusTolerance ||
      std::fabs(kept.at("b") - 0.375) > kNucleusTolerance) {
    return "N=0.7 does not give {0.625, 0.375}";
  }
  const auto half = AsMap(NucleusFilter(four, 0.5));
  if (half.size() != 2 || std::fabs(half.at("a") - 0.625) > kNucleusTolerance) {
    return "N=0.5 must keep two tokens";
  }

  const TokenDistribution filtered = NucleusFilter(four, 0.7);
  Rng rng(7);
  std::map<std::string, double> counts;
  for (int i = 0; i < kDraws; ++i) counts[SampleToken(filtered, rng)] += 1.0;
  double l1 = 0.0;
  for (const auto& [token, p] : kept) l1 += std::fabs(counts[token] / kDraws - p);
  for (const auto& [token, c] : counts) {
    if (!kept.contains(token)) l1 += c / kDraws;
  }
  if (l1 > kMaxL1) return "L1 distance " + Fmt("%.4f", l1);
  notes.push_back("L1 over " + std::to_string(kDraws) + " draws: " + Fmt("%.4f", l1));

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int i = 0; i < 500; ++i) {
    TokenDistribution pmf;
    for (int j = 0; j < 2 + i % 9; ++j) pmf.entries.push_back({"t" + std::to_string(j), unit(gen)});
    pmf.Normalize();
    for (double t : {0.05, 0.5, 0.9, 1.5, 4.0}) {
      const auto before = AsMap(pmf);
      const auto after = AsMap(ApplyTemperature(pmf, t));
      for (const auto& [x, px] : before) {
        for (const auto& [y, py] : before) {
          if (px > py && !(after.at(x) > after.at(y))) {
            return "temperature " + Fmt("%g", t) + " reorders " + x + " and " + y;
          }
        }
      }
    }
  }

  testing::FixedBackend backend(four);
  SamplerConfig config;
  config.max_tokens = 300;
  config.rng_seed = 31337;
  const std::string a = Generate(backend, config).text;
  const std::string b = Generate(backend, config).text;
  config.rng_seed += 1;
  const std::string c = Generate(backend, config).text;
  if (a != b) return "same seed gave different samples";
  if (a == c) return "different seeds gave the same sample";
  return "";
}

std::string NGramMemorization(std::vector<std::string>& notes) {
  const std::string document =
      "Model { System { Block { BlockType Sin Name \"a\" Amplitude \"2\" } "
      "Line { SrcBlock \"a\" SrcPort 1 DstBlock \"b\" DstPort 1 } "
      "Block { BlockType Scope Name \"b\" Ports [1] } } }";
  const TokenSeq doc = Tokenize(document);
  const NGramModel model = NGramModel::Train({doc}, 5);
  NGramBackend backend(model);
  SamplerConfig config;
  config.seed_text = "Model {";
  config.temperature = 1e-6;
  config.nucleus = 1.0;
  const GenerationResult r = Generate(backend, config);
  if (!r.completed) return "decoding did not reach the end-of-text token";
  if (r.text != JoinTokens(doc)) return "regenerated text differs: " + r.text;
  notes.push_back(std::to_string(doc.size()) + " tokens regenerated");
  return "";
}

std::string EndToEnd(std::vector<std::string>& notes) {
  double sum = 0.0;
  bool every_run_parses = true;
  for (unsigned seed : kEndToEndSeeds) {
    testing::TempDir dir;
    PipelineConfig config;
    config.corpus_dir = testing::CorpusDir();
    config.output_dir = dir.path();
    config.ngram_order = 5;
    config.samples = 100;
    config.sampler.nucleus = 0.9;
    config.sampler.temperature = 1.0;
    config.sampler.rng_seed = seed;
    const auto start = Clock::now();
    RunPipeline(config, {});
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const CampaignReport report =
        TallyRecords(ReadOutcomeRecords(dir / "check/outcomes.jsonl"), false);
    const double rate = static_cast<double>(report.static_valid) / report.generated;
    sum += rate;
    every_run_parses = every_run_parses && report.parse_ok >= 1;
    notes.push_back("seed " + std::to_string(seed) + ": " +
                    std::to_string(report.static_valid) + "/" +
                    std::to_string(report.generated) + " static-valid, " +
                    std::to_string(report.parse_ok) + " parse, " + Fmt("%.1f s", secs));
  }
  const double mean = sum / kEndToEndSeeds.size();
  notes.push_back("mean static-valid rate " + Fmt("%.3f", mean) + " (threshold " +
                  Fmt("%.2f", kMinStaticValidRate) + ")");
  if (!every_run_parses) return "a run produced no parsable sample";
  if (mean < kMinStaticValidRate) {
    return "mean static-valid rate " + Fmt("%.3f", mean) + " below " +
           Fmt("%.2f", kMinStaticValidRate);
  }
  return "";
}

std::string SimplificationReduction(std::vector<std::string>& notes) {
  const std::string raw = testing::ReadFile(testing::FixtureDir() / "export_style.mdl");
  const SyntaxTree tree = Parse(raw, ParseMode::kLenient);
  const SyntaxTree simple = Simplify(tree, SimplifyPolicy::Defaults()).tree;
  const double before = static_cast<double>(Tokenize(raw).size());
  const double after = static_cast<double>(Tokenize(Print(simple)).size());
  const double reduction = 1.0 - after / before;
  notes.push_back(Fmt("%.0f", before) + " -> " + Fmt("%.0f", after) + " tokens, " +
                  Fmt("%.1f%% reduction", 100.0 * reduction));
  if (reduction < kMinTokenReduction) return "reduction " + Fmt("%.3f", reduction);
  return "";
}

std::string Template(const char* stub) {
  return "'" + testing::StubPath(stub).string() + "' {model}";
}

std::string FuzzClassification(std::vector<std::string>& notes) {
  testing::TempDir dir;
  const std::string model_text =
      "Model {\n  System {\n    Block {\n      BlockType Constant\n      Name \"a\"\n"
      "    }\n  }\n}\n";
  testing::WriteFile(dir / "m.mdl", model_text);
  const std::pair<const char*, OutcomeKind> expected[] = {
      {"validator_ok.sh", OutcomeKind::kValid},
      {"validator_reject.sh", OutcomeKind::kRejected},
      {"validator_abort.sh", OutcomeKind::kCrash},
      {"validator_hang.sh", OutcomeKind::kTimeout},
  };
  for (const auto& [stub, kind] : expected) {
    const ValidationOutcome o = RunValidator(dir / "m.mdl", Template(stub), kHangTimeout);
    if (o.kind != kind) {
      return std::string(stub) + " classified as " + std::string(OutcomeKindName(o.kind));
    }
  }

  // Aborts whose diagnostics differ only in the model path share a bucket.
  CrashTriage triage;
  for (const char* leaf : {"x/one.mdl", "y/z/two.mdl", "three.mdl"}) {
    testing::WriteFile(dir / leaf, model_text);
    const std::string path = (dir / leaf).string();
    triage.Add(path, RunValidator(path, Template("validator_abort.sh"), 10));
  }
  if (triage.Buckets().size() != 1) {
    return std::to_string(triage.Buckets().size()) + " buckets for path-only differences";
  }

  const TokenSeq tokens = Tokenize(
      "System { Block { BlockType Sin Name \"a\" }"
      " Line { SrcBlock \"a\" SrcPort 1 DstBlock \"b\" DstPort 1 }"
      " Block { BlockType Display Name \"b\" } } }");
  testing::ScriptedBackend good("Model {", tokens);
  testing::ScriptedBackend broken("Model {", Tokenize("System { Block {"));
  std::size_t reports = 0;
  for (const char* stub : {"", "validator_ok.sh", "validator_reject.sh",
                           "validator_abort.sh", "validator_hang.sh",
                           "validator_alternate.sh"}) {
    for (LanguageBackend* backend : {static_cast<LanguageBackend*>(&good),
                                     static_cast<LanguageBackend*>(&broken)}) {
      CampaignConfig config;
      config.sampler.seed_text = "Model {";
      config.budget_count = 4;
      config.timeout_seconds = kHangTimeout;
      config.jobs = 4;
      config.out_dir = dir / ("campaign" + std::to_string(reports));
      if (*stub) config.validator_cmd = Template(stub);
      const CampaignReport report = RunCampaign(*backend, config);
      if (!report.Conserved()) {
        return "conservation fails for campaign " + std::to_string(reports);
      }
      const CampaignReport again = TallyRecords(
          ReadOutcomeRecords(config.out_dir / "outcomes.jsonl"), report.validator_enabled);
      if (!again.Conserved() || again.generated != report.generated) {
        return "conservation fails on re-tally of campaign " + std::to_string(reports);
      }
      ++reports;
    }
  }
  notes.push_back(std::to_string(reports) + " campaign reports conserved");
  return "";
}

int Main() {
  const std::vector<Criterion> criteria = {
      {"parser round-trip", kRoundTripSeconds, ParserRoundTrip},
      {"bfs restructuring properties", kBfsSeconds, BfsProperties},
      {"restore contract", 0.0, RestoreContract},
      {"metrics oracle", kMetricsSeconds, MetricsOracle},
      {"sampler math", 0.0, SamplerMath},
      {"n-gram memorization", 0.0, NGramMemorization},
      {"end-to-end static-valid rate", kEndToEndSeconds, EndToEnd},
      {"simplification reduction", 0.0, SimplificationReduction},
      {"fuzz harness classification", 0.0, FuzzClassification},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    std::vector<std::string> notes;
    std::string failure;
    const auto start = Clock::now();
    try {
      failure = c.check(notes);
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (failure.empty() && c.max_seconds > 0.0 && secs > c.max_seconds) {
      failure = "took " + Fmt("%.1f s", secs) + ", limit " + Fmt("%.0f s", c.max_seconds);
    }
    if (!failure.empty()) ++failures;
    std::cout << (failure.empty() ? "PASS " : "FAIL ") << c.name << " ("
              << Fmt("%.2f s", secs) << ")";
    if (!failure.empty()) std::cout << ": " << failure;
    std::cout << "\n";
    for (const auto& n : notes) std::cout << "    " << n << "\n";
    std::cout.flush();
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size()
            << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace mdlfuzz

int main() { return mdlfuzz::Main(); }
