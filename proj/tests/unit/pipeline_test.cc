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

#include "mdlfuzz/pipeline.h"

#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "mdlfuzz/campaign.h"
#include "mdlfuzz/error.h"
#include "mdlfuzz/simplify.h"
#include "testing/testing.h"

namespace mdlfuzz {
namespace {

namespace fs = std::filesystem;
using ::mdlfuzz::testing::FixtureDir;
using ::mdlfuzz::testing::TempDir;

void CopyCorpus(const fs::path& to, std::size_t count) {
  fs::create_directories(to);
  const auto files = ListModelFiles(testing::CorpusDir());
  ASSERT_GE(files.size(), count);
  for (std::size_t i = 0; i < count; ++i) {
    fs::copy_file(files[i], to / files[i].filename());
  }
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::kIoError;
}

TEST(Sha256Test, KnownVectors) {
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(IngestTest, ThreeFlatModels) {
  TempDir dir;
  CopyCorpus(dir.path(), 3);
  const CorpusManifest manifest = Ingest(dir.path(), SimplifyPolicy::Defaults(), 2);
  ASSERT_EQ(manifest.entries.size(), 3u);
  EXPECT_EQ(manifest.AcceptedCount(), 3u);
  for (const auto& e : manifest.entries) {
    EXPECT_EQ(e.sha256, Sha256Hex(testing::ReadFile(dir / e.path)));
    EXPECT_LT(e.tokens_simplified, e.tokens_raw);
    EXPECT_GT(e.tokens_canonical, 0u);
  }
}

TEST(IngestTest, MixedDirectory) {
  TempDir dir;
  fs::create_directories(dir / "sub");
  fs::copy_file(FixtureDir() / "hierarchical.mdl", dir / "sub/hier.MDL");
  fs::copy_file(FixtureDir() / "sfunction.mdl", dir / "sfun.mdl");
  fs::copy_file(FixtureDir() / "export_style.mdl", dir / "export.mdl");
  testing::WriteFile(dir / "broken.mdl", "Model { System {");
  testing::WriteFile(dir / "annotations.mdl",
                     "Model { System { Annotation { Name \"hi\" } } }");
  testing::WriteFile(dir / "notes.txt", "not a model");
  const CorpusManifest m = Ingest(dir.path(), SimplifyPolicy::Defaults());
  ASSERT_EQ(m.entries.size(), 5u);
  std::map<std::string, ManifestEntry> by_path;
  for (const auto& e : m.entries) by_path[e.path] = e;
  EXPECT_EQ(by_path.at("sub/hier.MDL").flatness, FlatnessStatus::kNonFlat);
  EXPECT_EQ(by_path.at("sfun.mdl").flatness, FlatnessStatus::kNonFlat);
  EXPECT_EQ(by_path.at("broken.mdl").parse, ParseStatus::kFailed);
  EXPECT_FALSE(by_path.at("broken.mdl").note.empty());
  EXPECT_EQ(by_path.at("annotations.mdl").simplify, SimplifyStatus::kEmpty);
  EXPECT_TRUE(by_path.at("export.mdl").Accepted());
  EXPECT_EQ(m.AcceptedCount(), 1u);
}

TEST(IngestTest, EmptyAndMissingDirectories) {
  TempDir dir;
  EXPECT_TRUE(Ingest(dir.path(), SimplifyPolicy::Defaults()).entries.empty());
  EXPECT_EQ(CodeOf([&] { Ingest(dir / "nope", SimplifyPolicy::Defaults()); }),
            ErrorCode::kDirectoryNotFound);
}

TEST(ManifestTest, CsvRoundTrip) {
  TempDir dir;
  CopyCorpus(dir.path(), 2);
  testing::WriteFile(dir / "odd, \"name\".mdl", "Model {");
  const CorpusManifest m = Ingest(dir.path(), SimplifyPolicy::Defaults());
  const CorpusManifest back = CorpusManifest::FromCsv(m.ToCsv());
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_NE(m.Summary().find("accepted"), std::string::npos);
  EXPECT_THROW(CorpusManifest::FromCsv("wrong,header\n"), Error);
}

TEST(MetricsCsvTest, RowsPerModel) {
  const SyntaxTree tree =
      Parse(testing::ReadFile(FixtureDir() / "printer_normal/feedback.mdl"));
  const std::string csv = MetricsCsv({{"a.mdl", tree}, {"b.mdl", tree}});
  EXPECT_EQ(csv, std::string(kMetricsCsvHeader) + "\na.mdl,4,1,4,4\nb.mdl,4,1,4,4\n");
  EXPECT_EQ(MetricsCsv({}), std::string(kMetricsCsvHeader) + "\n");
}

TEST(CanonicalizeForTrainingTest, RenamesInBfsOrder) {
  const SyntaxTree simple = Simplify(Parse(testing::ReadFile(FixtureDir() /
                                                             "export_style.mdl")),
                                     SimplifyPolicy::Defaults())
                                .tree;
  const std::string canon = CanonicalizeForTraining(simple);
  const SyntaxTree tree = Parse(canon);
  const Section& system = DiagramSection(tree);
  ASSERT_EQ(system.children[0].name, "Block");
  EXPECT_EQ(system.children[0].FindParam("Name")->value.Text(), "a");
  EXPECT_EQ(system.children[0].FindParam("BlockType")->value.Text(), "Inport");
  EXPECT_EQ(system.children[1].name, "Line");
  EXPECT_LT(Tokenize(canon).size(), Tokenize(Print(simple)).size());
}

TEST(PipelineConfigTest, Parsing) {
  const PipelineConfig cfg = PipelineConfig::FromText(
      "# comment\n"
      "corpus_dir = corpus\n"
      "output_dir = \"/abs/out\"\n"
      "ngram_order = 4\n"
      "samples = 12\n"
      "temperature = 0.8\n"
      "nucleus = 0.95\n"
      "seed_text = \"Model {\"\n"
      "validator_cmd = ./check.sh {model}\n"
      "timeout = 2.5\n",
      "/base");
  EXPECT_EQ(cfg.corpus_dir, fs::path("/base/corpus"));
  EXPECT_EQ(cfg.output_dir, fs::path("/abs/out"));
  EXPECT_EQ(cfg.ngram_order, 4);
  EXPECT_EQ(cfg.samples, 12u);
  EXPECT_DOUBLE_EQ(cfg.sampler.temperature, 0.8);
  EXPECT_EQ(cfg.sampler.seed_text, "Model {");
  EXPECT_EQ(cfg.validator_cmd, "./check.sh {model}");
  EXPECT_DOUBLE_EQ(cfg.timeout_seconds, 2.5);
  EXPECT_EQ(CodeOf([] { PipelineConfig::FromText("colour = red"); }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(CodeOf([] { PipelineConfig::FromText("samples = many"); }),
            ErrorCode::kInvalidConfig);
}

TEST(PipelineConfigTest, Validate) {
  PipelineConfig cfg;
  cfg.corpus_dir = "/definitely/not/here";
  EXPECT_EQ(CodeOf([&] { cfg.Validate(); }), ErrorCode::kDirectoryNotFound);
  TempDir dir;
  cfg.corpus_dir = dir.path();
  cfg.ngram_order = 0;
  EXPECT_EQ(CodeOf([&] { cfg.Validate(); }), ErrorCode::kInvalidConfig);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    CopyCorpus(dir_ / "corpus", 8);
    config_.corpus_dir = dir_ / "corpus";
    config_.output_dir = dir_ / "out";
    config_.samples = 10;
    config_.jobs = 2;
  }

  std::vector<StageRun> Run(PipelineOptions options = {}) {
    return RunPipeline(config_, options);
  }

  TempDir dir_;
  PipelineConfig config_;
};

TEST_F(PipelineTest, AllStagesThenResume) {
  const auto first = Run();
  ASSERT_EQ(first.size(), std::size(kPipelineStages));
  for (const auto& s : first) EXPECT_FALSE(s.skipped) << s.stage;
  const fs::path out = config_.output_dir;
  for (const char* leaf : {"ingest/manifest.csv", "train/ngram.json",
                           "sample/sample_000009.txt", "restore/status.csv",
                           "check/outcomes.jsonl", "report/report.csv",
                           "report/corpus_metrics.csv", "report/sample_metrics.csv"}) {
    EXPECT_TRUE(fs::exists(out / leaf)) << leaf;
  }
  const auto records = ReadOutcomeRecords(out / "check/outcomes.jsonl");
  EXPECT_EQ(records.size(), 10u);
  EXPECT_TRUE(TallyRecords(records, false).Conserved());

  const auto second = Run();
  for (const auto& s : second) EXPECT_TRUE(s.skipped) << s.stage;
}

TEST_F(PipelineTest, ChangedSettingRerunsDownstreamOnly) {
  Run();
  config_.sampler.rng_seed = 77;
  const auto runs = Run();
  std::map<std::string, bool> skipped;
  for (const auto& s : runs) skipped[s.stage] = s.skipped;
  EXPECT_TRUE(skipped.at("ingest"));
  EXPECT_TRUE(skipped.at("train"));
  EXPECT_FALSE(skipped.at("sample"));
  EXPECT_FALSE(skipped.at("report"));
}

TEST_F(PipelineTest, ChangedCorpusRerunsEverything) {
  Run();
  testing::WriteFile(config_.corpus_dir / "extra.mdl",
                     testing::ReadFile(FixtureDir() / "printer_normal/feedback.mdl"));
  for (const auto& s : Run()) EXPECT_FALSE(s.skipped) << s.stage;
}

TEST_F(PipelineTest, SubsetAndForce) {
  PipelineOptions options;
  options.stages = {"ingest", "simplify"};
  std::ostringstream log;
  options.log = &log;
  const auto runs = Run(options);
  ASSERT_EQ(runs.size(), 2u);
  EXPECT_FALSE(log.str().empty());
  options.force = true;
  for (const auto& s : Run(options)) EXPECT_FALSE(s.skipped);
  options.stages = {"transmogrify"};
  EXPECT_EQ(CodeOf([&] { Run(options); }), ErrorCode::kInvalidConfig);
}

TEST_F(PipelineTest, MissingUpstreamIsStageFailure) {
  PipelineOptions options;
  options.stages = {"train"};
  EXPECT_EQ(CodeOf([&] { Run(options); }), ErrorCode::kStageFailure);
}

TEST_F(PipelineTest, MissingCorpus) {
  config_.corpus_dir = dir_ / "gone";
  EXPECT_EQ(CodeOf([&] { Run(); }), ErrorCode::kDirectoryNotFound);
}

TEST_F(PipelineTest, ValidatorStage) {
  config_.validator_cmd =
      "'" + testing::StubPath("validator_ok.sh").string() + "' {model}";
  Run();
  const auto records = ReadOutcomeRecords(config_.output_dir / "check/outcomes.jsonl");
  const CampaignReport report = TallyRecords(records, true);
  EXPECT_EQ(report.validator_valid, report.static_valid);
  EXPECT_TRUE(report.Conserved());
}

}  // namespace
}  // namespace mdlfuzz
