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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "mdlfuzz/pipeline.h"
#include "mdlfuzz/syntax.h"
#include "testing/testing.h"

namespace mdlfuzz {
namespace {

namespace fs = std::filesystem;
using ::mdlfuzz::testing::FixtureDir;
using ::mdlfuzz::testing::ReadFile;
using ::mdlfuzz::testing::TempDir;
using ::mdlfuzz::testing::WriteFile;

std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

struct CliResult {
  int exit = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  CliResult Run(const std::vector<std::string>& args, const std::string& stdin_path = "") {
    std::string cmd = Quote(testing::CliPath().string());
    for (const auto& a : args) cmd += " " + Quote(a);
    const fs::path out = dir_ / "stdout";
    const fs::path err = dir_ / "stderr";
    cmd += " >" + Quote(out.string()) + " 2>" + Quote(err.string());
    cmd += " <" + Quote(stdin_path.empty() ? "/dev/null" : stdin_path);
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (WIFEXITED(status)) r.exit = WEXITSTATUS(status);
    r.out = ReadFile(out);
    r.err = ReadFile(err);
    return r;
  }

  std::string Fixture(const std::string& leaf) { return (FixtureDir() / leaf).string(); }

  TempDir dir_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(Run({"--help"}).exit, 0);
  EXPECT_EQ(Run({}).exit, 1);
  EXPECT_EQ(Run({"frobnicate"}).exit, 1);
  EXPECT_EQ(Run({"check"}).exit, 1);
  EXPECT_EQ(Run({"sample", "--temperature", "0"}).exit, 1);
}

TEST_F(CliTest, CheckValidAndInvalid) {
  const CliResult ok = Run({"check", Fixture("printer_normal/feedback.mdl")});
  EXPECT_EQ(ok.exit, 0) << ok.err;

  WriteFile(dir_ / "bad.mdl",
            "Model {\n  System {\n    Block {\n      BlockType Gain\n      Name \"g\"\n    }\n"
            "    Line {\n      SrcBlock \"g\"\n      SrcPort 1\n      DstBlock \"nowhere\"\n"
            "      DstPort 1\n    }\n  }\n}\n");
  const CliResult bad = Run({"check", (dir_ / "bad.mdl").string()});
  EXPECT_EQ(bad.exit, 2);
  EXPECT_NE(bad.out.find("nowhere"), std::string::npos) << bad.out;
}

TEST_F(CliTest, MissingInputIsFailure) {
  EXPECT_EQ(Run({"check", (dir_ / "absent.mdl").string()}).exit, 3);
}

TEST_F(CliTest, SimplifyFromStdin) {
  const CliResult r = Run({"simplify", "-"}, Fixture("export_style.mdl"));
  ASSERT_EQ(r.exit, 0) << r.err;
  const SyntaxTree tree = Parse(r.out, ParseMode::kStrict);
  EXPECT_EQ(tree.root.name, "Model");
  EXPECT_LT(r.out.size(), ReadFile(Fixture("export_style.mdl")).size());
}

TEST_F(CliTest, CanonRejectsGarbage) {
  WriteFile(dir_ / "junk.mdl", "}}}");
  EXPECT_EQ(Run({"canon", (dir_ / "junk.mdl").string()}).exit, 2);
  const CliResult ok = Run({"canon", Fixture("printer_normal/canonical_chain.mdl")});
  EXPECT_EQ(ok.exit, 0) << ok.err;
  EXPECT_FALSE(ok.out.empty());
}

TEST_F(CliTest, RestoreRoundTrip) {
  const CliResult canon = Run({"canon", Fixture("printer_normal/feedback.mdl")});
  ASSERT_EQ(canon.exit, 0);
  WriteFile(dir_ / "sample.txt", canon.out);
  const CliResult restored = Run({"restore", (dir_ / "sample.txt").string()});
  ASSERT_EQ(restored.exit, 0) << restored.err;
  WriteFile(dir_ / "restored.mdl", restored.out);
  EXPECT_EQ(Run({"check", (dir_ / "restored.mdl").string()}).exit, 0);

  WriteFile(dir_ / "noise.txt", "Orphan text with no structure");
  EXPECT_EQ(Run({"restore", (dir_ / "noise.txt").string()}).exit, 2);
}

TEST_F(CliTest, MetricsCsv) {
  const std::string path = Fixture("printer_normal/feedback.mdl");
  const CliResult r = Run({"metrics", path});
  ASSERT_EQ(r.exit, 0) << r.err;
  EXPECT_NE(r.out.find(path + ",4,1,4,4"), std::string::npos) << r.out;
}

TEST_F(CliTest, IngestMissingAndEmptyDirectories) {
  EXPECT_EQ(Run({"ingest", (dir_ / "gone").string()}).exit, 1);
  fs::create_directories(dir_ / "empty");
  const CliResult r = Run({"ingest", (dir_ / "empty").string()});
  EXPECT_EQ(r.exit, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
}

TEST_F(CliTest, PipelineNeedsConfig) {
  EXPECT_EQ(Run({"pipeline"}).exit, 1);
}

TEST_F(CliTest, PipelineRunsThenSkips) {
  const auto files = ListModelFiles(testing::CorpusDir());
  ASSERT_GE(files.size(), 6u);
  fs::create_directories(dir_ / "corpus");
  for (std::size_t i = 0; i < 6; ++i) {
    fs::copy_file(files[i], dir_ / "corpus" / files[i].filename());
  }
  WriteFile(dir_ / "run.cfg",
            "corpus_dir = corpus\noutput_dir = out\nsamples = 4\njobs = 2\n");
  const std::string cfg = (dir_ / "run.cfg").string();

  const CliResult first = Run({"--config", cfg, "pipeline"});
  ASSERT_EQ(first.exit, 0) << first.err;
  EXPECT_TRUE(fs::exists(dir_ / "out/report/report.csv"));
  EXPECT_EQ(first.err.find(" skipped"), std::string::npos) << first.err;

  const CliResult second = Run({"--config", cfg, "pipeline"});
  ASSERT_EQ(second.exit, 0) << second.err;
  EXPECT_NE(second.err.find("report skipped"), std::string::npos) << second.err;

  const CliResult forced = Run({"--config", cfg, "pipeline", "--stages", "report", "--force"});
  ASSERT_EQ(forced.exit, 0) << forced.err;
  EXPECT_NE(forced.err.find("report done"), std::string::npos) << forced.err;
}

}  // namespace
}  // namespace mdlfuzz
