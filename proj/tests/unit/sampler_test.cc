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

#include "mdlfuzz/sampler.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "mdlfuzz/error.h"
#include "testing/testing.h"

namespace mdlfuzz {
namespace {

TokenDistribution Pmf(std::vector<std::pair<std::string, double>> entries) {
  TokenDistribution pmf;
  for (auto& [t, p] : entries) pmf.entries.push_back({t, p});
  return pmf;
}

std::map<std::string, double> AsMap(const TokenDistribution& pmf) {
  std::map<std::string, double> out;
  for (const auto& e : pmf.entries) out[e.token] = e.prob;
  return out;
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIoError;
}

const TokenDistribution kFour = Pmf({{"a", 0.5}, {"b", 0.3}, {"c", 0.15}, {"d", 0.05}});

TEST(TemperatureTest, OneIsIdentity) {
  auto out = AsMap(ApplyTemperature(kFour, 1.0));
  EXPECT_DOUBLE_EQ(out["a"], 0.5);
  EXPECT_DOUBLE_EQ(out["d"], 0.05);
}

TEST(TemperatureTest, HalfSquares) {
  auto out = AsMap(ApplyTemperature(Pmf({{"x", 0.8}, {"y", 0.2}}), 0.5));
  EXPECT_NEAR(out["x"], 0.64 / 0.68, 1e-12);
  EXPECT_NEAR(out["y"], 0.04 / 0.68, 1e-12);
}

TEST(TemperatureTest, NearZeroIsGreedy) {
  auto out = AsMap(ApplyTemperature(Pmf({{"x", 0.8}, {"y", 0.2}}), 1e-4));
  EXPECT_DOUBLE_EQ(out["x"], 1.0);
  EXPECT_DOUBLE_EQ(out["y"], 0.0);
}

TEST(TemperatureTest, PreservesRanking) {
  for (double t : {0.1, 0.5, 0.9, 1.5, 4.0}) {
    const TokenDistribution out = ApplyTemperature(kFour, t);
    for (std::size_t i = 1; i < out.entries.size(); ++i) {
      EXPECT_GT(out.entries[i - 1].prob, out.entries[i].prob) << "T=" << t;
    }
    EXPECT_NEAR(out.Total(), 1.0, 1e-12);
  }
}

TEST(TemperatureTest, RejectsNonPositive) {
  EXPECT_EQ(CodeOf([] { ApplyTemperature(kFour, 0.0); }),
            ErrorCode::kNonPositiveTemperature);
  EXPECT_EQ(CodeOf([] { ApplyTemperature(kFour, -1.0); }),
            ErrorCode::kNonPositiveTemperature);
}

TEST(NucleusTest, WorkedExample) {
  const TokenDistribution out = NucleusFilter(kFour, 0.7);
  ASSERT_EQ(out.entries.size(), 2u);
  EXPECT_EQ(out.entries[0].token, "a");
  EXPECT_DOUBLE_EQ(out.entries[0].prob, 0.625);
  EXPECT_DOUBLE_EQ(out.entries[1].prob, 0.375);
}

TEST(NucleusTest, StrictInequality) {
  // 0.5 alone is not strictly greater than 0.5.
  const TokenDistribution out = NucleusFilter(kFour, 0.5);
  ASSERT_EQ(out.entries.size(), 2u);
  EXPECT_EQ(out.entries[1].token, "b");
}

TEST(NucleusTest, OneKeepsAll) {
  EXPECT_EQ(NucleusFilter(kFour, 1.0).entries.size(), 4u);
}

TEST(NucleusTest, UnsortedInput) {
  const TokenDistribution out =
      NucleusFilter(Pmf({{"d", 0.05}, {"b", 0.3}, {"a", 0.5}, {"c", 0.15}}), 0.7);
  EXPECT_EQ(AsMap(out).size(), 2u);
  EXPECT_TRUE(AsMap(out).contains("a"));
  EXPECT_TRUE(AsMap(out).contains("b"));
}

TEST(NucleusTest, RejectsOutOfRange) {
  EXPECT_EQ(CodeOf([] { NucleusFilter(kFour, 0.0); }), ErrorCode::kInvalidNucleus);
  EXPECT_EQ(CodeOf([] { NucleusFilter(kFour, 1.5); }), ErrorCode::kInvalidNucleus);
}

TEST(DistributionTest, NormalizeEmpty) {
  TokenDistribution empty;
  EXPECT_EQ(CodeOf([&] { empty.Normalize(); }), ErrorCode::kEmptyDistribution);
  TokenDistribution zeros = Pmf({{"a", 0.0}});
  EXPECT_EQ(CodeOf([&] { zeros.Normalize(); }), ErrorCode::kEmptyDistribution);
}

TEST(SampleTokenTest, OneHot) {
  Rng rng(1);
  const TokenDistribution pmf = Pmf({{"x", 1.0}});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(SampleToken(pmf, rng), "x");
}

TEST(SampleTokenTest, ZeroMassNeverDrawn) {
  Rng rng(2);
  const TokenDistribution pmf = Pmf({{"z", 0.0}, {"x", 1.0}, {"w", 0.0}});
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(SampleToken(pmf, rng), "x");
}

TEST(SampleTokenTest, EmpiricalFrequencies) {
  Rng rng(3);
  const TokenDistribution pmf = Pmf({{"a", 0.625}, {"b", 0.375}});
  constexpr int kDraws = 100'000;
  std::map<std::string, int> counts;
  for (int i = 0; i < kDraws; ++i) ++counts[SampleToken(pmf, rng)];
  const double l1 = std::fabs(counts["a"] / double(kDraws) - 0.625) +
                    std::fabs(counts["b"] / double(kDraws) - 0.375);
  EXPECT_LE(l1, 0.02);
}

TEST(SampleTokenTest, SeedDeterminism) {
  Rng a(42), b(42), c(43);
  std::string sa, sb, sc;
  for (int i = 0; i < 200; ++i) {
    sa += SampleToken(kFour, a);
    sb += SampleToken(kFour, b);
    sc += SampleToken(kFour, c);
  }
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa, sc);
}

TEST(RngTest, UnitIntervalAndPinnedStream) {
  Rng rng(0);
  // mt19937_64 seeded with 0 yields 2947667278772165694 first.
  EXPECT_DOUBLE_EQ(rng.NextUnit(), static_cast<double>(2947667278772165694ULL >> 11) *
                                       0x1.0p-53);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.NextUnit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(GenerateTest, ScriptedCompletes) {
  testing::ScriptedBackend backend("Model", {"{", "}"});
  SamplerConfig config;
  config.seed_text = "Model";
  const GenerationResult r = Generate(backend, config);
  EXPECT_EQ(r.text, "Model { }");
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.tokens_emitted, 2u);
}

TEST(GenerateTest, BudgetStops) {
  testing::FixedBackend backend(Pmf({{"x", 1.0}}));
  SamplerConfig config;
  config.seed_text = "";
  config.max_tokens = 10;
  const GenerationResult r = Generate(backend, config);
  EXPECT_FALSE(r.completed);
  EXPECT_EQ(r.tokens_emitted, 10u);
  EXPECT_EQ(Tokenize(r.text).size(), 10u);
}

TEST(GenerateTest, SameSeedSameResult) {
  testing::FixedBackend backend(
      Pmf({{"a", 0.4}, {"b", 0.3}, {"c", 0.2}, {"<endoftext>", 0.1}}));
  SamplerConfig config;
  config.rng_seed = 99;
  config.nucleus = 1.0;
  const GenerationResult first = Generate(backend, config);
  EXPECT_EQ(Generate(backend, config), first);
  config.rng_seed = 100;
  EXPECT_NE(Generate(backend, config), first);
}

TEST(GenerateTest, SubwordTerminatorIsCut) {
  // A backend whose tokens carry their own spacing and that spells the
  // terminator in two pieces.
  class Pieces : public LanguageBackend {
   public:
    TokenDistribution NextTokenDistribution(std::string_view context) override {
      if (context == "Model {") return {{{" }", 1.0}}};
      if (context == "Model { }") return {{{"<endof", 1.0}}};
      return {{{"text>", 1.0}}};
    }
  } backend;
  SamplerConfig config;
  const GenerationResult r = Generate(backend, config);
  EXPECT_TRUE(r.completed);
  EXPECT_EQ(r.text, "Model { }");
}

TEST(GenerateTest, BackendErrorsCarryPartialText) {
  class Flaky : public LanguageBackend {
   public:
    TokenDistribution NextTokenDistribution(std::string_view context) override {
      if (context.size() > 10) throw std::runtime_error("connection lost");
      return {{{"x", 1.0}}};
    }
    std::string_view TokenSeparator() const override { return " "; }
  } backend;
  SamplerConfig config;
  try {
    Generate(backend, config);
    FAIL();
  } catch (const BackendFailure& e) {
    EXPECT_EQ(e.partial_text(), "Model { x x");
  }
}

TEST(GenerateTest, EmptyDistributionIsBackendFailure) {
  testing::FixedBackend backend(TokenDistribution{});
  EXPECT_THROW(Generate(backend, SamplerConfig{}), BackendFailure);
}

TEST(GenerateTest, ConfigValidation) {
  testing::FixedBackend backend(Pmf({{"x", 1.0}}));
  SamplerConfig config;
  config.temperature = 0.0;
  EXPECT_EQ(CodeOf([&] { Generate(backend, config); }),
            ErrorCode::kNonPositiveTemperature);
  config = {};
  config.nucleus = 0.0;
  EXPECT_EQ(CodeOf([&] { Generate(backend, config); }), ErrorCode::kInvalidNucleus);
  config = {};
  config.max_tokens = 0;
  EXPECT_EQ(CodeOf([&] { Generate(backend, config); }), ErrorCode::kInvalidConfig);
}

}  // namespace
}  // namespace mdlfuzz
