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

#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mdlfuzz/canonical.h"
#include "mdlfuzz/graph.h"
#include "mdlfuzz/ngram.h"
#include "mdlfuzz/pipeline.h"
#include "mdlfuzz/sampler.h"
#include "mdlfuzz/simplify.h"
#include "mdlfuzz/syntax.h"

namespace mdlfuzz {
namespace {

// A model with `blocks` Gain blocks, a chain through them and about as many
// random extra forward lines (so the graph stays acyclic), listed after the
// blocks.
std::string ModelText(int blocks, unsigned seed = 1) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, blocks - 1);
  std::string text = "Model {\n  Name \"bench\"\n  System {\n";
  for (int i = 0; i < blocks; ++i) {
    text += "    Block {\n      BlockType Gain\n      Name \"g" + std::to_string(i) +
            "\"\n      Position [10, 20, 40, 50]\n      Gain \"2\"\n    }\n";
  }
  auto line = [&](int src, int dst) {
    text += "    Line {\n      SrcBlock \"g" + std::to_string(src) +
            "\"\n      SrcPort 1\n      DstBlock \"g" + std::to_string(dst) +
            "\"\n      DstPort 1\n    }\n";
  };
  for (int i = 0; i + 1 < blocks; ++i) line(i, i + 1);
  for (int i = 0; i < blocks; ++i) {
    const int a = pick(rng), b = pick(rng);
    if (a != b) line(std::min(a, b), std::max(a, b));
  }
  return text + "  }\n}\n";
}

void BM_Parse(benchmark::State& state) {
  const std::string text = ModelText(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parse(text, ParseMode::kStrict));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(text.size()));
}
BENCHMARK(BM_Parse)->Range(8, 512);

void BM_Print(benchmark::State& state) {
  const SyntaxTree tree = Parse(ModelText(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(Print(tree));
}
BENCHMARK(BM_Print)->Range(8, 512);

void BM_Simplify(benchmark::State& state) {
  const SyntaxTree tree = Parse(ModelText(static_cast<int>(state.range(0))));
  const SimplifyPolicy policy = SimplifyPolicy::Defaults();
  for (auto _ : state) benchmark::DoNotOptimize(Simplify(tree, policy));
}
BENCHMARK(BM_Simplify)->Range(8, 512);

void BM_BfsRestructure(benchmark::State& state) {
  const ModelGraph g = BuildGraph(Parse(ModelText(static_cast<int>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(BfsRestructure(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BfsRestructure)->RangeMultiplier(4)->Range(8, 2048)->Complexity();

void BM_ComputeMetrics(benchmark::State& state) {
  const ModelGraph g = BuildGraph(Parse(ModelText(static_cast<int>(state.range(0)))));
  for (auto _ : state) benchmark::DoNotOptimize(ComputeMetrics(g));
}
BENCHMARK(BM_ComputeMetrics)->Range(8, 512);

void BM_CanonicalizeForTraining(benchmark::State& state) {
  const SyntaxTree tree = Simplify(Parse(ModelText(static_cast<int>(state.range(0)))),
                                   SimplifyPolicy::Defaults())
                              .tree;
  for (auto _ : state) benchmark::DoNotOptimize(CanonicalizeForTraining(tree));
}
BENCHMARK(BM_CanonicalizeForTraining)->Range(8, 512);

TokenDistribution Zipf(int vocab) {
  TokenDistribution pmf;
  for (int i = 0; i < vocab; ++i) {
    pmf.entries.push_back({"t" + std::to_string(i), 1.0 / (i + 1)});
  }
  pmf.Normalize();
  return pmf;
}

void BM_NucleusFilter(benchmark::State& state) {
  const TokenDistribution pmf = Zipf(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(NucleusFilter(pmf, 0.9));
}
BENCHMARK(BM_NucleusFilter)->Range(16, 16384);

void BM_SampleToken(benchmark::State& state) {
  const TokenDistribution pmf = NucleusFilter(Zipf(static_cast<int>(state.range(0))), 0.9);
  Rng rng(0);
  for (auto _ : state) benchmark::DoNotOptimize(SampleToken(pmf, rng));
}
BENCHMARK(BM_SampleToken)->Range(16, 16384);

std::vector<TokenSeq> Corpus(int docs) {
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < docs; ++i) {
    corpus.push_back(Tokenize(CanonicalizeForTraining(
        Parse(ModelText(4 + i % 12, static_cast<unsigned>(i))))));
  }
  return corpus;
}

void BM_NGramTrain(benchmark::State& state) {
  const std::vector<TokenSeq> corpus = Corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(NGramModel::Train(corpus, 5));
}
BENCHMARK(BM_NGramTrain)->Range(8, 128);

void BM_NGramNextDistribution(benchmark::State& state) {
  const std::vector<TokenSeq> corpus = Corpus(64);
  const NGramModel model = NGramModel::Train(corpus, 5);
  const TokenSeq& doc = corpus[3];
  std::size_t pos = 4;
  for (auto _ : state) {
    const TokenSeq context(doc.begin() + static_cast<std::ptrdiff_t>(pos - 4),
                           doc.begin() + static_cast<std::ptrdiff_t>(pos));
    benchmark::DoNotOptimize(model.NextDistribution(context));
    pos = pos + 1 < doc.size() ? pos + 1 : 4;
  }
}
BENCHMARK(BM_NGramNextDistribution);

void BM_GenerateNGram(benchmark::State& state) {
  const NGramModel model = NGramModel::Train(Corpus(64), 5);
  NGramBackend backend(model);
  SamplerConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Generate(backend, config));
    ++config.rng_seed;
  }
}
BENCHMARK(BM_GenerateNGram);

}  // namespace
}  // namespace mdlfuzz

BENCHMARK_MAIN();
