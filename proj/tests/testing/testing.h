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

// Shared generators, independent oracles and stubs for the unit and
// acceptance tests. The oracles deliberately avoid the library's own
// traversal code: paths are enumerated exhaustively and components come from
// union-find.

#ifndef MDLFUZZ_TESTS_TESTING_H_
#define MDLFUZZ_TESTS_TESTING_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mdlfuzz/canonical.h"
#include "mdlfuzz/graph.h"
#include "mdlfuzz/sampler.h"
#include "mdlfuzz/syntax.h"

namespace mdlfuzz::testing {

std::filesystem::path FixtureDir();
std::filesystem::path CorpusDir();
std::filesystem::path CliPath();
std::filesystem::path StubPath(std::string_view name);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view text);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view leaf) const {
    return path_ / leaf;
  }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

// A tree the printer and strict parser must round-trip: identifiers, bare
// words, escaped strings (sometimes several adjacent pieces), vectors that
// contain strings and nesting, comments, up to `max_depth` levels.
SyntaxTree RandomTree(std::mt19937_64& rng, int max_depth = 4);

struct GraphShape {
  std::size_t min_blocks = 0;
  std::size_t max_blocks = 50;
  double edge_density = 1.5;  // expected edges per block
  bool self_loops = true;
};

// Blocks get unique names in shuffled order so that file order differs from
// name order; ports are small positive integers.
ModelGraph RandomGraph(std::mt19937_64& rng, const GraphShape& shape = {});

// n blocks, no edges.
ModelGraph DanglingOnly(std::size_t n);
// A directed cycle over n >= 1 blocks, so nothing is a source or sink.
ModelGraph SourcelessCycle(std::size_t n);
// Builds a graph from "a>b" style edge specs over the named blocks.
ModelGraph MakeGraph(const std::vector<std::string>& blocks,
                     const std::vector<std::pair<std::string, std::string>>& edges);

// Tool-compliant tree with every block before every line, one Line per edge.
SyntaxTree GraphToTree(const ModelGraph& g);

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

// Exhaustive DFS over all simple paths from in-degree-0 to out-degree-0
// blocks. Exponential; only for small graphs.
std::size_t BruteForceLongestPath(const ModelGraph& g);

// Weakly connected components of size >= 2 via union-find, each sorted, the
// list sorted.
std::vector<std::vector<std::string>> UnionFindComponents(const ModelGraph& g);

// Same component family regardless of the order components or members are
// listed in.
std::vector<std::vector<std::string>> SortedComponents(
    std::vector<std::vector<std::string>> components);

using EdgeKey = std::tuple<std::string, int, std::string, int>;

// Identity of a graph up to element order: the block names with their types
// and the multiset of port-level edges.
struct GraphFingerprint {
  std::map<std::string, std::string> blocks;  // name -> type
  std::multiset<EdgeKey> edges;

  bool operator==(const GraphFingerprint&) const = default;
};

GraphFingerprint Fingerprint(const ModelGraph& g);
// Applies a block-name mapping to a fingerprint.
GraphFingerprint Renamed(const GraphFingerprint& f,
                         const std::map<std::string, std::string>& names);

// Checks a BFS emission against its graph: every block and edge exactly
// once, each edge preceded by one of its endpoints, and a source first when
// the graph has one. Returns "" or a description of the first violation.
std::string CheckBfsProperties(const ModelGraph& g, const CanonicalDoc& doc);

// Checks restore(canonical tree of `doc`): blocks before lines, block and
// line orders kept, same graph, idempotent. Returns "" or the violation.
std::string CheckRestoreContract(const CanonicalDoc& doc);

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

// Emits `tokens` one by one regardless of context, then the end-of-text
// token. Context length picks the position, so the backend is stateless.
class ScriptedBackend : public LanguageBackend {
 public:
  ScriptedBackend(std::string seed_text, std::vector<std::string> tokens,
                  std::string eot = "<endoftext>");

  TokenDistribution NextTokenDistribution(std::string_view context) override;
  std::string_view TokenSeparator() const override { return " "; }
  bool ConcurrentSafe() const override { return true; }

 private:
  std::vector<std::string> prefixes_;  // context after i tokens
  std::vector<std::string> tokens_;
  std::string eot_;
};

// Always returns the same distribution.
class FixedBackend : public LanguageBackend {
 public:
  explicit FixedBackend(TokenDistribution pmf) : pmf_(std::move(pmf)) {}
  TokenDistribution NextTokenDistribution(std::string_view) override {
    return pmf_;
  }
  std::string_view TokenSeparator() const override { return " "; }
  bool ConcurrentSafe() const override { return true; }

 private:
  TokenDistribution pmf_;
};

}  // namespace mdlfuzz::testing

#endif  // MDLFUZZ_TESTS_TESTING_H_
