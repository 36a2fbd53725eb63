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

#ifndef MDLFUZZ_GRAPH_H_
#define MDLFUZZ_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mdlfuzz/syntax.h"

namespace mdlfuzz {

struct BlockNode {
  std::string name;
  std::string block_type;
  std::vector<Param> params;       // as written, including Name and BlockType
  std::vector<Section> sections;   // nested sections such as Port { ... }

  bool operator==(const BlockNode&) const = default;
};

struct PortRef {
  std::string block;
  int port = 1;

  bool operator==(const PortRef&) const = default;
};

struct PortEdge {
  PortRef src;
  PortRef dst;
  // Line-level params other than the endpoint keys (e.g. a signal Name).
  std::vector<Param> attrs;

  bool operator==(const PortEdge&) const = default;
};

// Directed multigraph of blocks and port-addressed edges. Blocks and edges
// keep file-appearance order; adjacency lists hold edge indices in that order.
class ModelGraph {
 public:
  ModelGraph() = default;

  // Throws Error(kDuplicateBlockName).
  void AddBlock(BlockNode block);
  // Throws Error(kDanglingReference) when an endpoint names no block.
  void AddEdge(PortEdge edge);

  const std::vector<BlockNode>& blocks() const { return blocks_; }
  const std::vector<PortEdge>& edges() const { return edges_; }
  const std::vector<std::string>& findings() const { return findings_; }
  void AddFinding(std::string finding) { findings_.push_back(std::move(finding)); }

  std::optional<std::size_t> IndexOf(std::string_view name) const;
  const std::vector<std::size_t>& OutEdges(std::size_t block) const {
    return out_[block];
  }
  const std::vector<std::size_t>& InEdges(std::size_t block) const {
    return in_[block];
  }
  std::size_t EdgeSource(std::size_t edge) const { return edge_src_[edge]; }
  std::size_t EdgeTarget(std::size_t edge) const { return edge_dst_[edge]; }

 private:
  std::vector<BlockNode> blocks_;
  std::vector<PortEdge> edges_;
  std::vector<std::string> findings_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::size_t> edge_src_;
  std::vector<std::size_t> edge_dst_;
};

// The section whose Block/Line children form the diagram: the root's first
// System child, or the root itself when it has no System section.
const Section& DiagramSection(const SyntaxTree& tree);

// Reads one Block section. Throws Error(kMalformedElement) without a Name.
BlockNode ReadBlock(const Section& block);

// Expands a Line section into one edge per destination, recursing through
// nested Branch sections. Throws Error(kMalformedElement) on a missing
// source or a port that is not a positive integer.
std::vector<PortEdge> ReadLine(const Section& line);

// Strict mode throws on dangling references, duplicate names, and malformed
// blocks or lines; lenient mode drops the offending element and records a
// finding on the graph instead.
ModelGraph BuildGraph(const SyntaxTree& tree, ParseMode mode = ParseMode::kStrict);

// Weakly connected components with at least two blocks. Components are
// ordered by their first block in file order; members are in file order.
std::vector<std::vector<std::string>> ConnectedComponents(const ModelGraph& g);

inline constexpr std::uint64_t kDefaultPathSearchBudget = 1'000'000;

// Blocks on the longest simple directed path from an in-degree-0 block to an
// out-degree-0 block, endpoints included; 0 when no such path exists. Acyclic
// graphs are solved exactly by dynamic programming; graphs with cycles fall
// back to backtracking enumeration that throws
// Error(kPathSearchBudgetExceeded) after `budget` node expansions.
std::size_t LongestSourceSinkPath(const ModelGraph& g,
                                  std::uint64_t budget = kDefaultPathSearchBudget);

struct MetricsRecord {
  std::size_t blk_count = 0;
  std::size_t n_subgraphs = 0;
  std::size_t max_subgraph_size = 0;
  std::size_t max_src_sink_path = 0;

  bool operator==(const MetricsRecord&) const = default;
};

MetricsRecord ComputeMetrics(const ModelGraph& g,
                             std::uint64_t budget = kDefaultPathSearchBudget);

inline constexpr std::string_view kMetricsCsvHeader =
    "model,blk_count,n_subgraphs,max_subgraph_size,max_src_sink_path";

// One CSV data row (no trailing newline); the model name is quoted if needed.
std::string MetricsCsvRow(std::string_view model, const MetricsRecord& m);

// RFC 4180 field quoting.
std::string CsvField(std::string_view field);

}  // namespace mdlfuzz

#endif  // MDLFUZZ_GRAPH_H_
