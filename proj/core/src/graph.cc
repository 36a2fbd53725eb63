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

#include "mdlfuzz/graph.h"

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdlfuzz/error.h"

namespace mdlfuzz {
namespace {

bool IsEndpointKey(std::string_view key) {
  return key == "SrcBlock" || key == "SrcPort" || key == "DstBlock" ||
         key == "DstPort";
}

int ReadPort(const Section& section, std::string_view key) {
  const Param* p = section.FindParam(key);
  if (p == nullptr) {
    throw Error(ErrorCode::kMalformedElement,
                section.name + " without " + std::string(key));
  }
  const std::string text = p->value.Text();
  int port = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), port);
  if (ec != std::errc() || ptr != text.data() + text.size() || port < 1) {
    throw Error(ErrorCode::kMalformedElement,
                std::string(key) + " '" + text + "' is not a positive integer");
  }
  return port;
}

void CollectDestinations(const Section& section, const PortRef& src,
                         const std::vector<Param>& attrs,
                         std::vector<PortEdge>& out) {
  if (const Param* dst = section.FindParam("DstBlock")) {
    out.push_back({src, {dst->value.Text(), ReadPort(section, "DstPort")}, attrs});
  }
  for (const auto& child : section.children) {
    if (child.name == "Branch") CollectDestinations(child, src, attrs, out);
  }
}

}  // namespace

void ModelGraph::AddBlock(BlockNode block) {
  if (index_.contains(block.name)) {
    throw Error(ErrorCode::kDuplicateBlockName,
                "block name '" + block.name + "' defined twice");
  }
  index_.emplace(block.name, blocks_.size());
  blocks_.push_back(std::move(block));
  out_.emplace_back();
  in_.emplace_back();
}

void ModelGraph::AddEdge(PortEdge edge) {
  const auto src = IndexOf(edge.src.block);
  const auto dst = IndexOf(edge.dst.block);
  if (!src || !dst) {
    throw Error(ErrorCode::kDanglingReference,
                "line references unknown block '" +
                    (src ? edge.dst.block : edge.src.block) + "'");
  }
  const std::size_t id = edges_.size();
  out_[*src].push_back(id);
  in_[*dst].push_back(id);
  edge_src_.push_back(*src);
  edge_dst_.push_back(*dst);
  edges_.push_back(std::move(edge));
}

std::optional<std::size_t> ModelGraph::IndexOf(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Section& DiagramSection(const SyntaxTree& tree) {
  if (const Section* system = tree.root.FindChild("System")) return *system;
  return tree.root;
}

BlockNode ReadBlock(const Section& block) {
  const Param* name = block.FindParam("Name");
  if (name == nullptr) {
    throw Error(ErrorCode::kMalformedElement, "Block without Name");
  }
  BlockNode node;
  node.name = name->value.Text();
  if (const Param* type = block.FindParam("BlockType")) {
    node.block_type = type->value.Text();
  }
  node.params = block.params;
  node.sections = block.children;
  return node;
}

std::vector<PortEdge> ReadLine(const Section& line) {
  const Param* src_block = line.FindParam("SrcBlock");
  if (src_block == nullptr) {
    throw Error(ErrorCode::kMalformedElement, "Line without SrcBlock");
  }
  const PortRef src{src_block->value.Text(), ReadPort(line, "SrcPort")};
  std::vector<Param> attrs;
  for (const auto& p : line.params) {
    if (!IsEndpointKey(p.key)) attrs.push_back(p);
  }
  std::vector<PortEdge> edges;
  CollectDestinations(line, src, attrs, edges);
  return edges;
}

ModelGraph BuildGraph(const SyntaxTree& tree, ParseMode mode) {
  const bool strict = mode == ParseMode::kStrict;
  const Section& diagram = DiagramSection(tree);
  ModelGraph g;
  for (const auto& child : diagram.children) {
    if (child.name != "Block") continue;
    try {
      g.AddBlock(ReadBlock(child));
    } catch (const Error& e) {
      if (strict) throw;
      g.AddFinding(std::string("dropped block: ") + e.what());
    }
  }
  // Lines are attached after every block is known, so definitions may appear
  // in any order (the canonical form interleaves them).
  for (const auto& child : diagram.children) {
    if (child.name != "Line") continue;
    std::vector<PortEdge> edges;
    try {
      edges = ReadLine(child);
    } catch (const Error& e) {
      if (strict) throw;
      g.AddFinding(std::string("dropped line: ") + e.what());
      continue;
    }
    for (auto& edge : edges) {
      try {
        g.AddEdge(std::move(edge));
      } catch (const Error& e) {
        if (strict) throw;
        g.AddFinding(std::string("dropped edge: ") + e.what());
      }
    }
  }
  return g;
}

std::vector<std::vector<std::string>> ConnectedComponents(const ModelGraph& g) {
  const std::size_t n = g.blocks().size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::string>> components;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    seen[start] = true;
    std::vector<std::size_t> members{start};
    std::deque<std::size_t> frontier{start};
    while (!frontier.empty()) {
      const std::size_t v = frontier.front();
      frontier.pop_front();
      auto visit = [&](std::size_t u) {
        if (!seen[u]) {
          seen[u] = true;
          members.push_back(u);
          frontier.push_back(u);
        }
      };
      for (std::size_t e : g.OutEdges(v)) visit(g.EdgeTarget(e));
      for (std::size_t e : g.InEdges(v)) visit(g.EdgeSource(e));
    }
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end());
    std::vector<std::string> names;
    names.reserve(members.size());
    for (std::size_t m : members) names.push_back(g.blocks()[m].name);
    components.push_back(std::move(names));
  }
  return components;
}

namespace {

// Distinct successor blocks per block (parallel edges collapse).
std::vector<std::vector<std::size_t>> Successors(const ModelGraph& g) {
  const std::size_t n = g.blocks().size();
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t e : g.OutEdges(v)) succ[v].push_back(g.EdgeTarget(e));
    std::sort(succ[v].begin(), succ[v].end());
    succ[v].erase(std::unique(succ[v].begin(), succ[v].end()), succ[v].end());
  }
  return succ;
}

// Kahn's algorithm; empty when the graph has a cycle.
std::vector<std::size_t> TopologicalOrder(
    const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& out : succ) {
    for (std::size_t u : out) ++indegree[u];
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) order.push_back(v);
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (std::size_t u : succ[order[head]]) {
      if (--indegree[u] == 0) order.push_back(u);
    }
  }
  if (order.size() != n) order.clear();
  return order;
}

class SimplePathSearch {
 public:
  SimplePathSearch(const std::vector<std::vector<std::size_t>>& succ,
                   const std::vector<bool>& is_sink, std::uint64_t budget)
      : succ_(succ), is_sink_(is_sink), on_path_(succ.size(), false),
        budget_(budget) {}

  std::size_t LongestFrom(std::size_t source) {
    Visit(source, 1);
    return best_;
  }

 private:
  void Visit(std::size_t v, std::size_t depth) {
    if (++expansions_ > budget_) {
      throw Error(ErrorCode::kPathSearchBudgetExceeded,
                  "simple-path enumeration exceeded " +
                      std::to_string(budget_) + " expansions");
    }
    if (is_sink_[v]) best_ = std::max(best_, depth);
    on_path_[v] = true;
    for (std::size_t u : succ_[v]) {
      if (!on_path_[u]) Visit(u, depth + 1);
    }
    on_path_[v] = false;
  }

  const std::vector<std::vector<std::size_t>>& succ_;
  const std::vector<bool>& is_sink_;
  std::vector<bool> on_path_;
  std::uint64_t budget_;
  std::uint64_t expansions_ = 0;
  std::size_t best_ = 0;
};

}  // namespace

std::size_t LongestSourceSinkPath(const ModelGraph& g, std::uint64_t budget) {
  const std::size_t n = g.blocks().size();
  std::vector<bool> is_source(n), is_sink(n);
  for (std::size_t v = 0; v < n; ++v) {
    is_source[v] = g.InEdges(v).empty();
    is_sink[v] = g.OutEdges(v).empty();
  }
  const auto succ = Successors(g);
  const auto topo = TopologicalOrder(succ);
  std::size_t best = 0;
  if (topo.size() == n) {
    // Acyclic: every maximal path runs from a source to a sink.
    std::vector<std::size_t> longest_to_sink(n, 0);
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
      std::size_t tail = 0;
      for (std::size_t u : succ[*it]) tail = std::max(tail, longest_to_sink[u]);
      longest_to_sink[*it] = tail + 1;
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (is_source[v]) best = std::max(best, longest_to_sink[v]);
    }
    return best;
  }
  SimplePathSearch search(succ, is_sink, budget);
  for (std::size_t v = 0; v < n; ++v) {
    if (is_source[v]) best = std::max(best, search.LongestFrom(v));
  }
  return best;
}

MetricsRecord ComputeMetrics(const ModelGraph& g, std::uint64_t budget) {
  MetricsRecord m;
  m.blk_count = g.blocks().size();
  const auto components = ConnectedComponents(g);
  m.n_subgraphs = components.size();
  for (const auto& c : components) {
    m.max_subgraph_size = std::max(m.max_subgraph_size, c.size());
  }
  m.max_src_sink_path = LongestSourceSinkPath(g, budget);
  return m;
}

std::string CsvField(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string MetricsCsvRow(std::string_view model, const MetricsRecord& m) {
  return CsvField(model) + "," + std::to_string(m.blk_count) + "," +
         std::to_string(m.n_subgraphs) + "," +
         std::to_string(m.max_subgraph_size) + "," +
         std::to_string(m.max_src_sink_path);
}

}  // namespace mdlfuzz
