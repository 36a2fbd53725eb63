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

#include "mdlfuzz/canonical.h"

#include <algorithm>
#include <cstddef>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "mdlfuzz/error.h"

namespace mdlfuzz {
namespace {

Section BlockSection(const BlockNode& block) {
  Section s;
  s.name = "Block";
  s.params = block.params;
  if (s.FindParam("Name") == nullptr) {
    s.params.insert(s.params.begin(), {"Name", ParamValue::Quoted(block.name)});
  }
  if (s.FindParam("BlockType") == nullptr && !block.block_type.empty()) {
    s.params.insert(s.params.begin(),
                    {"BlockType", ParamValue::Bare(block.block_type)});
  }
  s.children = block.sections;
  return s;
}

Section LineSection(const PortEdge& edge) {
  Section s;
  s.name = "Line";
  s.params.push_back({"SrcBlock", ParamValue::Quoted(edge.src.block)});
  s.params.push_back({"SrcPort", ParamValue::Bare(std::to_string(edge.src.port))});
  s.params.push_back({"DstBlock", ParamValue::Quoted(edge.dst.block)});
  s.params.push_back({"DstPort", ParamValue::Bare(std::to_string(edge.dst.port))});
  s.params.insert(s.params.end(), edge.attrs.begin(), edge.attrs.end());
  return s;
}

void MoveLinesLast(Section& section) {
  std::stable_partition(section.children.begin(), section.children.end(),
                        [](const Section& c) { return c.name != "Line"; });
  for (auto& child : section.children) MoveLinesLast(child);
}

}  // namespace

std::vector<std::string> CanonicalDoc::BlockOrder() const {
  std::vector<std::string> order;
  for (const auto& element : elements) {
    if (const auto* block = std::get_if<BlockNode>(&element)) {
      order.push_back(block->name);
    }
  }
  return order;
}

CanonicalDoc BfsRestructure(const ModelGraph& g) {
  const std::size_t n = g.blocks().size();
  std::deque<std::size_t> sources;  // S
  std::deque<std::size_t> others;   // B
  for (std::size_t v = 0; v < n; ++v) {
    (g.InEdges(v).empty() ? sources : others).push_back(v);
  }

  CanonicalDoc doc;
  std::vector<bool> block_done(n, false);
  std::vector<bool> edge_done(g.edges().size(), false);
  std::vector<std::size_t> incident;

  // Visited blocks stay in S/B and are skipped when popped, which is
  // equivalent to removing them on visit.
  while (!sources.empty() || !others.empty()) {
    std::deque<std::size_t>& pick = sources.empty() ? others : sources;
    std::deque<std::size_t> queue{pick.front()};
    pick.pop_front();
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      if (block_done[cur]) continue;
      block_done[cur] = true;
      doc.elements.emplace_back(g.blocks()[cur]);

      incident.assign(g.OutEdges(cur).begin(), g.OutEdges(cur).end());
      incident.insert(incident.end(), g.InEdges(cur).begin(),
                      g.InEdges(cur).end());
      for (std::size_t e : incident) {
        if (!edge_done[e]) {
          edge_done[e] = true;
          doc.elements.emplace_back(g.edges()[e]);
        }
      }
      for (std::size_t e : incident) {
        const std::size_t other =
            g.EdgeSource(e) == cur ? g.EdgeTarget(e) : g.EdgeSource(e);
        if (!block_done[other]) queue.push_back(other);
      }
    }
  }
  return doc;
}

SyntaxTree CanonicalTree(const CanonicalDoc& doc) {
  SyntaxTree tree;
  tree.root.name = "Model";
  Section system;
  system.name = "System";
  system.children.reserve(doc.elements.size());
  for (const auto& element : doc.elements) {
    if (const auto* block = std::get_if<BlockNode>(&element)) {
      system.children.push_back(BlockSection(*block));
    } else {
      system.children.push_back(LineSection(std::get<PortEdge>(element)));
    }
  }
  tree.root.children.push_back(std::move(system));
  return tree;
}

std::string EmitCanonical(const CanonicalDoc& doc) {
  return Print(CanonicalTree(doc));
}

CanonicalDoc ReadCanonical(const SyntaxTree& tree) {
  CanonicalDoc doc;
  for (const auto& child : DiagramSection(tree).children) {
    if (child.name == "Block") {
      doc.elements.emplace_back(ReadBlock(child));
    } else if (child.name == "Line") {
      for (auto& edge : ReadLine(child)) doc.elements.emplace_back(std::move(edge));
    }
  }
  return doc;
}

SyntaxTree Restore(const SyntaxTree& tree) {
  SyntaxTree restored = tree;
  MoveLinesLast(restored.root);
  return restored;
}

SyntaxTree Restore(const CanonicalDoc& doc) { return Restore(CanonicalTree(doc)); }

SyntaxTree Restore(std::string_view text, std::vector<Diagnostic>* diagnostics) {
  SyntaxTree parsed;
  try {
    parsed = Parse(text, ParseMode::kLenient, diagnostics);
  } catch (const ParseError& e) {
    throw Error(ErrorCode::kUnparsableSample, e.what());
  }
  MoveLinesLast(parsed.root);
  return parsed;
}

}  // namespace mdlfuzz
