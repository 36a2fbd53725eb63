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

// Breadth-first rewrite of a model into interleaved block/edge order, and the
// inverse restoration into the blocks-before-lines order the tool expects.
//
// Traversal: sources (in-degree 0) in file order are preferred as BFS roots;
// once they are exhausted, the remaining unvisited blocks seed further
// traversals in file order, which covers dangling blocks and source-less
// cyclic models. Visiting a block emits it, then every not-yet-emitted
// incident edge (outgoing edges first, then incoming, each in file order),
// then enqueues the other endpoint of each of those incident edges.

#ifndef MDLFUZZ_CANONICAL_H_
#define MDLFUZZ_CANONICAL_H_

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mdlfuzz/graph.h"
#include "mdlfuzz/syntax.h"

namespace mdlfuzz {

using CanonicalElement = std::variant<BlockNode, PortEdge>;

struct CanonicalDoc {
  std::vector<CanonicalElement> elements;

  // Block names in emission order.
  std::vector<std::string> BlockOrder() const;

  bool operator==(const CanonicalDoc&) const = default;
};

CanonicalDoc BfsRestructure(const ModelGraph& g);

// `Model { System { ... } }` with one Block or Line section per element, in
// element order. Each edge becomes its own Line (branches are not re-merged).
SyntaxTree CanonicalTree(const CanonicalDoc& doc);
std::string EmitCanonical(const CanonicalDoc& doc);

// Reads the diagram children back in file order without reordering or
// validating references; inverse of CanonicalTree.
CanonicalDoc ReadCanonical(const SyntaxTree& tree);

// Moves every Line after all other children, in every section, keeping the
// relative order of blocks and of lines. Idempotent.
SyntaxTree Restore(const SyntaxTree& tree);
SyntaxTree Restore(const CanonicalDoc& doc);
// Parses leniently first; throws Error(kUnparsableSample) if even that fails.
SyntaxTree Restore(std::string_view text,
                   std::vector<Diagnostic>* diagnostics = nullptr);

}  // namespace mdlfuzz

#endif  // MDLFUZZ_CANONICAL_H_
