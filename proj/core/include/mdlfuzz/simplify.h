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

// Corpus preprocessing: drop layout and default-configuration content, filter
// out models that are not flat, and rename blocks to compact names.

#ifndef MDLFUZZ_SIMPLIFY_H_
#define MDLFUZZ_SIMPLIFY_H_

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdlfuzz/syntax.h"

namespace mdlfuzz {

struct SimplifyPolicy {
  std::set<std::string> param_blocklist;    // case-sensitive keys
  std::set<std::string> section_blocklist;  // case-sensitive section names
  bool strip_comments = true;
  bool collapse_whitespace = true;

  // Layout keys (Position, ZOrder, Location, ...), model bookkeeping, and the
  // defaults/configuration/annotation sections found in tool-exported files.
  static SimplifyPolicy Defaults();

  // Reads `key = value` lines on top of Defaults(). Recognized keys:
  //   drop_params, keep_params, drop_sections, keep_sections  (comma lists)
  //   strip_comments, collapse_whitespace                     (true/false)
  // '#' starts a comment. Throws Error(kInvalidConfig) or Error(kIoError).
  static SimplifyPolicy FromConfigText(std::string_view text);
  static SimplifyPolicy FromConfigFile(const std::filesystem::path& path);

  void KeepParam(const std::string& key) { param_blocklist.erase(key); }
  void DropParam(const std::string& key) { param_blocklist.insert(key); }
};

struct SimplifyResult {
  SyntaxTree tree;
  // No Block sections survive; such models carried nothing but annotations
  // or settings and should be left out of a training corpus.
  bool empty_after_simplify = false;
};

SimplifyResult Simplify(const SyntaxTree& tree, const SimplifyPolicy& policy);

// Bijective base-26 names: 0 -> "a", 25 -> "z", 26 -> "aa", 702 -> "aaa".
std::string IndexToName(std::size_t index);

// Ordered original-name -> short-name pairs.
using RenameMap = std::vector<std::pair<std::string, std::string>>;

struct RenameResult {
  SyntaxTree tree;
  RenameMap map;
};

// Renames blocks following `order` (names absent from `order` follow in file
// order) and rewrites every SrcBlock/DstBlock reference, branches included.
// Throws Error(kDuplicateOriginalName) when `order` or the model repeats a
// block name.
RenameResult RenameIdentifiers(const SyntaxTree& tree,
                               const std::vector<std::string>& order);

struct FlatnessReport {
  bool flat = true;
  std::vector<std::string> reasons;  // one per offending block
};

// A model is flat with no dependencies when no block is a subsystem, model or
// library reference, or S-function, and no block carries a library link.
FlatnessReport CheckFlatNoDeps(const SyntaxTree& tree);

}  // namespace mdlfuzz

#endif  // MDLFUZZ_SIMPLIFY_H_
