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

// Reader and writer for the MDL structured-ASCII model file format.
//
// The grammar handled here is deliberately small:
//
//   file      := section
//   section   := NAME '{' item* '}'
//   item      := section | param | comment
//   param     := KEY value ('"..."')*        (adjacent strings concatenate)
//   value     := bare-word | "quoted string" | [vector literal]
//   comment   := '#' ... end-of-line          (only at statement position)
//
// Whitespace, including newlines, separates lexemes but is otherwise not
// significant, so a model that was flattened to a single line of tokens (as a
// language model emits it) parses to the same tree as the pretty-printed file.
// Quoted strings accept backslash escapes and a doubled "" as an escaped quote.

#ifndef MDLFUZZ_SYNTAX_H_
#define MDLFUZZ_SYNTAX_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mdlfuzz {

enum class ParseMode { kStrict, kLenient };

// A parameter value, stored as its source lexeme so printing is byte-exact.
class ParamValue {
 public:
  enum class Kind { kBare, kQuoted, kVector };

  ParamValue() = default;

  static ParamValue Bare(std::string word);
  // Builds a quoted lexeme from unescaped text.
  static ParamValue Quoted(std::string_view text);
  static ParamValue Vector(std::string lexeme);
  // Wraps an already-lexed lexeme of the given kind.
  static ParamValue FromLexeme(Kind kind, std::string lexeme);

  Kind kind() const { return kind_; }
  const std::string& lexeme() const { return lexeme_; }

  // Unescaped content for quoted values (adjacent pieces concatenated); the
  // lexeme itself for bare words and vectors.
  std::string Text() const;

  bool operator==(const ParamValue&) const = default;

 private:
  ParamValue(Kind kind, std::string lexeme)
      : kind_(kind), lexeme_(std::move(lexeme)) {}

  Kind kind_ = Kind::kBare;
  std::string lexeme_;
};

struct Param {
  std::string key;
  ParamValue value;

  bool operator==(const Param&) const = default;
};

struct Section {
  std::string name;
  std::vector<std::string> comments;  // "# ..." lines, printed first
  std::vector<Param> params;
  std::vector<Section> children;

  // First param with this key (keys are case-sensitive), or nullptr.
  const Param* FindParam(std::string_view key) const;
  Param* FindParam(std::string_view key);
  const Section* FindChild(std::string_view child_name) const;
  Section* FindChild(std::string_view child_name);

  bool operator==(const Section&) const = default;
};

struct SyntaxTree {
  Section root;

  bool operator==(const SyntaxTree&) const = default;
};

// A non-fatal irregularity tolerated by lenient parsing.
struct Diagnostic {
  std::size_t offset = 0;
  int line = 0;
  std::string message;
};

// Throws ParseError. Lenient mode skips constructs outside the grammar and
// reports them through `diagnostics` (when non-null); strict mode rejects them.
SyntaxTree Parse(std::string_view text, ParseMode mode = ParseMode::kStrict,
                 std::vector<Diagnostic>* diagnostics = nullptr);

// Printer normal form: one item per line, two spaces of indent per depth,
// comments then params then child sections, trailing newline.
std::string Print(const SyntaxTree& tree);
std::string PrintSection(const Section& section, int depth = 0);

using TokenSeq = std::vector<std::string>;

// Maximal runs of non-whitespace; '{' and '}' are always tokens of their own.
TokenSeq Tokenize(std::string_view text);
std::string JoinTokens(const TokenSeq& tokens);

// True when `key` can be printed as a key or section name and read back.
bool IsValidIdentifier(std::string_view key);

}  // namespace mdlfuzz

#endif  // MDLFUZZ_SYNTAX_H_
