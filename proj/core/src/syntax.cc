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

#include "mdlfuzz/syntax.h"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mdlfuzz/error.h"

namespace mdlfuzz {
namespace {

constexpr int kMaxNesting = 256;
constexpr std::string_view kReplacementChar = "\xEF\xBF\xBD";

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool IsBrace(char c) { return c == '{' || c == '}'; }

// Length of the valid UTF-8 sequence starting at `i`, or 0 if invalid.
std::size_t Utf8SequenceLength(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return 1;
  std::size_t len = 0;
  unsigned min_cp = 0;
  unsigned cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, min_cp = 0x80, cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, min_cp = 0x800, cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, min_cp = 0x10000, cp = b0 & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

std::optional<std::size_t> FirstInvalidUtf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const std::size_t len = Utf8SequenceLength(s, i);
    if (len == 0) return i;
    i += len;
  }
  return std::nullopt;
}

int LineOf(std::string_view s, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < s.size(); ++i) {
    if (s[i] == '\n') ++line;
  }
  return line;
}

enum class LexKind { kWord, kQuoted, kVector, kLBrace, kRBrace, kComment, kEnd };

struct Lexeme {
  LexKind kind = LexKind::kEnd;
  std::string_view text;
  std::size_t offset = 0;
  int line = 1;
  bool starts_line = false;  // nothing but whitespace precedes it on its line
};

// Pull lexer. Lexing is lazy so that garbage after the root section (sampled
// text often trails off) never gets a chance to raise an error.
class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  const Lexeme& Peek() {
    if (!peeked_) {
      peeked_ = Scan();
    }
    return *peeked_;
  }

  Lexeme Next() {
    Peek();
    Lexeme out = *peeked_;
    peeked_.reset();
    return out;
  }

  std::size_t size() const { return text_.size(); }
  int line() const { return line_; }

 private:
  Lexeme Scan() {
    bool starts_line = pos_ == 0;
    while (pos_ < text_.size() && IsSpace(text_[pos_])) {
      if (text_[pos_] == '\n') {
        ++line_;
        starts_line = true;
      }
      ++pos_;
    }
    Lexeme lx;
    lx.offset = pos_;
    lx.line = line_;
    lx.starts_line = starts_line;
    if (pos_ >= text_.size()) {
      lx.kind = LexKind::kEnd;
      return lx;
    }
    const char c = text_[pos_];
    std::size_t end = pos_ + 1;
    if (c == '{') {
      lx.kind = LexKind::kLBrace;
    } else if (c == '}') {
      lx.kind = LexKind::kRBrace;
    } else if (c == '"') {
      lx.kind = LexKind::kQuoted;
      end = ScanString(pos_);
    } else if (c == '[') {
      lx.kind = LexKind::kVector;
      end = ScanVector(pos_);
    } else if (c == '#' && starts_line) {
      lx.kind = LexKind::kComment;
      end = pos_;
      while (end < text_.size() && text_[end] != '\n') ++end;
      while (end > pos_ && IsSpace(text_[end - 1])) --end;
    } else {
      lx.kind = LexKind::kWord;
      while (end < text_.size() && !IsSpace(text_[end]) && !IsBrace(text_[end]))
        ++end;
    }
    lx.text = text_.substr(pos_, end - pos_);
    pos_ = end;
    return lx;
  }

  // Returns one past the closing quote.
  std::size_t ScanString(std::size_t open) const {
    std::size_t i = open + 1;
    while (i < text_.size()) {
      const char c = text_[i];
      if (c == '\n') break;
      if (c == '\\' && i + 1 < text_.size() && text_[i + 1] != '\n') {
        i += 2;
        continue;
      }
      if (c == '"') {
        if (i + 1 < text_.size() && text_[i + 1] == '"') {
          i += 2;
          continue;
        }
        return i + 1;
      }
      ++i;
    }
    throw ParseError(ErrorCode::kUnterminatedString, open, LineOf(text_, open),
                     "unterminated string");
  }

  // Returns one past the matching ']'; vectors may span lines.
  std::size_t ScanVector(std::size_t open) {
    int depth = 0;
    std::size_t i = open;
    while (i < text_.size()) {
      const char c = text_[i];
      if (c == '"') {
        i = ScanString(i);
        continue;
      }
      if (c == '[') ++depth;
      if (c == ']' && --depth == 0) {
        for (std::size_t k = open; k < i; ++k) {
          if (text_[k] == '\n') ++line_;
        }
        return i + 1;
      }
      ++i;
    }
    throw ParseError(ErrorCode::kUnterminatedVector, open, LineOf(text_, open),
                     "unterminated vector literal");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::optional<Lexeme> peeked_;
};

bool IsValueLexeme(LexKind kind) {
  return kind == LexKind::kWord || kind == LexKind::kQuoted ||
         kind == LexKind::kVector;
}

ParamValue::Kind ValueKindOf(LexKind kind) {
  switch (kind) {
    case LexKind::kQuoted: return ParamValue::Kind::kQuoted;
    case LexKind::kVector: return ParamValue::Kind::kVector;
    default: return ParamValue::Kind::kBare;
  }
}

class Parser {
 public:
  Parser(std::string_view text, ParseMode mode,
         std::vector<Diagnostic>* diagnostics)
      : lexer_(text), mode_(mode), diagnostics_(diagnostics) {}

  SyntaxTree Run() {
    SyntaxTree tree;
    FindRoot(tree.root);
    ParseBody(tree.root, 0);
    CheckTrailing();
    return tree;
  }

 private:
  bool strict() const { return mode_ == ParseMode::kStrict; }

  void Note(const Lexeme& at, std::string message) {
    if (diagnostics_ != nullptr) {
      diagnostics_->push_back({at.offset, at.line, std::move(message)});
    }
  }

  [[noreturn]] void Fail(ErrorCode code, const Lexeme& at,
                         const std::string& detail) {
    throw ParseError(code, at.offset, at.line, detail);
  }

  void FindRoot(Section& root) {
    bool saw_anything = false;
    for (;;) {
      Lexeme lx = lexer_.Next();
      if (lx.kind == LexKind::kEnd) {
        if (!saw_anything) Fail(ErrorCode::kEmptyInput, lx, "empty input");
        Fail(ErrorCode::kUnrecognizedConstruct, lx, "no root section found");
      }
      if (lx.kind == LexKind::kComment) continue;
      saw_anything = true;
      if (lx.kind == LexKind::kWord &&
          lexer_.Peek().kind == LexKind::kLBrace) {
        lexer_.Next();
        root.name = std::string(lx.text);
        if (root.name != "Model") {
          if (strict()) {
            Fail(ErrorCode::kUnrecognizedConstruct, lx,
                 "root section must be 'Model', found '" + root.name + "'");
          }
          Note(lx, "non-standard root section '" + root.name + "'");
        }
        return;
      }
      if (strict()) {
        Fail(lx.kind == LexKind::kRBrace || lx.kind == LexKind::kLBrace
                 ? ErrorCode::kUnbalancedBraces
                 : ErrorCode::kUnrecognizedConstruct,
             lx, "expected root section, found '" + std::string(lx.text) + "'");
      }
      Note(lx, "skipped '" + std::string(lx.text) + "' before root section");
    }
  }

  void ParseBody(Section& section, int depth) {
    const int open_line = lexer_.line();
    if (depth > kMaxNesting) {
      Fail(ErrorCode::kUnrecognizedConstruct, lexer_.Peek(),
           "sections nested deeper than " + std::to_string(kMaxNesting));
    }
    for (;;) {
      Lexeme lx = lexer_.Next();
      switch (lx.kind) {
        case LexKind::kEnd:
          throw ParseError(ErrorCode::kUnbalancedBraces, lexer_.size(),
                           lexer_.line(),
                           "missing '}' for section '" + section.name +
                               "' opened at line " + std::to_string(open_line));
        case LexKind::kRBrace:
          return;
        case LexKind::kComment:
          section.comments.emplace_back(lx.text);
          break;
        case LexKind::kWord:
          ParseItem(section, lx, depth);
          break;
        case LexKind::kLBrace: {
          if (strict()) {
            Fail(ErrorCode::kUnbalancedBraces, lx, "'{' without section name");
          }
          Note(lx, "skipped anonymous '{ ... }' group");
          Section discarded;
          ParseBody(discarded, depth + 1);
          break;
        }
        case LexKind::kQuoted:
        case LexKind::kVector:
          if (strict()) {
            Fail(ErrorCode::kUnrecognizedConstruct, lx,
                 "value '" + std::string(lx.text) + "' without a key");
          }
          Note(lx, "skipped value without key");
          break;
      }
    }
  }

  void ParseItem(Section& section, const Lexeme& key, int depth) {
    const Lexeme& next = lexer_.Peek();
    if (next.kind == LexKind::kLBrace) {
      lexer_.Next();
      Section child;
      child.name = std::string(key.text);
      ParseBody(child, depth + 1);
      section.children.push_back(std::move(child));
      return;
    }
    if (!IsValueLexeme(next.kind)) {
      if (strict()) {
        Fail(ErrorCode::kUnrecognizedConstruct, key,
             "parameter '" + std::string(key.text) + "' has no value");
      }
      Note(key, "dropped parameter '" + std::string(key.text) +
                    "' without value");
      return;
    }
    Lexeme value = lexer_.Next();
    std::string lexeme(value.text);
    if (value.kind == LexKind::kQuoted) {
      while (lexer_.Peek().kind == LexKind::kQuoted) {
        Lexeme piece = lexer_.Next();
        if (piece.starts_line) {
          if (strict()) {
            Fail(ErrorCode::kUnrecognizedConstruct, piece,
                 "string continuation on a new line");
          }
          Note(piece, "joined multi-line string continuation");
        }
        lexeme += ' ';
        lexeme += piece.text;
      }
    }
    section.params.push_back(
        {std::string(key.text),
         ParamValue::FromLexeme(ValueKindOf(value.kind), std::move(lexeme))});
  }

  void CheckTrailing() {
    for (;;) {
      const Lexeme& lx = lexer_.Peek();
      if (lx.kind == LexKind::kEnd) return;
      if (lx.kind == LexKind::kComment) {
        lexer_.Next();
        continue;
      }
      if (strict()) {
        Fail(lx.kind == LexKind::kRBrace ? ErrorCode::kUnbalancedBraces
                                         : ErrorCode::kUnrecognizedConstruct,
             lx, "unexpected content after root section");
      }
      Note(lx, "ignored content after root section");
      return;
    }
  }

  Lexer lexer_;
  ParseMode mode_;
  std::vector<Diagnostic>* diagnostics_;
};

void AppendUnescaped(std::string_view piece, std::string& out) {
  // `piece` includes its surrounding quotes.
  for (std::size_t i = 1; i + 1 < piece.size(); ++i) {
    const char c = piece[i];
    if (c == '\\' && i + 2 < piece.size()) {
      const char e = piece[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '\\': out += '\\'; break;
        case '"': out += '"'; break;
        default:
          out += '\\';
          out += e;
      }
    } else if (c == '"' && i + 2 < piece.size() && piece[i + 1] == '"') {
      out += '"';
      ++i;
    } else {
      out += c;
    }
  }
}

void Indent(std::string& out, int depth) { out.append(2 * depth, ' '); }

void PrintInto(const Section& section, int depth, std::string& out) {
  Indent(out, depth);
  out += section.name;
  out += " {\n";
  for (const auto& comment : section.comments) {
    Indent(out, depth + 1);
    out += comment;
    out += '\n';
  }
  for (const auto& param : section.params) {
    Indent(out, depth + 1);
    out += param.key;
    out += ' ';
    out += param.value.lexeme();
    out += '\n';
  }
  for (const auto& child : section.children) PrintInto(child, depth + 1, out);
  Indent(out, depth);
  out += "}\n";
}

}  // namespace

ParamValue ParamValue::Bare(std::string word) {
  return ParamValue(Kind::kBare, std::move(word));
}

ParamValue ParamValue::Quoted(std::string_view text) {
  std::string lexeme = "\"";
  for (char c : text) {
    switch (c) {
      case '\\': lexeme += "\\\\"; break;
      case '"': lexeme += "\\\""; break;
      case '\n': lexeme += "\\n"; break;
      case '\t': lexeme += "\\t"; break;
      case '\r': lexeme += "\\r"; break;
      default: lexeme += c;
    }
  }
  lexeme += '"';
  return ParamValue(Kind::kQuoted, std::move(lexeme));
}

ParamValue ParamValue::Vector(std::string lexeme) {
  return ParamValue(Kind::kVector, std::move(lexeme));
}

ParamValue ParamValue::FromLexeme(Kind kind, std::string lexeme) {
  return ParamValue(kind, std::move(lexeme));
}

std::string ParamValue::Text() const {
  if (kind_ != Kind::kQuoted) return lexeme_;
  std::string out;
  std::size_t i = 0;
  while (i < lexeme_.size()) {
    if (lexeme_[i] != '"') {
      ++i;
      continue;
    }
    // Find the end of this piece with the same rules the lexer uses.
    std::size_t j = i + 1;
    while (j < lexeme_.size()) {
      if (lexeme_[j] == '\\' && j + 1 < lexeme_.size()) {
        j += 2;
      } else if (lexeme_[j] == '"') {
        if (j + 1 < lexeme_.size() && lexeme_[j + 1] == '"') {
          j += 2;
        } else {
          break;
        }
      } else {
        ++j;
      }
    }
    const std::size_t end = j < lexeme_.size() ? j + 1 : lexeme_.size();
    AppendUnescaped(std::string_view(lexeme_).substr(i, end - i), out);
    i = end;
  }
  return out;
}

const Param* Section::FindParam(std::string_view key) const {
  for (const auto& p : params) {
    if (p.key == key) return &p;
  }
  return nullptr;
}

Param* Section::FindParam(std::string_view key) {
  for (auto& p : params) {
    if (p.key == key) return &p;
  }
  return nullptr;
}

const Section* Section::FindChild(std::string_view child_name) const {
  for (const auto& c : children) {
    if (c.name == child_name) return &c;
  }
  return nullptr;
}

Section* Section::FindChild(std::string_view child_name) {
  for (auto& c : children) {
    if (c.name == child_name) return &c;
  }
  return nullptr;
}

SyntaxTree Parse(std::string_view text, ParseMode mode,
                 std::vector<Diagnostic>* diagnostics) {
  if (auto bad = FirstInvalidUtf8(text)) {
    if (mode == ParseMode::kStrict) {
      throw ParseError(ErrorCode::kInvalidEncoding, *bad, LineOf(text, *bad),
                       "invalid UTF-8 byte");
    }
    std::string sanitized;
    sanitized.reserve(text.size() + 16);
    std::size_t replaced = 0;
    for (std::size_t i = 0; i < text.size();) {
      const std::size_t len = Utf8SequenceLength(text, i);
      if (len == 0) {
        sanitized += kReplacementChar;
        ++replaced;
        ++i;
      } else {
        sanitized.append(text.substr(i, len));
        i += len;
      }
    }
    if (diagnostics != nullptr) {
      diagnostics->push_back(
          {*bad, LineOf(text, *bad),
           "replaced " + std::to_string(replaced) +
               " non-UTF-8 byte(s) with U+FFFD"});
    }
    return Parser(sanitized, mode, diagnostics).Run();
  }
  return Parser(text, mode, diagnostics).Run();
}

std::string PrintSection(const Section& section, int depth) {
  std::string out;
  PrintInto(section, depth, out);
  return out;
}

std::string Print(const SyntaxTree& tree) { return PrintSection(tree.root, 0); }

TokenSeq Tokenize(std::string_view text) {
  TokenSeq tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (IsSpace(text[i])) {
      ++i;
    } else if (IsBrace(text[i])) {
      tokens.emplace_back(1, text[i]);
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !IsSpace(text[j]) && !IsBrace(text[j])) ++j;
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
    }
  }
  return tokens;
}

std::string JoinTokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

bool IsValidIdentifier(std::string_view key) {
  if (key.empty()) return false;
  if (key.front() == '"' || key.front() == '[' || key.front() == '#') {
    return false;
  }
  for (char c : key) {
    if (IsSpace(c) || IsBrace(c)) return false;
  }
  return true;
}

}  // namespace mdlfuzz
