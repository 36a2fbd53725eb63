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

#ifndef MDLFUZZ_ERROR_H_
#define MDLFUZZ_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mdlfuzz {

// Every failure surfaced by the library carries one of these codes so callers
// (and the CLI's exit-code mapping) can dispatch without string matching.
enum class ErrorCode {
  // mdl syntax
  kEmptyInput,
  kUnbalancedBraces,
  kUnterminatedString,
  kUnterminatedVector,
  kUnrecognizedConstruct,
  kInvalidEncoding,
  // model graph
  kDanglingReference,
  kDuplicateBlockName,
  kMalformedElement,
  kPathSearchBudgetExceeded,
  // simplifier
  kDuplicateOriginalName,
  // canonicalizer
  kUnparsableSample,
  // sampler
  kNonPositiveTemperature,
  kInvalidNucleus,
  kEmptyDistribution,
  kEmptyCorpus,
  kBackendFailure,
  // fuzz harness
  kCommandNotFound,
  kSpawnFailure,
  kNotACrash,
  // pipeline / io
  kDirectoryNotFound,
  kIoError,
  kInvalidConfig,
  kStageFailure,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  // The message without the "<Code>: " prefix that what() carries.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

// Parse failures name the byte offset and 1-based line of the offending input.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t offset, int line,
             const std::string& detail);

  std::size_t offset() const noexcept { return offset_; }
  int line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t offset_;
  int line_;
  std::string detail_;
};

// A language backend failed mid-generation; the text produced so far is kept.
class BackendFailure : public Error {
 public:
  BackendFailure(const std::string& message, std::string partial_text);

  const std::string& partial_text() const noexcept { return partial_text_; }

 private:
  std::string partial_text_;
};

}  // namespace mdlfuzz

#endif  // MDLFUZZ_ERROR_H_
