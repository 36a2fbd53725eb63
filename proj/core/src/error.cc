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

#include "mdlfuzz/error.h"

#include <string>
#include <utility>

namespace mdlfuzz {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kUnbalancedBraces: return "UnbalancedBraces";
    case ErrorCode::kUnterminatedString: return "UnterminatedString";
    case ErrorCode::kUnterminatedVector: return "UnterminatedVector";
    case ErrorCode::kUnrecognizedConstruct: return "UnrecognizedConstruct";
    case ErrorCode::kInvalidEncoding: return "InvalidEncoding";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kDuplicateBlockName: return "DuplicateBlockName";
    case ErrorCode::kMalformedElement: return "MalformedElement";
    case ErrorCode::kPathSearchBudgetExceeded: return "PathSearchBudgetExceeded";
    case ErrorCode::kDuplicateOriginalName: return "DuplicateOriginalName";
    case ErrorCode::kUnparsableSample: return "UnparsableSample";
    case ErrorCode::kNonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::kInvalidNucleus: return "InvalidNucleus";
    case ErrorCode::kEmptyDistribution: return "EmptyDistribution";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kBackendFailure: return "BackendFailure";
    case ErrorCode::kCommandNotFound: return "CommandNotFound";
    case ErrorCode::kSpawnFailure: return "SpawnFailure";
    case ErrorCode::kNotACrash: return "NotACrash";
    case ErrorCode::kDirectoryNotFound: return "DirectoryNotFound";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kStageFailure: return "StageFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      message_(message) {}

ParseError::ParseError(ErrorCode code, std::size_t offset, int line,
                       const std::string& detail)
    : Error(code, detail + " at line " + std::to_string(line) + " (byte " +
                      std::to_string(offset) + ")"),
      offset_(offset),
      line_(line),
      detail_(detail) {}

BackendFailure::BackendFailure(const std::string& message,
                               std::string partial_text)
    : Error(ErrorCode::kBackendFailure, message),
      partial_text_(std::move(partial_text)) {}

}  // namespace mdlfuzz
