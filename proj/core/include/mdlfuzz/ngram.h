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

// Word-level n-gram language model with stupid-backoff scoring. It is the
// self-contained backend for the sampler: small, deterministic, and trainable
// in seconds on a canonicalized corpus.

#ifndef MDLFUZZ_NGRAM_H_
#define MDLFUZZ_NGRAM_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mdlfuzz/sampler.h"
#include "mdlfuzz/syntax.h"

namespace mdlfuzz {

class NGramModel {
 public:
  static constexpr double kDefaultBackoff = 0.4;

  // Counts every n-gram of length 1..order; each document is terminated by
  // `eot_token`. Throws Error(kEmptyCorpus) for an empty corpus and
  // Error(kInvalidConfig) for order < 1.
  static NGramModel Train(const std::vector<TokenSeq>& corpus, int order,
                          std::string eot_token = "<endoftext>",
                          double backoff = kDefaultBackoff);

  // Stupid backoff: the successors of the longest suffix of `context` (at
  // most order-1 tokens) seen in training score count/total, scaled by the
  // backoff factor once per shorter order tried; the empty suffix gives
  // unigram frequencies. Tokens that never followed that suffix score 0. The
  // scores are normalized.
  TokenDistribution NextDistribution(const TokenSeq& context) const;

  int order() const { return order_; }
  double backoff() const { return backoff_; }
  const std::string& eot_token() const { return eot_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  // Occurrences of `ngram` (length 1..order) in the training data; 0 if the
  // n-gram or one of its tokens was never seen.
  std::uint64_t Count(const TokenSeq& ngram) const;

  std::string ToJson() const;
  static NGramModel FromJson(std::string_view json);  // throws kInvalidConfig
  void Save(const std::filesystem::path& path) const;  // throws kIoError
  static NGramModel Load(const std::filesystem::path& path);

 private:
  using Context = std::vector<std::uint32_t>;
  struct Successors {
    std::map<std::uint32_t, std::uint64_t> counts;
    std::uint64_t total = 0;
  };

  std::uint32_t Intern(const std::string& token);
  const Successors* Find(const Context& context) const;

  int order_ = 1;
  double backoff_ = kDefaultBackoff;
  std::string eot_ = "<endoftext>";
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::map<Context, Successors> tables_;  // context length 0..order-1
};

// Adapts a trained model to the sampler. Only the last order-1 tokens of the
// context are tokenized, so a query costs the same at any text length.
class NGramBackend : public LanguageBackend {
 public:
  explicit NGramBackend(const NGramModel& model) : model_(model) {}

  TokenDistribution NextTokenDistribution(std::string_view context) override;
  std::string_view TokenSeparator() const override { return " "; }
  bool ConcurrentSafe() const override { return true; }

 private:
  const NGramModel& model_;
};

// The last `count` tokens of `text` under Tokenize() rules.
TokenSeq LastTokens(std::string_view text, std::size_t count);

}  // namespace mdlfuzz

#endif  // MDLFUZZ_NGRAM_H_
