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

// Temperature + nucleus (top-p) sampling over a pluggable next-token backend.
//
// Each step asks the backend for the distribution of the next token given the
// whole text so far, sharpens or flattens it with the temperature (p^(1/T),
// renormalized), keeps the smallest highest-probability prefix whose mass is
// strictly greater than the nucleus threshold, renormalizes, and draws one
// token. Generation stops when the end-of-text token is drawn or the token
// budget runs out.

#ifndef MDLFUZZ_SAMPLER_H_
#define MDLFUZZ_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mdlfuzz {

struct TokenProb {
  std::string token;
  double prob = 0.0;

  bool operator==(const TokenProb&) const = default;
};

struct TokenDistribution {
  std::vector<TokenProb> entries;

  double Total() const;
  // Divides by the total. Throws Error(kEmptyDistribution) if there is no
  // positive mass.
  void Normalize();

  bool operator==(const TokenDistribution&) const = default;
};

// Throws Error(kNonPositiveTemperature) unless temperature > 0.
TokenDistribution ApplyTemperature(const TokenDistribution& pmf,
                                   double temperature);

// Sorted by descending probability, ties by token. Throws
// Error(kInvalidNucleus) unless 0 < nucleus <= 1.
TokenDistribution NucleusFilter(const TokenDistribution& pmf, double nucleus);

// Bit-reproducible across platforms: mt19937_64 with a fixed 53-bit mapping
// to [0, 1) rather than std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double NextUnit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

// Multinomial draw. Throws Error(kEmptyDistribution).
const std::string& SampleToken(const TokenDistribution& pmf, Rng& rng);

struct SamplerConfig {
  std::string seed_text = "Model {";
  double temperature = 1.0;
  double nucleus = 0.9;
  std::size_t max_tokens = 4096;
  std::uint64_t rng_seed = 0;
  std::string eot_token = "<endoftext>";

  // Throws Error(kNonPositiveTemperature / kInvalidNucleus / kInvalidConfig).
  void Validate() const;
};

// Anything that can answer "what comes next after this text?".
class LanguageBackend {
 public:
  virtual ~LanguageBackend() = default;

  virtual TokenDistribution NextTokenDistribution(std::string_view context) = 0;

  // Inserted between the text so far and each appended token. Word-level
  // backends use " "; subword backends whose tokens carry their own
  // whitespace use "".
  virtual std::string_view TokenSeparator() const { return {}; }

  // True when NextTokenDistribution may be called from several threads.
  virtual bool ConcurrentSafe() const { return false; }
};

struct GenerationResult {
  std::string text;  // end-of-text token removed
  bool completed = false;
  std::size_t tokens_emitted = 0;

  bool operator==(const GenerationResult&) const = default;
};

// Throws BackendFailure (with the partial text) when the backend throws or
// returns an unusable distribution.
GenerationResult Generate(LanguageBackend& backend, const SamplerConfig& config);

}  // namespace mdlfuzz

#endif  // MDLFUZZ_SAMPLER_H_
