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

#include "mdlfuzz/sampler.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "mdlfuzz/error.h"

namespace mdlfuzz {

double TokenDistribution::Total() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.prob;
  return total;
}

void TokenDistribution::Normalize() {
  const double total = Total();
  if (entries.empty() || !(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::kEmptyDistribution, "distribution has no mass");
  }
  for (auto& e : entries) e.prob /= total;
}

TokenDistribution ApplyTemperature(const TokenDistribution& pmf,
                                   double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kNonPositiveTemperature,
                "temperature must be positive, got " +
                    std::to_string(temperature));
  }
  TokenDistribution out = pmf;
  if (temperature == 1.0) {
    out.Normalize();
    return out;
  }
  // p^(1/T) in the log domain so that tiny T does not underflow every entry.
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& e : pmf.entries) {
    if (e.prob > 0.0) max_log = std::max(max_log, std::log(e.prob) / temperature);
  }
  for (auto& e : out.entries) {
    e.prob = e.prob > 0.0 ? std::exp(std::log(e.prob) / temperature - max_log)
                          : 0.0;
  }
  out.Normalize();
  return out;
}

TokenDistribution NucleusFilter(const TokenDistribution& pmf, double nucleus) {
  if (!(nucleus > 0.0 && nucleus <= 1.0)) {
    throw Error(ErrorCode::kInvalidNucleus,
                "nucleus must be in (0, 1], got " + std::to_string(nucleus));
  }
  TokenDistribution sorted = pmf;
  std::sort(sorted.entries.begin(), sorted.entries.end(),
            [](const TokenProb& a, const TokenProb& b) {
              if (a.prob != b.prob) return a.prob > b.prob;
              return a.token < b.token;
            });
  double cumulative = 0.0;
  std::size_t keep = sorted.entries.size();
  for (std::size_t i = 0; i < sorted.entries.size(); ++i) {
    cumulative += sorted.entries[i].prob;
    if (cumulative > nucleus) {
      keep = i + 1;
      break;
    }
  }
  sorted.entries.resize(keep);
  sorted.Normalize();
  return sorted;
}

const std::string& SampleToken(const TokenDistribution& pmf, Rng& rng) {
  const double total = pmf.Total();
  if (pmf.entries.empty() || !(total > 0.0)) {
    throw Error(ErrorCode::kEmptyDistribution, "cannot sample from no mass");
  }
  const double target = rng.NextUnit() * total;
  double cumulative = 0.0;
  const TokenProb* last_positive = nullptr;
  for (const auto& e : pmf.entries) {
    if (e.prob <= 0.0) continue;
    cumulative += e.prob;
    last_positive = &e;
    if (cumulative > target) return e.token;
  }
  return last_positive->token;  // rounding left target just past the sum
}

void SamplerConfig::Validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kNonPositiveTemperature, "temperature must be > 0");
  }
  if (!(nucleus > 0.0 && nucleus <= 1.0)) {
    throw Error(ErrorCode::kInvalidNucleus, "nucleus must be in (0, 1]");
  }
  if (max_tokens < 1) {
    throw Error(ErrorCode::kInvalidConfig, "max_tokens must be >= 1");
  }
  if (eot_token.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "eot_token must not be empty");
  }
}

GenerationResult Generate(LanguageBackend& backend, const SamplerConfig& config) {
  config.Validate();
  Rng rng(config.rng_seed);
  const std::string separator(backend.TokenSeparator());
  GenerationResult result;
  result.text = config.seed_text;
  while (result.tokens_emitted < config.max_tokens) {
    TokenDistribution pmf;
    try {
      pmf = backend.NextTokenDistribution(result.text);
      pmf = NucleusFilter(ApplyTemperature(pmf, config.temperature),
                          config.nucleus);
    } catch (const BackendFailure& e) {
      throw BackendFailure(e.message(), result.text);
    } catch (const std::exception& e) {
      throw BackendFailure(std::string("backend query failed: ") + e.what(),
                           result.text);
    }
    const std::string& token = SampleToken(pmf, rng);
    if (token == config.eot_token) {
      result.completed = true;
      return result;
    }
    const std::size_t before = result.text.size();
    result.text += separator;
    result.text += token;
    ++result.tokens_emitted;
    // Subword backends may spell the terminator across several tokens.
    const std::size_t scan_from =
        before >= config.eot_token.size() ? before - config.eot_token.size() : 0;
    const std::size_t eot = result.text.find(config.eot_token, scan_from);
    if (eot != std::string::npos) {
      result.text.resize(eot);
      while (!result.text.empty() && result.text.size() > config.seed_text.size() &&
             separator.size() > 0 && result.text.ends_with(separator)) {
        result.text.resize(result.text.size() - separator.size());
      }
      result.completed = true;
      return result;
    }
  }
  return result;
}

}  // namespace mdlfuzz
