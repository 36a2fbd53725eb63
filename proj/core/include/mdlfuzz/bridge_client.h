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

// Client for an external language-model server speaking line-delimited JSON
// over the server process's stdin/stdout:
//
//   request:  {"id": <int>, "context": "<string>", "top_k": <int>}
//   response: {"id": <int>, "tokens": ["<t1>", ...], "probs": [<p1>, ...]}
//
// One object per line, UTF-8. A response must echo the id, carry equally long
// token/prob arrays of at most top_k entries, and its probs must sum to 1
// within 1e-6. Anything else (including {"id": ..., "error": "..."}) is a
// BackendFailure.

#ifndef MDLFUZZ_BRIDGE_CLIENT_H_
#define MDLFUZZ_BRIDGE_CLIENT_H_

#include <chrono>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "mdlfuzz/sampler.h"
#include "mdlfuzz/subprocess.h"

namespace mdlfuzz {

inline constexpr int kDefaultBridgeTopK = 1000;
inline constexpr double kBridgeProbTolerance = 1e-6;

std::string EncodeBridgeRequest(std::int64_t id, std::string_view context,
                                int top_k);

// Throws BackendFailure on any protocol violation.
TokenDistribution DecodeBridgeResponse(std::string_view line,
                                       std::int64_t expected_id, int top_k);

class BridgeClient : public LanguageBackend {
 public:
  // Starts the server; `argv` is executed directly (no shell).
  explicit BridgeClient(std::vector<std::string> argv,
                        int top_k = kDefaultBridgeTopK,
                        std::chrono::milliseconds timeout = std::chrono::seconds(120));

  // Closes the server's stdin and gives it a moment to exit cleanly.
  ~BridgeClient() override;

  TokenDistribution NextTokenDistribution(std::string_view context) override;

  // Requests are serialized per connection, so sharing one client between
  // threads is safe but does not parallelize.
  bool ConcurrentSafe() const override { return true; }

 private:
  std::mutex mu_;
  ChildProcess server_;
  int top_k_;
  std::chrono::milliseconds timeout_;
  std::int64_t next_id_ = 1;
};

}  // namespace mdlfuzz

#endif  // MDLFUZZ_BRIDGE_CLIENT_H_
