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

#include "mdlfuzz/bridge_client.h"

#include <signal.h>

#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "json.hpp"
#include "mdlfuzz/error.h"

namespace mdlfuzz {

std::string EncodeBridgeRequest(std::int64_t id, std::string_view context,
                                int top_k) {
  nlohmann::json request = {
      {"id", id}, {"context", std::string(context)}, {"top_k", top_k}};
  // Invalid UTF-8 in the context is replaced rather than aborting the dump.
  return request.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

TokenDistribution DecodeBridgeResponse(std::string_view line,
                                       std::int64_t expected_id, int top_k) {
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw BackendFailure(std::string("bridge sent malformed JSON: ") + e.what(),
                         "");
  }
  if (!response.is_object() || !response.contains("id") ||
      !response["id"].is_number_integer()) {
    throw BackendFailure("bridge response without integer id", "");
  }
  if (response["id"].get<std::int64_t>() != expected_id) {
    throw BackendFailure("bridge answered id " + response["id"].dump() +
                             ", expected " + std::to_string(expected_id),
                         "");
  }
  if (response.contains("error")) {
    throw BackendFailure("bridge error: " + response["error"].dump(), "");
  }
  const auto tokens = response.find("tokens");
  const auto probs = response.find("probs");
  if (tokens == response.end() || probs == response.end() ||
      !tokens->is_array() || !probs->is_array()) {
    throw BackendFailure("bridge response lacks tokens/probs arrays", "");
  }
  if (tokens->size() != probs->size()) {
    throw BackendFailure("bridge tokens/probs lengths differ", "");
  }
  if (tokens->empty() || tokens->size() > static_cast<std::size_t>(top_k)) {
    throw BackendFailure("bridge returned " + std::to_string(tokens->size()) +
                             " tokens for top_k " + std::to_string(top_k),
                         "");
  }
  TokenDistribution pmf;
  std::set<std::string> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < tokens->size(); ++i) {
    const auto& t = (*tokens)[i];
    const auto& p = (*probs)[i];
    if (!t.is_string() || !p.is_number()) {
      throw BackendFailure("bridge token/prob has the wrong type", "");
    }
    const double prob = p.get<double>();
    if (!(prob >= 0.0 && prob <= 1.0)) {
      throw BackendFailure("bridge prob outside [0, 1]", "");
    }
    std::string token = t.get<std::string>();
    if (!seen.insert(token).second) {
      throw BackendFailure("bridge repeated token " + t.dump(), "");
    }
    total += prob;
    pmf.entries.push_back({std::move(token), prob});
  }
  if (std::fabs(total - 1.0) > kBridgeProbTolerance) {
    throw BackendFailure("bridge probs sum to " + std::to_string(total), "");
  }
  return pmf;
}

BridgeClient::BridgeClient(std::vector<std::string> argv, int top_k,
                           std::chrono::milliseconds timeout)
    : server_([&] {
        // A server that dies must surface as a failed write, not SIGPIPE.
        ::signal(SIGPIPE, SIG_IGN);
        ChildProcess::Options options;
        options.argv = std::move(argv);
        options.pipe_stdin = true;
        options.pipe_stdout = true;
        return ChildProcess::Spawn(options);
      }()),
      top_k_(top_k),
      timeout_(timeout) {}

BridgeClient::~BridgeClient() {
  server_.CloseStdin();
  server_.WaitUntil(Clock::now() + std::chrono::seconds(2));
}

TokenDistribution BridgeClient::NextTokenDistribution(std::string_view context) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::int64_t id = next_id_++;
  if (!server_.WriteAll(EncodeBridgeRequest(id, context, top_k_) + "\n")) {
    throw BackendFailure("bridge server is not accepting requests", "");
  }
  const auto line = server_.ReadLine(Clock::now() + timeout_);
  if (!line) {
    throw BackendFailure("bridge server closed or timed out", "");
  }
  return DecodeBridgeResponse(*line, id, top_k_);
}

}  // namespace mdlfuzz
