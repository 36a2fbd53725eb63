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

#include "mdlfuzz/ngram.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdlfuzz/error.h"

namespace mdlfuzz {
namespace {

constexpr std::string_view kFormatTag = "mdlfuzz-ngram/1";

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

}  // namespace

NGramModel NGramModel::Train(const std::vector<TokenSeq>& corpus, int order,
                             std::string eot_token, double backoff) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "n-gram training needs documents");
  }
  if (order < 1) {
    throw Error(ErrorCode::kInvalidConfig, "n-gram order must be >= 1");
  }
  NGramModel model;
  model.order_ = order;
  model.backoff_ = backoff;
  model.eot_ = std::move(eot_token);
  std::vector<std::uint32_t> ids;
  for (const auto& doc : corpus) {
    ids.clear();
    for (const auto& token : doc) ids.push_back(model.Intern(token));
    ids.push_back(model.Intern(model.eot_));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t max_context =
          std::min<std::size_t>(static_cast<std::size_t>(order) - 1, i);
      for (std::size_t len = 0; len <= max_context; ++len) {
        Context context(ids.begin() + static_cast<std::ptrdiff_t>(i - len),
                        ids.begin() + static_cast<std::ptrdiff_t>(i));
        Successors& s = model.tables_[context];
        ++s.counts[ids[i]];
        ++s.total;
      }
    }
  }
  return model;
}

std::uint32_t NGramModel::Intern(const std::string& token) {
  const auto [it, inserted] =
      ids_.emplace(token, static_cast<std::uint32_t>(vocab_.size()));
  if (inserted) vocab_.push_back(token);
  return it->second;
}

const NGramModel::Successors* NGramModel::Find(const Context& context) const {
  const auto it = tables_.find(context);
  return it == tables_.end() ? nullptr : &it->second;
}

TokenDistribution NGramModel::NextDistribution(const TokenSeq& context) const {
  // Map the usable suffix to ids; an unknown token cuts the suffix there.
  const std::size_t max_len =
      std::min<std::size_t>(static_cast<std::size_t>(order_) - 1, context.size());
  Context suffix;
  for (std::size_t i = context.size() - max_len; i < context.size(); ++i) {
    const auto it = ids_.find(context[i]);
    if (it == ids_.end()) {
      suffix.clear();
    } else {
      suffix.push_back(it->second);
    }
  }

  // Scores come from the longest suffix seen in training; every order
  // skipped on the way down costs one backoff factor.
  std::vector<double> scores(vocab_.size(), 0.0);
  double weight = 1.0;
  for (std::size_t len = suffix.size() + 1; len-- > 0; weight *= backoff_) {
    const Context ctx(suffix.end() - static_cast<std::ptrdiff_t>(len),
                      suffix.end());
    const Successors* s = Find(ctx);
    if (s == nullptr) continue;
    for (const auto& [id, count] : s->counts) {
      scores[id] = weight * static_cast<double>(count) /
                   static_cast<double>(s->total);
    }
    break;
  }

  TokenDistribution pmf;
  pmf.entries.reserve(vocab_.size());
  for (std::size_t id = 0; id < vocab_.size(); ++id) {
    pmf.entries.push_back({vocab_[id], scores[id]});
  }
  pmf.Normalize();
  return pmf;
}

std::uint64_t NGramModel::Count(const TokenSeq& ngram) const {
  if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return 0;
  Context context;
  for (std::size_t i = 0; i + 1 < ngram.size(); ++i) {
    const auto it = ids_.find(ngram[i]);
    if (it == ids_.end()) return 0;
    context.push_back(it->second);
  }
  const auto last = ids_.find(ngram.back());
  if (last == ids_.end()) return 0;
  const Successors* s = Find(context);
  if (s == nullptr) return 0;
  const auto it = s->counts.find(last->second);
  return it == s->counts.end() ? 0 : it->second;
}

std::string NGramModel::ToJson() const {
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& [context, successors] : tables_) {
    nlohmann::json next = nlohmann::json::array();
    for (const auto& [id, count] : successors.counts) {
      next.push_back({id, count});
    }
    tables.push_back({{"ctx", context}, {"next", std::move(next)}});
  }
  nlohmann::json doc = {{"format", kFormatTag}, {"order", order_},
                        {"backoff", backoff_},  {"eot", eot_},
                        {"vocab", vocab_},      {"tables", std::move(tables)}};
  return doc.dump();
}

NGramModel NGramModel::FromJson(std::string_view json) {
  try {
    const auto doc = nlohmann::json::parse(json);
    if (doc.at("format").get<std::string>() != kFormatTag) {
      throw Error(ErrorCode::kInvalidConfig, "not an n-gram model file");
    }
    NGramModel model;
    model.order_ = doc.at("order").get<int>();
    model.backoff_ = doc.at("backoff").get<double>();
    model.eot_ = doc.at("eot").get<std::string>();
    for (const auto& token : doc.at("vocab")) {
      model.Intern(token.get<std::string>());
    }
    const auto vocab_size = static_cast<std::uint32_t>(model.vocab_.size());
    for (const auto& table : doc.at("tables")) {
      Context context = table.at("ctx").get<Context>();
      Successors s;
      for (const auto& pair : table.at("next")) {
        const auto id = pair.at(0).get<std::uint32_t>();
        const auto count = pair.at(1).get<std::uint64_t>();
        if (id >= vocab_size || count == 0) {
          throw Error(ErrorCode::kInvalidConfig, "corrupt n-gram table");
        }
        s.counts[id] = count;
        s.total += count;
      }
      for (auto id : context) {
        if (id >= vocab_size) {
          throw Error(ErrorCode::kInvalidConfig, "corrupt n-gram context");
        }
      }
      model.tables_.emplace(std::move(context), std::move(s));
    }
    if (model.order_ < 1 || model.vocab_.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "corrupt n-gram header");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("malformed n-gram model: ") + e.what());
  }
}

void NGramModel::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  out << ToJson() << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

NGramModel NGramModel::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromJson(buffer.str());
}

TokenSeq LastTokens(std::string_view text, std::size_t count) {
  TokenSeq reversed;
  std::size_t end = text.size();
  while (reversed.size() < count && end > 0) {
    while (end > 0 && IsSpace(text[end - 1])) --end;
    if (end == 0) break;
    if (text[end - 1] == '{' || text[end - 1] == '}') {
      reversed.emplace_back(1, text[end - 1]);
      --end;
      continue;
    }
    std::size_t begin = end;
    while (begin > 0 && !IsSpace(text[begin - 1]) && text[begin - 1] != '{' &&
           text[begin - 1] != '}') {
      --begin;
    }
    reversed.emplace_back(text.substr(begin, end - begin));
    end = begin;
  }
  return TokenSeq(reversed.rbegin(), reversed.rend());
}

TokenDistribution NGramBackend::NextTokenDistribution(std::string_view context) {
  const auto order = static_cast<std::size_t>(model_.order());
  return model_.NextDistribution(LastTokens(context, order - 1));
}

}  // namespace mdlfuzz
