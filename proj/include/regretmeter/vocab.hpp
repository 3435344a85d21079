// Copyright 2026 The regretmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace regretmeter {

using TokenId = std::int32_t;

// A context w_0^{t-1}: starts with bos, may end with a single eos.
using Context = std::vector<TokenId>;

class Vocab {
 public:
  Vocab(std::vector<std::string> tokens, TokenId bos, TokenId eos);

  // Vocabulary of `size` tokens named "<bos>", "<eos>", "t2", "t3", ...
  static Vocab Synthetic(std::size_t size);

  std::size_t size() const { return tokens_.size(); }
  // Tokens a model may emit: everything except bos.
  std::size_t emittable() const { return tokens_.size() - 1; }
  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }

  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<TokenId> find(const std::string& token) const;
  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }

  bool operator==(const Vocab& other) const {
    return tokens_ == other.tokens_ && bos_ == other.bos_ && eos_ == other.eos_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_;
  TokenId eos_;
};

// Throws std::invalid_argument describing the first violated context rule.
void ValidateContext(const Vocab& vocab, std::span<const TokenId> ctx);

// Same size and special ids; token strings may differ (a bridge model only
// reports V, bos and eos).
inline bool CompatibleVocabs(const Vocab& a, const Vocab& b) {
  return a.size() == b.size() && a.bos() == b.bos() && a.eos() == b.eos();
}

inline bool IsTerminal(const Vocab& vocab, std::span<const TokenId> ctx) {
  return !ctx.empty() && ctx.back() == vocab.eos();
}

}  // namespace regretmeter
