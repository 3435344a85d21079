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

#include "regretmeter/vocab.hpp"

#include <stdexcept>

namespace regretmeter {

Vocab::Vocab(std::vector<std::string> tokens, TokenId bos, TokenId eos)
    : tokens_(std::move(tokens)), bos_(bos), eos_(eos) {
  if (tokens_.size() < 2) {
    throw std::invalid_argument("vocab needs at least bos and eos");
  }
  if (!contains(bos_) || !contains(eos_)) {
    throw std::invalid_argument("bos/eos id outside the vocabulary");
  }
  if (bos_ == eos_) throw std::invalid_argument("bos and eos must differ");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const std::string& t = tokens_[i];
    if (t.empty()) throw std::invalid_argument("empty token string");
    for (char c : t) {
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        throw std::invalid_argument("token contains whitespace: '" + t + "'");
      }
    }
    if (!index_.emplace(t, static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("duplicate token: '" + t + "'");
    }
  }
}

Vocab Vocab::Synthetic(std::size_t size) {
  if (size < 2) throw std::invalid_argument("vocab size must be >= 2");
  std::vector<std::string> tokens = {"<bos>", "<eos>"};
  for (std::size_t i = 2; i < size; ++i) tokens.push_back("t" + std::to_string(i));
  return Vocab(std::move(tokens), 0, 1);
}

const std::string& Vocab::token(TokenId id) const {
  if (!contains(id)) {
    throw std::out_of_range("token id " + std::to_string(id) +
                            " outside vocab of size " +
                            std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> Vocab::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void ValidateContext(const Vocab& vocab, std::span<const TokenId> ctx) {
  if (ctx.empty()) throw std::invalid_argument("empty context");
  if (ctx.front() != vocab.bos()) {
    throw std::invalid_argument("context must start with bos");
  }
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    if (!vocab.contains(ctx[i])) {
      throw std::invalid_argument("context token " + std::to_string(ctx[i]) +
                                  " outside the vocabulary");
    }
    if (i > 0 && ctx[i] == vocab.bos()) {
      throw std::invalid_argument("bos inside context at position " +
                                  std::to_string(i));
    }
    if (ctx[i] == vocab.eos() && i + 1 != ctx.size()) {
      throw std::invalid_argument("eos before the end of the context");
    }
  }
}

}  // namespace regretmeter
