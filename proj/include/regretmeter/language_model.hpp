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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regretmeter/dist.hpp"
#include "regretmeter/vocab.hpp"

namespace regretmeter {

// Anything that answers next-token distribution queries for a context:
// a synthetic oracle, a trained student, or a model behind the bridge.
// Implementations are immutable after construction and safe to query from
// many threads at once.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocab& vocab() const = 0;
  virtual std::string model_id() const = 0;

  // Markov order when the conditional depends only on the last k tokens
  // (bos padded); nullopt for models with unbounded context.
  virtual std::optional<std::size_t> markov_order() const { return std::nullopt; }

  // p(. | ctx). Throws TerminalContextError if ctx ends in eos and
  // std::invalid_argument if ctx is not a valid context.
  Dist NextDist(std::span<const TokenId> ctx) const;

  // Batched form; order-preserving. The default loops over NextDist.
  virtual std::vector<Dist> NextDists(std::span<const Context> ctxs) const;

 protected:
  // Called with an already validated, non-terminal context.
  virtual Dist DoNextDist(std::span<const TokenId> ctx) const = 0;
};

// Markov state of `ctx` for an order-`order` model: the last `order`
// tokens, left-padded with bos.
std::vector<TokenId> MarkovState(std::span<const TokenId> ctx, std::size_t order,
                                 TokenId bos);

}  // namespace regretmeter
