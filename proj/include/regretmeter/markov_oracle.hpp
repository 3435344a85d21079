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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "regretmeter/language_model.hpp"

namespace regretmeter {

// Order-m Markov chain with an explicit conditional row for every one of
// the V^m bos-padded states, so queries never miss. Rows give bos zero
// mass. Used for exact synthetic oracles and for hand-built students.
class MarkovOracle final : public LanguageModel {
 public:
  using RowFn = std::function<Dist(std::span<const TokenId> state)>;

  // `rows` is indexed by StateIndex(); size must be V^order.
  MarkovOracle(Vocab vocab, std::size_t order, std::vector<Dist> rows,
               std::string name = "markov");

  // Fills every state row by calling `row_fn(state)`.
  static MarkovOracle FromFunction(Vocab vocab, std::size_t order, const RowFn& row_fn,
                                   std::string name = "markov");

  const Vocab& vocab() const override { return vocab_; }
  std::string model_id() const override { return name_; }
  std::optional<std::size_t> markov_order() const override { return order_; }

  std::size_t order() const { return order_; }
  std::size_t num_states() const { return rows_.size(); }
  const Dist& row(std::size_t state_index) const { return rows_.at(state_index); }
  const std::vector<Dist>& rows() const { return rows_; }

  // Base-V code of a length-`order` state.
  std::size_t StateIndex(std::span<const TokenId> state) const;
  std::vector<TokenId> StateTokens(std::size_t index) const;

  // Exact entropy rate (nats/token) of the chain's own sampling process:
  // mean per-token entropy over the first `horizon` steps from [bos],
  // counting steps while the sequence is still running.
  double ExactEntropyRate(std::size_t horizon) const;

 protected:
  Dist DoNextDist(std::span<const TokenId> ctx) const override;

 private:
  Vocab vocab_;
  std::size_t order_;
  std::vector<Dist> rows_;
  std::string name_;
};

}  // namespace regretmeter
