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

#include "regretmeter/markov_oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace regretmeter {

namespace {

constexpr std::size_t kMaxStates = std::size_t{1} << 24;

std::size_t CountStates(std::size_t vocab_size, std::size_t order) {
  std::size_t n = 1;
  for (std::size_t i = 0; i < order; ++i) {
    if (n > kMaxStates / vocab_size) {
      throw std::invalid_argument("Markov table too large: V^order exceeds 2^24");
    }
    n *= vocab_size;
  }
  return n;
}

}  // namespace

MarkovOracle::MarkovOracle(Vocab vocab, std::size_t order, std::vector<Dist> rows,
                           std::string name)
    : vocab_(std::move(vocab)), order_(order), rows_(std::move(rows)),
      name_(std::move(name)) {
  const std::size_t expected = CountStates(vocab_.size(), order_);
  if (rows_.size() != expected) {
    throw std::invalid_argument("Markov table has " + std::to_string(rows_.size()) +
                                " rows, expected " + std::to_string(expected));
  }
  for (std::size_t s = 0; s < rows_.size(); ++s) {
    if (rows_[s].size() != vocab_.size()) {
      throw std::invalid_argument("row " + std::to_string(s) + " has wrong length");
    }
    if (rows_[s].prob(vocab_.bos()) != 0.0) {
      throw std::invalid_argument("row " + std::to_string(s) +
                                  " gives bos non-zero probability");
    }
  }
}

MarkovOracle MarkovOracle::FromFunction(Vocab vocab, std::size_t order,
                                        const RowFn& row_fn, std::string name) {
  const std::size_t n = CountStates(vocab.size(), order);
  std::vector<Dist> rows;
  rows.reserve(n);
  std::vector<TokenId> state(order);
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t code = idx;
    for (std::size_t i = order; i-- > 0;) {
      state[i] = static_cast<TokenId>(code % vocab.size());
      code /= vocab.size();
    }
    rows.push_back(row_fn(state));
  }
  return MarkovOracle(std::move(vocab), order, std::move(rows), std::move(name));
}

std::size_t MarkovOracle::StateIndex(std::span<const TokenId> state) const {
  std::size_t code = 0;
  for (TokenId t : state) code = code * vocab_.size() + static_cast<std::size_t>(t);
  return code;
}

std::vector<TokenId> MarkovOracle::StateTokens(std::size_t index) const {
  std::vector<TokenId> state(order_);
  for (std::size_t i = order_; i-- > 0;) {
    state[i] = static_cast<TokenId>(index % vocab_.size());
    index /= vocab_.size();
  }
  return state;
}

Dist MarkovOracle::DoNextDist(std::span<const TokenId> ctx) const {
  const auto state = MarkovState(ctx, order_, vocab_.bos());
  return rows_[StateIndex(state)];
}

double MarkovOracle::ExactEntropyRate(std::size_t horizon) const {
  // Forward pass over the state distribution; eos is absorbing and stops
  // contributing tokens.
  std::vector<double> mass(rows_.size(), 0.0);
  const std::vector<TokenId> start(order_, vocab_.bos());
  mass[StateIndex(start)] = 1.0;
  double entropy_sum = 0.0;
  double token_sum = 0.0;
  std::vector<TokenId> next_state(order_);
  for (std::size_t step = 0; step < horizon; ++step) {
    std::vector<double> next(rows_.size(), 0.0);
    for (std::size_t s = 0; s < rows_.size(); ++s) {
      if (mass[s] == 0.0) continue;
      const Dist& row = rows_[s];
      entropy_sum += mass[s] * row.entropy();
      token_sum += mass[s];
      if (order_ == 0) {
        next[s] += mass[s] * (1.0 - row.prob(vocab_.eos()));
        continue;
      }
      const auto state = StateTokens(s);
      for (std::size_t w = 0; w < vocab_.size(); ++w) {
        const TokenId tok = static_cast<TokenId>(w);
        if (tok == vocab_.eos()) continue;
        const double p = row.prob(tok);
        if (p == 0.0) continue;
        for (std::size_t i = 0; i + 1 < order_; ++i) next_state[i] = state[i + 1];
        next_state[order_ - 1] = tok;
        next[StateIndex(next_state)] += mass[s] * p;
      }
    }
    mass.swap(next);
  }
  if (token_sum == 0.0) return 0.0;
  return entropy_sum / token_sum;
}

}  // namespace regretmeter
