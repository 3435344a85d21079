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

#include <cstddef>
#include <span>
#include <vector>

#include "regretmeter/vocab.hpp"

namespace regretmeter {

// Tolerance on |sum(exp(logprobs)) - 1| for a valid distribution.
inline constexpr double kNormalizationTolerance = 1e-9;

double LogSumExp(std::span<const double> logits);

// Dense next-token distribution, stored as natural-log probabilities.
// Entries are finite or -inf and exp-sum to 1.
class Dist {
 public:
  // Validates; throws std::invalid_argument on NaN, +inf or bad mass.
  static Dist FromLogprobs(std::vector<double> logprobs);
  static Dist FromProbs(std::span<const double> probs);
  // Log-softmax of arbitrary scores; -inf scores stay at zero mass.
  static Dist FromLogits(std::span<const double> logits);
  static Dist Uniform(std::size_t size);
  // Uniform over every id except `excluded`, which gets zero mass.
  static Dist UniformExcept(std::size_t size, TokenId excluded);
  static Dist OneHot(std::size_t size, TokenId id);

  std::size_t size() const { return logprobs_.size(); }
  double logprob(TokenId id) const { return logprobs_[static_cast<std::size_t>(id)]; }
  double prob(TokenId id) const;
  std::span<const double> logprobs() const { return logprobs_; }
  std::vector<double> probs() const;

  // Most probable token, lowest id on ties.
  TokenId argmax() const;
  // Shannon entropy in nats.
  double entropy() const;

  bool operator==(const Dist& other) const = default;

 private:
  explicit Dist(std::vector<double> logprobs) : logprobs_(std::move(logprobs)) {}

  std::vector<double> logprobs_;
};

}  // namespace regretmeter
