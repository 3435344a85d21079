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

#include <map>
#include <span>
#include <vector>

#include "regretmeter/corpus.hpp"
#include "regretmeter/language_model.hpp"

namespace regretmeter {

// Count-based order-n model with additive smoothing:
//   p(w | s) = (count(s, w) + lambda) / (total(s) + lambda * (V - 1))
// over the V - 1 emittable tokens (bos never gets mass). A state never seen
// in training yields the uniform distribution over emittable tokens.
class NGramStudent final : public LanguageModel {
 public:
  using CountTable = std::map<std::vector<TokenId>, std::vector<double>>;

  NGramStudent(Vocab vocab, std::size_t order, double lambda, CountTable counts,
               std::string name = "ngram");

  const Vocab& vocab() const override { return vocab_; }
  std::string model_id() const override { return name_; }
  std::optional<std::size_t> markov_order() const override { return order_; }

  std::size_t order() const { return order_; }
  double lambda() const { return lambda_; }
  const CountTable& counts() const { return counts_; }

  // Same counts, different smoothing.
  NGramStudent WithLambda(double lambda) const;

 protected:
  Dist DoNextDist(std::span<const TokenId> ctx) const override;

 private:
  Vocab vocab_;
  std::size_t order_;
  double lambda_;
  CountTable counts_;
  std::string name_;
};

// Teacher forcing for a tabular model: counts every (state, next token)
// pair of the corpus. With lambda = 0 this is the exact NLL minimizer among
// order-n tabular models.
NGramStudent TrainNGram(const Vocab& vocab, const Corpus& corpus, std::size_t order,
                        double lambda);

}  // namespace regretmeter
