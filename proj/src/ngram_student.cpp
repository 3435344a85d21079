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

#include "regretmeter/ngram_student.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace regretmeter {

void ValidateCorpus(const Vocab& vocab, const Corpus& corpus) {
  for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
    try {
      ValidateContext(vocab, corpus.sequences[i]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sequence " + std::to_string(i) + ": " + e.what());
    }
  }
}

NGramStudent::NGramStudent(Vocab vocab, std::size_t order, double lambda,
                           CountTable counts, std::string name)
    : vocab_(std::move(vocab)), order_(order), lambda_(lambda),
      counts_(std::move(counts)), name_(std::move(name)) {
  if (!(lambda_ >= 0.0) || std::isinf(lambda_)) {
    throw std::invalid_argument("smoothing lambda must be finite and >= 0");
  }
  for (const auto& [state, row] : counts_) {
    if (state.size() != order_ || row.size() != vocab_.size()) {
      throw std::invalid_argument("count table shape does not match order/vocab");
    }
    for (double c : row) {
      if (!(c >= 0.0) || std::isinf(c)) throw std::invalid_argument("bad count");
    }
    if (row[static_cast<std::size_t>(vocab_.bos())] != 0.0) {
      throw std::invalid_argument("bos has a non-zero count");
    }
  }
}

NGramStudent NGramStudent::WithLambda(double lambda) const {
  return NGramStudent(vocab_, order_, lambda, counts_, name_);
}

Dist NGramStudent::DoNextDist(std::span<const TokenId> ctx) const {
  const auto state = MarkovState(ctx, order_, vocab_.bos());
  auto it = counts_.find(state);
  const std::size_t v = vocab_.size();
  if (it == counts_.end()) return Dist::UniformExcept(v, vocab_.bos());
  const std::vector<double>& row = it->second;
  double total = 0.0;
  for (double c : row) total += c;
  if (total == 0.0 && lambda_ == 0.0) return Dist::UniformExcept(v, vocab_.bos());
  const double denom = total + lambda_ * static_cast<double>(v - 1);
  std::vector<double> lp(v);
  for (std::size_t w = 0; w < v; ++w) {
    if (static_cast<TokenId>(w) == vocab_.bos()) {
      lp[w] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double num = row[w] + lambda_;
    lp[w] = num > 0.0 ? std::log(num / denom) : -std::numeric_limits<double>::infinity();
  }
  return Dist::FromLogprobs(std::move(lp));
}

NGramStudent TrainNGram(const Vocab& vocab, const Corpus& corpus, std::size_t order,
                        double lambda) {
  if (corpus.empty() || corpus.token_count() == 0) {
    throw std::invalid_argument("cannot train on an empty corpus");
  }
  ValidateCorpus(vocab, corpus);
  NGramStudent::CountTable counts;
  for (const auto& seq : corpus.sequences) {
    for (std::size_t i = 1; i < seq.size(); ++i) {
      const auto state = MarkovState(std::span(seq).first(i), order, vocab.bos());
      auto [it, inserted] = counts.try_emplace(state);
      if (inserted) it->second.assign(vocab.size(), 0.0);
      it->second[static_cast<std::size_t>(seq[i])] += 1.0;
    }
  }
  return NGramStudent(vocab, order, lambda, std::move(counts),
                      "ngram-n" + std::to_string(order));
}

}  // namespace regretmeter
