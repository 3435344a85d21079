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
#include <vector>

#include "regretmeter/corpus.hpp"
#include "regretmeter/language_model.hpp"
#include "regretmeter/rng.hpp"

namespace regretmeter {

// Global knobs for per-step losses.
struct LossOptions {
  // When set, model probabilities below the floor are raised to it inside
  // the KL, so oracle mass on a model zero gives a large finite loss
  // instead of +inf. Off by default; 1e-10 is a reasonable value.
  std::optional<double> prob_floor;
};

// Draws one sequence ancestrally from `model`: starts at [bos], stops after
// emitting eos or once the sequence holds `max_len` tokens (bos included).
std::vector<TokenId> SampleSequence(const LanguageModel& model, std::size_t max_len,
                                    RngStream& rng);

Corpus SampleCorpus(const LanguageModel& model, std::size_t num_sequences,
                    std::size_t max_len, std::uint64_t seed);

// Draws one token from `dist` by inverse CDF with exactly one uniform variate.
TokenId SampleToken(const Dist& dist, RngStream& rng);

struct NllResult {
  double total_nll = 0.0;     // -sum log p over every non-bos token
  std::size_t tokens = 0;     // |D|
  double entropy_rate() const { return tokens ? total_nll / static_cast<double>(tokens) : 0.0; }
  double perplexity() const;
};

// Entropy rate of `model` on `corpus`, summed sequence by sequence.
// Throws InfiniteLossError naming the sequence and position of the first
// token the model gives zero probability.
NllResult CorpusNll(const LanguageModel& model, const Corpus& corpus);

// The same quantity computed over the flat multiset of (context, token)
// pairs; agrees with CorpusNll to rounding.
NllResult CorpusNllPairwise(const LanguageModel& model, const Corpus& corpus);

// KL(o || p) in nats with 0 * log(0 / q) = 0. Returns +inf (never throws)
// when o puts mass where p has none and no floor is configured.
double KlDivergence(const Dist& oracle, const Dist& model, const LossOptions& opts = {});

// Per-step loss l(p, ctx; o) = KL(o(. | ctx) || p(. | ctx)).
double KlNext(const LanguageModel& oracle, const LanguageModel& model,
              std::span<const TokenId> ctx, const LossOptions& opts = {});

}  // namespace regretmeter
