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
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "regretmeter/language_model.hpp"
#include "regretmeter/likelihood.hpp"
#include "regretmeter/rng.hpp"

namespace regretmeter {

namespace decoder {
struct Greedy {
  bool operator==(const Greedy&) const = default;
};
struct Beam {
  std::size_t width = 5;
  bool operator==(const Beam&) const = default;
};
struct Ancestral {
  double temperature = 1.0;
  bool operator==(const Ancestral&) const = default;
};
struct TopK {
  std::size_t k = 100;
  double temperature = 1.0;
  bool operator==(const TopK&) const = default;
};
struct TopP {
  double p = 0.94;
  double temperature = 1.0;
  bool operator==(const TopP&) const = default;
};
}  // namespace decoder

// A decoding strategy with its parameters.
//
// Text form (parse and print):
//   greedy | beam:k=5 | temp:t=1.2 | topk:k=100[,t=0.9] | topp:p=0.94[,t=0.9]
using DecoderSpec = std::variant<decoder::Greedy, decoder::Beam, decoder::Ancestral,
                                 decoder::TopK, decoder::TopP>;

// Throws std::invalid_argument naming the grammar on unknown or malformed
// input, or on out-of-range parameters.
DecoderSpec ParseDecoderSpec(const std::string& text);
std::string ToString(const DecoderSpec& spec);
// Comma-separated list; commas inside a spec's parameter list are allowed
// ("topk:k=10,t=0.9,greedy" parses as two specs).
std::vector<DecoderSpec> ParseDecoderSpecList(const std::string& text);
// Filename-safe form, e.g. "temp_t1p2".
std::string Slug(const DecoderSpec& spec);

bool IsStochastic(const DecoderSpec& spec);
// Grammar summary used in usage errors.
const char* DecoderSpecGrammar();
// Greedy, beam:k=5, temp:t=1, temp:t=1.2, topk:k=100, topp:p=0.94.
std::vector<DecoderSpec> DefaultDecoderGrid();

// The sampling distribution a decoder induces from a model distribution.
// Greedy and Beam give the argmax one-hot; ties break toward the lowest id
// throughout (argmax, top-k cutoff, nucleus boundary).
Dist TransformDist(const Dist& dist, const DecoderSpec& spec);

// One decoding step. Greedy and Beam return the argmax (a one-step beam
// search is the argmax); stochastic specs consume exactly one variate.
TokenId DecodeStep(const LanguageModel& model, std::span<const TokenId> ctx,
                   const DecoderSpec& spec, RngStream& rng);

struct BeamResult {
  std::vector<TokenId> continuation;
  double score = 0.0;  // sum of model logprobs over the continuation
};

// Breadth-k search maximizing summed logprob. Hypotheses that emit eos are
// frozen and keep competing on score. Stops when every beam entry is
// frozen or live hypotheses reach `max_len` total tokens. Deterministic.
BeamResult BeamSearch(const LanguageModel& model, std::span<const TokenId> prompt,
                      std::size_t width, std::size_t max_len);

struct Rollout {
  Context prompt;
  std::vector<TokenId> continuation;
  // KL(oracle || model) at each generated position, on the untransformed
  // model distribution.
  std::vector<double> per_step_kl;
  bool ended_by_eos = false;
  std::size_t active_len = 0;
  bool has_infinite_kl = false;
};

// Generates from `prompt` until eos or `max_len` total tokens. The decoder
// only shapes which contexts are visited; the per-step loss always
// compares the oracle with the full model distribution at that context.
// Beam specs run BeamSearch and score the returned hypothesis' prefixes.
Rollout GenerateRollout(const LanguageModel& model, const LanguageModel& oracle,
                        const Context& prompt, const DecoderSpec& spec, std::size_t max_len,
                        RngStream& rng, const LossOptions& opts = {});

// Rolls out every prompt for `horizon` generated steps. Prompt i draws from
// RngStream::Substream(seed, i), so results do not depend on `workers`.
std::vector<Rollout> GenerateRollouts(const LanguageModel& model, const LanguageModel& oracle,
                                      const std::vector<Context>& prompts,
                                      const DecoderSpec& spec, std::size_t horizon,
                                      std::uint64_t seed, std::size_t workers = 1,
                                      const LossOptions& opts = {});

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads join.
void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace regretmeter
