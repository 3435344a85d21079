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
#include <vector>

#include "regretmeter/decoding.hpp"
#include "regretmeter/language_model.hpp"
#include "regretmeter/likelihood.hpp"

namespace regretmeter {

// Limits for brute-force enumeration.
struct EnumBudget {
  // Cap on emittable^T, the number of length-T paths.
  double max_paths = 1e6;
  // Branches whose probability falls below this are dropped; the dropped
  // mass is reported.
  double prune_below = 1e-15;

  // Throws BudgetExceededError when emittable^horizon > max_paths.
  void Check(std::size_t emittable, std::size_t horizon) const;
};

struct ContextProb {
  Context context;
  double prob = 0.0;
};

struct ContextDistribution {
  // Prompt plus t generated tokens, or fewer when eos came first. Sorted
  // lexicographically by context.
  std::vector<ContextProb> contexts;
  double pruned_mass = 0.0;

  double total() const;
};

// Distribution over the contexts reached after `t` decoding steps from
// `prompt`, under the decoder-transformed per-step distributions. Greedy
// and beam give a point mass (beam: prefix of its returned hypothesis).
ContextDistribution ExactContextDist(const LanguageModel& model, const DecoderSpec& spec,
                                     const Context& prompt, std::size_t t,
                                     const EnumBudget& budget = {});

// Exact expected per-step loss. Step t averages over contexts still active
// (not terminated by eos) at t, weighted by their probability, which is
// what the Monte-Carlo estimators converge to. Series stop at the first
// step with no active mass.
struct ExactLoss {
  std::vector<double> per_step;     // E[KL at step t | active at t], index t-1
  std::vector<double> active_mass;  // P(active at step t)
  double pruned_mass = 0.0;

  std::size_t length() const { return per_step.size(); }
  // R_{<=l} = sum_{t<=l} per_step[t-1], index l-1.
  std::vector<double> Cumulative() const;
};

// Exact regret of `model` decoded with `spec` from `prompt` over `horizon`
// steps, by depth-first enumeration.
ExactLoss ExactRegret(const LanguageModel& oracle, const LanguageModel& model,
                      const DecoderSpec& spec, const Context& prompt, std::size_t horizon,
                      const EnumBudget& budget = {}, const LossOptions& loss = {});

// Exact eps_t on the oracle's own context distribution from [bos].
ExactLoss ExactEps(const LanguageModel& oracle, const LanguageModel& model,
                   std::size_t horizon, const EnumBudget& budget = {},
                   const LossOptions& loss = {});

// The same two quantities for models with a finite Markov order, by a
// forward pass over joint Markov states instead of paths. Cost is linear
// in the horizon, so long-horizon references are exact too. Beam falls
// back to the point mass of its hypothesis. Throws std::invalid_argument
// when a model has no Markov order.
ExactLoss MarkovExactRegret(const LanguageModel& oracle, const LanguageModel& model,
                            const DecoderSpec& spec, const Context& prompt,
                            std::size_t horizon, const LossOptions& loss = {});
ExactLoss MarkovExactEps(const LanguageModel& oracle, const LanguageModel& model,
                         std::size_t horizon, const LossOptions& loss = {});

}  // namespace regretmeter
