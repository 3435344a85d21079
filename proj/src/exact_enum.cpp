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

#include "regretmeter/exact_enum.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "regretmeter/errors.hpp"

namespace regretmeter {

namespace {

struct Accumulator {
  std::vector<double> weighted;
  std::vector<double> mass;
  double pruned = 0.0;

  explicit Accumulator(std::size_t horizon) : weighted(horizon, 0.0), mass(horizon, 0.0) {}

  void Add(std::size_t step, double prob, double kl, const Context& ctx) {
    if (std::isinf(kl)) {
      std::string c;
      for (TokenId w : ctx) c += (c.empty() ? "" : " ") + std::to_string(w);
      throw InfiniteLossError("infinite KL at step " + std::to_string(step + 1) +
                                  ", context [" + c + "]",
                              0, step + 1);
    }
    weighted[step] += prob * kl;
    mass[step] += prob;
  }

  ExactLoss Finish() const {
    ExactLoss out;
    out.pruned_mass = pruned;
    for (std::size_t t = 0; t < mass.size() && mass[t] > 0.0; ++t) {
      out.per_step.push_back(weighted[t] / mass[t]);
      out.active_mass.push_back(mass[t]);
    }
    return out;
  }
};

// Point mass along the beam hypothesis.
ExactLoss BeamLoss(const LanguageModel& oracle, const LanguageModel& model,
                   std::size_t width, const Context& prompt, std::size_t horizon,
                   const LossOptions& loss) {
  const BeamResult best = BeamSearch(model, prompt, width, prompt.size() + horizon);
  Accumulator acc(horizon);
  Context ctx = prompt;
  for (std::size_t t = 0; t < best.continuation.size(); ++t) {
    acc.Add(t, 1.0, KlNext(oracle, model, ctx, loss), ctx);
    ctx.push_back(best.continuation[t]);
  }
  return acc.Finish();
}

struct Frame {
  Context ctx;
  double prob;
};

// Depth-first walk over the paths of `sampler` under `spec`. `visit(ctx,
// prob, depth)` runs at every non-terminal node with depth < horizon.
template <typename Visit>
double Enumerate(const LanguageModel& sampler, const DecoderSpec& spec, const Context& prompt,
                 std::size_t horizon, const EnumBudget& budget, Visit&& visit) {
  double pruned = 0.0;
  std::vector<Frame> stack{{prompt, 1.0}};
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    const std::size_t depth = f.ctx.size() - prompt.size();
    const bool terminal = IsTerminal(sampler.vocab(), f.ctx);
    visit(f.ctx, f.prob, depth, terminal);
    if (terminal || depth == horizon) continue;
    const Dist q = TransformDist(sampler.NextDist(f.ctx), spec);
    // Push in reverse so lower ids are visited first.
    for (std::size_t w = q.size(); w-- > 0;) {
      const double pw = q.prob(static_cast<TokenId>(w));
      if (pw == 0.0) continue;
      const double p = f.prob * pw;
      if (p < budget.prune_below) {
        pruned += p;
        continue;
      }
      Context next = f.ctx;
      next.push_back(static_cast<TokenId>(w));
      stack.push_back({std::move(next), p});
    }
  }
  return pruned;
}

void CheckPrompt(const LanguageModel& model, const Context& prompt) {
  ValidateContext(model.vocab(), prompt);
  if (IsTerminal(model.vocab(), prompt)) {
    throw TerminalContextError("enumeration from a terminal prompt");
  }
}

}  // namespace

void EnumBudget::Check(std::size_t emittable, std::size_t horizon) const {
  const double paths = std::pow(static_cast<double>(emittable), static_cast<double>(horizon));
  if (paths > max_paths) {
    throw BudgetExceededError("enumeration of " + std::to_string(emittable) + "^" +
                              std::to_string(horizon) + " paths exceeds the budget of " +
                              std::to_string(static_cast<long long>(max_paths)));
  }
}

double ContextDistribution::total() const {
  double s = 0.0;
  for (const auto& c : contexts) s += c.prob;
  return s;
}

std::vector<double> ExactLoss::Cumulative() const {
  std::vector<double> out(per_step.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < per_step.size(); ++t) out[t] = acc += per_step[t];
  return out;
}

ContextDistribution ExactContextDist(const LanguageModel& model, const DecoderSpec& spec,
                                     const Context& prompt, std::size_t t,
                                     const EnumBudget& budget) {
  CheckPrompt(model, prompt);
  ContextDistribution out;
  if (const auto* beam = std::get_if<decoder::Beam>(&spec)) {
    const BeamResult best = BeamSearch(model, prompt, beam->width, prompt.size() + t);
    Context ctx = prompt;
    ctx.insert(ctx.end(), best.continuation.begin(),
               best.continuation.begin() +
                   static_cast<std::ptrdiff_t>(std::min(t, best.continuation.size())));
    out.contexts.push_back({std::move(ctx), 1.0});
    return out;
  }
  budget.Check(model.vocab().emittable(), t);
  out.pruned_mass = Enumerate(model, spec, prompt, t, budget,
                              [&](const Context& ctx, double prob, std::size_t depth,
                                  bool terminal) {
                                if (depth == t || terminal) out.contexts.push_back({ctx, prob});
                              });
  std::sort(out.contexts.begin(), out.contexts.end(),
            [](const ContextProb& a, const ContextProb& b) { return a.context < b.context; });
  return out;
}

ExactLoss ExactRegret(const LanguageModel& oracle, const LanguageModel& model,
                      const DecoderSpec& spec, const Context& prompt, std::size_t horizon,
                      const EnumBudget& budget, const LossOptions& loss) {
  if (!CompatibleVocabs(model.vocab(), oracle.vocab())) {
    throw std::invalid_argument("model and oracle vocabularies differ");
  }
  CheckPrompt(model, prompt);
  if (const auto* beam = std::get_if<decoder::Beam>(&spec)) {
    return BeamLoss(oracle, model, beam->width, prompt, horizon, loss);
  }
  budget.Check(model.vocab().emittable(), horizon);
  Accumulator acc(horizon);
  acc.pruned = Enumerate(model, spec, prompt, horizon, budget,
                         [&](const Context& ctx, double prob, std::size_t depth, bool terminal) {
                           if (terminal || depth == horizon) return;
                           acc.Add(depth, prob, KlNext(oracle, model, ctx, loss), ctx);
                         });
  return acc.Finish();
}

ExactLoss ExactEps(const LanguageModel& oracle, const LanguageModel& model,
                   std::size_t horizon, const EnumBudget& budget, const LossOptions& loss) {
  if (!CompatibleVocabs(model.vocab(), oracle.vocab())) {
    throw std::invalid_argument("model and oracle vocabularies differ");
  }
  budget.Check(oracle.vocab().emittable(), horizon);
  const Context prompt{oracle.vocab().bos()};
  Accumulator acc(horizon);
  acc.pruned = Enumerate(oracle, decoder::Ancestral{1.0}, prompt, horizon, budget,
                         [&](const Context& ctx, double prob, std::size_t depth, bool terminal) {
                           if (terminal || depth == horizon) return;
                           acc.Add(depth, prob, KlNext(oracle, model, ctx, loss), ctx);
                         });
  return acc.Finish();
}

namespace {

// Forward pass over Markov states of width m = max order. A state is the
// shortest context with the same last-m window: bos followed by the
// non-padding suffix, so every Markov model answers it exactly as it would
// the full context.
ExactLoss MarkovForward(const LanguageModel& sampler, const DecoderSpec& spec,
                        const LanguageModel& oracle, const LanguageModel& model,
                        const Context& prompt, std::size_t horizon, const LossOptions& loss) {
  std::size_t m = 0;
  for (const LanguageModel* lm : {&sampler, &oracle, &model}) {
    const auto order = lm->markov_order();
    if (!order) throw std::invalid_argument(lm->model_id() + " has no finite Markov order");
    m = std::max(m, *order);
  }
  const TokenId bos = sampler.vocab().bos();
  const TokenId eos = sampler.vocab().eos();
  auto reduce = [&](const Context& ctx) {
    Context s{bos};
    const std::size_t body = ctx.size() - 1;  // tokens after bos
    const std::size_t keep = std::min(m, body);
    s.insert(s.end(), ctx.end() - static_cast<std::ptrdiff_t>(keep), ctx.end());
    return s;
  };

  struct StateInfo {
    double kl;
    Dist next;
  };
  std::map<Context, StateInfo> cache;
  auto info = [&](const Context& s) -> const StateInfo& {
    auto it = cache.find(s);
    if (it == cache.end()) {
      it = cache.emplace(s, StateInfo{KlNext(oracle, model, s, loss),
                                      TransformDist(sampler.NextDist(s), spec)})
               .first;
    }
    return it->second;
  };

  Accumulator acc(horizon);
  std::map<Context, double> mass{{reduce(prompt), 1.0}};
  for (std::size_t t = 0; t < horizon && !mass.empty(); ++t) {
    std::map<Context, double> next_mass;
    for (const auto& [s, p] : mass) {
      const StateInfo& si = info(s);
      acc.Add(t, p, si.kl, s);
      if (t + 1 == horizon) continue;
      for (std::size_t w = 0; w < si.next.size(); ++w) {
        const double pw = si.next.prob(static_cast<TokenId>(w));
        if (pw == 0.0 || static_cast<TokenId>(w) == eos) continue;
        Context ns = s;
        ns.push_back(static_cast<TokenId>(w));
        next_mass[reduce(ns)] += p * pw;
      }
    }
    mass = std::move(next_mass);
  }
  return acc.Finish();
}

}  // namespace

ExactLoss MarkovExactRegret(const LanguageModel& oracle, const LanguageModel& model,
                            const DecoderSpec& spec, const Context& prompt,
                            std::size_t horizon, const LossOptions& loss) {
  if (!CompatibleVocabs(model.vocab(), oracle.vocab())) {
    throw std::invalid_argument("model and oracle vocabularies differ");
  }
  CheckPrompt(model, prompt);
  if (const auto* beam = std::get_if<decoder::Beam>(&spec)) {
    return BeamLoss(oracle, model, beam->width, prompt, horizon, loss);
  }
  return MarkovForward(model, spec, oracle, model, prompt, horizon, loss);
}

ExactLoss MarkovExactEps(const LanguageModel& oracle, const LanguageModel& model,
                         std::size_t horizon, const LossOptions& loss) {
  if (!CompatibleVocabs(model.vocab(), oracle.vocab())) {
    throw std::invalid_argument("model and oracle vocabularies differ");
  }
  return MarkovForward(oracle, decoder::Ancestral{1.0}, oracle, model,
                       Context{oracle.vocab().bos()}, horizon, loss);
}

}  // namespace regretmeter
