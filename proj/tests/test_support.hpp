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

// Shared helpers and independent reference computations for the tests.
// The reference code here deliberately avoids the library's enumeration,
// transform and KL routines; it only uses models as black boxes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "regretmeter/decoding.hpp"
#include "regretmeter/dist.hpp"
#include "regretmeter/markov_oracle.hpp"

namespace regretmeter::testing {

inline Dist P(std::vector<double> probs) { return Dist::FromProbs(probs); }

inline Vocab AbVocab() { return Vocab({"<bos>", "<eos>", "a", "b"}, 0, 1); }

// Order-0 Markov model with the given probabilities over an a/b vocab.
inline MarkovOracle Unigram(const Vocab& vocab, std::vector<double> probs,
                            const std::string& name = "unigram") {
  return MarkovOracle(vocab, 0, {Dist::FromProbs(probs)}, name);
}

// Order-1 chain that always emits `next(prev)`.
inline MarkovOracle DeterministicChain(const Vocab& vocab,
                                       const std::function<TokenId(TokenId)>& next) {
  return MarkovOracle::FromFunction(
      vocab, 1,
      [&](std::span<const TokenId> s) { return Dist::OneHot(vocab.size(), next(s[0])); },
      "chain");
}

// Plain-probability KL, written independently of KlDivergence.
inline double RefKl(const std::vector<double>& o, const std::vector<double>& p) {
  double kl = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (o[i] == 0.0) continue;
    if (p[i] == 0.0) return INFINITY;
    kl += o[i] * std::log(o[i] / p[i]);
  }
  return kl;
}

inline double RefKl(const Dist& o, const Dist& p) { return RefKl(o.probs(), p.probs()); }

// Decoder sampling distribution computed in probability space.
inline std::vector<double> RefTransform(const std::vector<double>& probs,
                                        const DecoderSpec& spec) {
  const std::size_t n = probs.size();
  auto argmax = [&] {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (probs[i] > probs[best]) best = i;
    }
    std::vector<double> out(n, 0.0);
    out[best] = 1.0;
    return out;
  };
  auto temper = [&](double t) {
    std::vector<double> out(n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += out[i] = probs[i] > 0 ? std::pow(probs[i], 1.0 / t) : 0.0;
    for (auto& x : out) x /= z;
    return out;
  };
  auto order_by_prob = [&](const std::vector<double>& q) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return q[a] > q[b]; });
    return idx;
  };
  auto keep = [&](std::vector<double> q, std::size_t count, const std::vector<std::size_t>& idx) {
    std::vector<double> out(n, 0.0);
    double z = 0.0;
    for (std::size_t k = 0; k < count; ++k) z += out[idx[k]] = q[idx[k]];
    for (auto& x : out) x /= z;
    return out;
  };
  if (std::holds_alternative<decoder::Greedy>(spec) || std::holds_alternative<decoder::Beam>(spec)) {
    return argmax();
  }
  if (const auto* a = std::get_if<decoder::Ancestral>(&spec)) return temper(a->temperature);
  if (const auto* k = std::get_if<decoder::TopK>(&spec)) {
    const auto q = temper(k->temperature);
    return keep(q, std::min(k->k, n), order_by_prob(q));
  }
  const auto& tp = std::get<decoder::TopP>(spec);
  const auto q = temper(tp.temperature);
  const auto idx = order_by_prob(q);
  double cum = 0.0;
  std::size_t count = 0;
  while (count < n && cum < tp.p - 1e-12) cum += q[idx[count++]];
  return keep(q, std::max<std::size_t>(count, 1), idx);
}

// Recursive exact expected per-step KL, conditioned on being active at
// each step. The sampler's distribution goes through RefTransform.
struct RefLoss {
  std::vector<double> weighted;
  std::vector<double> mass;
  std::vector<double> PerStep() const {
    std::vector<double> out;
    for (std::size_t t = 0; t < mass.size() && mass[t] > 0; ++t) out.push_back(weighted[t] / mass[t]);
    return out;
  }
};

inline void RefRecurse(const LanguageModel& sampler, const DecoderSpec& spec,
                       const LanguageModel& oracle, const LanguageModel& model, Context& ctx,
                       double prob, std::size_t step, std::size_t horizon, RefLoss& acc) {
  if (step == horizon || ctx.back() == sampler.vocab().eos()) return;
  acc.weighted[step] += prob * RefKl(oracle.NextDist(ctx), model.NextDist(ctx));
  acc.mass[step] += prob;
  const auto q = RefTransform(sampler.NextDist(ctx).probs(), spec);
  for (std::size_t w = 0; w < q.size(); ++w) {
    if (q[w] == 0.0) continue;
    ctx.push_back(static_cast<TokenId>(w));
    RefRecurse(sampler, spec, oracle, model, ctx, prob * q[w], step + 1, horizon, acc);
    ctx.pop_back();
  }
}

inline std::vector<double> RefRegretPerStep(const LanguageModel& oracle,
                                            const LanguageModel& model, const DecoderSpec& spec,
                                            Context prompt, std::size_t horizon) {
  RefLoss acc{std::vector<double>(horizon, 0.0), std::vector<double>(horizon, 0.0)};
  RefRecurse(model, spec, oracle, model, prompt, 1.0, 0, horizon, acc);
  return acc.PerStep();
}

inline std::vector<double> RefEps(const LanguageModel& oracle, const LanguageModel& model,
                                  std::size_t horizon) {
  RefLoss acc{std::vector<double>(horizon, 0.0), std::vector<double>(horizon, 0.0)};
  Context ctx{oracle.vocab().bos()};
  RefRecurse(oracle, decoder::Ancestral{1.0}, oracle, model, ctx, 1.0, 0, horizon, acc);
  return acc.PerStep();
}

inline std::vector<double> Cumsum(const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  std::partial_sum(xs.begin(), xs.end(), out.begin());
  return out;
}

}  // namespace regretmeter::testing
