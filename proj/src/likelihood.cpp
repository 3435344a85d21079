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

#include "regretmeter/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "regretmeter/errors.hpp"

namespace regretmeter {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TokenId SampleToken(const Dist& dist, RngStream& rng) {
  const double u = rng.Uniform();
  double cum = 0.0;
  TokenId last_nonzero = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist.prob(static_cast<TokenId>(i));
    if (p == 0.0) continue;
    last_nonzero = static_cast<TokenId>(i);
    cum += p;
    if (u < cum) return last_nonzero;
  }
  // u landed in the rounding gap above the final cumulative sum.
  return last_nonzero;
}

std::vector<TokenId> SampleSequence(const LanguageModel& model, std::size_t max_len,
                                    RngStream& rng) {
  if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
  const Vocab& vocab = model.vocab();
  std::vector<TokenId> seq = {vocab.bos()};
  while (seq.size() < max_len) {
    const TokenId tok = SampleToken(model.NextDist(seq), rng);
    seq.push_back(tok);
    if (tok == vocab.eos()) break;
  }
  return seq;
}

Corpus SampleCorpus(const LanguageModel& model, std::size_t num_sequences,
                    std::size_t max_len, std::uint64_t seed) {
  Corpus corpus;
  corpus.sequences.reserve(num_sequences);
  for (std::size_t i = 0; i < num_sequences; ++i) {
    RngStream rng = RngStream::Substream(seed, i);
    corpus.sequences.push_back(SampleSequence(model, max_len, rng));
  }
  return corpus;
}

double NllResult::perplexity() const { return std::exp(entropy_rate()); }

NllResult CorpusNll(const LanguageModel& model, const Corpus& corpus) {
  ValidateCorpus(model.vocab(), corpus);
  NllResult result;
  for (std::size_t s = 0; s < corpus.sequences.size(); ++s) {
    const auto& seq = corpus.sequences[s];
    double seq_nll = 0.0;
    for (std::size_t i = 1; i < seq.size(); ++i) {
      const double lp = model.NextDist(std::span(seq).first(i)).logprob(seq[i]);
      if (lp == -kInf) {
        throw InfiniteLossError("infinite NLL: model gives zero probability to token " +
                                    std::to_string(seq[i]) + " at sequence " +
                                    std::to_string(s) + ", position " + std::to_string(i),
                                s, i);
      }
      seq_nll -= lp;
    }
    result.total_nll += seq_nll;
    result.tokens += seq.size() - 1;
  }
  return result;
}

NllResult CorpusNllPairwise(const LanguageModel& model, const Corpus& corpus) {
  ValidateCorpus(model.vocab(), corpus);
  struct Pair {
    std::size_t seq;
    std::size_t pos;
  };
  std::vector<Pair> pairs;
  for (std::size_t s = 0; s < corpus.sequences.size(); ++s) {
    for (std::size_t i = 1; i < corpus.sequences[s].size(); ++i) pairs.push_back({s, i});
  }
  NllResult result;
  for (const Pair& p : pairs) {
    const auto& seq = corpus.sequences[p.seq];
    const double lp = model.NextDist(std::span(seq).first(p.pos)).logprob(seq[p.pos]);
    if (lp == -kInf) {
      throw InfiniteLossError("infinite NLL at sequence " + std::to_string(p.seq) +
                                  ", position " + std::to_string(p.pos),
                              p.seq, p.pos);
    }
    result.total_nll -= lp;
  }
  result.tokens = pairs.size();
  return result;
}

double KlDivergence(const Dist& oracle, const Dist& model, const LossOptions& opts) {
  if (oracle.size() != model.size()) {
    throw std::invalid_argument("KL between distributions of different sizes");
  }
  const double log_floor = opts.prob_floor ? std::log(*opts.prob_floor) : -kInf;
  double kl = 0.0;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    const TokenId w = static_cast<TokenId>(i);
    const double lo = oracle.logprob(w);
    if (lo == -kInf) continue;
    double lp = model.logprob(w);
    if (opts.prob_floor) lp = std::max(lp, log_floor);
    if (lp == -kInf) return kInf;
    kl += std::exp(lo) * (lo - lp);
  }
  // Rounding can leave a tiny negative sum when the two rows nearly agree.
  return std::max(kl, 0.0);
}

double KlNext(const LanguageModel& oracle, const LanguageModel& model,
              std::span<const TokenId> ctx, const LossOptions& opts) {
  return KlDivergence(oracle.NextDist(ctx), model.NextDist(ctx), opts);
}

}  // namespace regretmeter
