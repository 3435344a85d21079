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

#include "regretmeter/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace regretmeter {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double LogSumExp(std::span<const double> logits) {
  double hi = kNegInf;
  for (double x : logits) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : logits) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

Dist Dist::FromLogprobs(std::vector<double> logprobs) {
  if (logprobs.empty()) throw std::invalid_argument("empty distribution");
  double mass = 0.0;
  for (std::size_t i = 0; i < logprobs.size(); ++i) {
    const double lp = logprobs[i];
    if (std::isnan(lp) || lp == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("logprob at index " + std::to_string(i) +
                                  " is NaN or +inf");
    }
    mass += std::exp(lp);
  }
  if (std::abs(mass - 1.0) > kNormalizationTolerance) {
    throw std::invalid_argument("distribution mass " + std::to_string(mass) +
                                " differs from 1");
  }
  return Dist(std::move(logprobs));
}

Dist Dist::FromProbs(std::span<const double> probs) {
  std::vector<double> lp(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) {
      throw std::invalid_argument("negative or NaN probability at index " +
                                  std::to_string(i));
    }
    lp[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
  }
  return FromLogprobs(std::move(lp));
}

Dist Dist::FromLogits(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("empty distribution");
  for (double x : logits) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("logit is NaN or +inf");
    }
  }
  const double z = LogSumExp(logits);
  if (z == kNegInf) throw std::invalid_argument("all logits are -inf");
  std::vector<double> lp(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    lp[i] = logits[i] == kNegInf ? kNegInf : logits[i] - z;
  }
  return FromLogprobs(std::move(lp));
}

Dist Dist::Uniform(std::size_t size) {
  if (size == 0) throw std::invalid_argument("empty distribution");
  return Dist(std::vector<double>(size, -std::log(static_cast<double>(size))));
}

Dist Dist::UniformExcept(std::size_t size, TokenId excluded) {
  if (size < 2) throw std::invalid_argument("need at least two entries");
  std::vector<double> lp(size, -std::log(static_cast<double>(size - 1)));
  lp.at(static_cast<std::size_t>(excluded)) = kNegInf;
  return Dist(std::move(lp));
}

Dist Dist::OneHot(std::size_t size, TokenId id) {
  std::vector<double> lp(size, kNegInf);
  lp.at(static_cast<std::size_t>(id)) = 0.0;
  return Dist(std::move(lp));
}

double Dist::prob(TokenId id) const {
  const double lp = logprob(id);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

std::vector<double> Dist::probs() const {
  std::vector<double> out(logprobs_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = logprobs_[i] == kNegInf ? 0.0 : std::exp(logprobs_[i]);
  }
  return out;
}

TokenId Dist::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logprobs_.size(); ++i) {
    if (logprobs_[i] > logprobs_[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

double Dist::entropy() const {
  double h = 0.0;
  for (double lp : logprobs_) {
    if (lp != kNegInf) h -= std::exp(lp) * lp;
  }
  return h;
}

}  // namespace regretmeter
