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

#include "regretmeter/fixtures.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "regretmeter/rng.hpp"

namespace regretmeter {

namespace {

// Builds a row from token-name -> probability; unnamed tokens get zero.
Dist Row(const Vocab& vocab, const std::map<std::string, double>& probs) {
  std::vector<double> p(vocab.size(), 0.0);
  for (const auto& [tok, prob] : probs) {
    p[static_cast<std::size_t>(vocab.find(tok).value())] = prob;
  }
  return Dist::FromProbs(p);
}

Vocab AbVocab() { return Vocab({"<bos>", "<eos>", "a", "b"}, 0, 1); }

double StandardNormal(RngStream& rng) {
  // Box-Muller; 1 - U keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.Uniform();
  const double u2 = rng.Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Marsaglia-Tsang gamma(shape, 1) sampler on top of RngStream.
double Gamma(double shape, RngStream& rng) {
  if (shape < 1.0) {
    const double u = 1.0 - rng.Uniform();
    return Gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = StandardNormal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - rng.Uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

}  // namespace

ModelPair ContextFreePair() {
  Vocab vocab = AbVocab();
  Dist o = Row(vocab, {{"a", 0.5}, {"b", 0.5}});
  Dist p = Row(vocab, {{"a", 0.25}, {"b", 0.75}});
  return {"context-free", MarkovOracle(vocab, 0, {o}, "context-free-oracle"),
          MarkovOracle(vocab, 0, {p}, "context-free-student")};
}

ModelPair TinyOrder1Pair() {
  Vocab vocab = AbVocab();
  const TokenId a = 2, b = 3;
  MarkovOracle oracle = MarkovOracle::FromFunction(
      vocab, 1,
      [&](std::span<const TokenId> s) {
        if (s[0] == vocab.bos()) return Row(vocab, {{"a", 0.6}, {"b", 0.3}, {"<eos>", 0.1}});
        if (s[0] == a) return Row(vocab, {{"a", 0.1}, {"b", 0.7}, {"<eos>", 0.2}});
        if (s[0] == b) return Row(vocab, {{"a", 0.5}, {"b", 0.3}, {"<eos>", 0.2}});
        return Dist::UniformExcept(vocab.size(), vocab.bos());
      },
      "tiny-oracle");
  MarkovOracle student(vocab, 0, {Row(vocab, {{"a", 0.45}, {"b", 0.4}, {"<eos>", 0.15}})},
                       "tiny-student");
  return {"tiny", std::move(oracle), std::move(student)};
}

ModelPair TrapPair() {
  Vocab vocab({"<bos>", "<eos>", "r1", "r2", "r3", "r4", "r5", "r6", "a", "b", "x"}, 0, 1);
  const TokenId r1 = 2, r6 = 7, a = 8, b = 9, x = 10;
  // Token id k + 1 is "rk", so the successor of id r is named "r<r>".
  auto ramp_next = [](TokenId r) { return "r" + std::to_string(r); };

  MarkovOracle oracle = MarkovOracle::FromFunction(
      vocab, 2,
      [&](std::span<const TokenId> s) {
        const TokenId prev2 = s[0], prev1 = s[1];
        if (prev1 == vocab.bos()) {
          return Row(vocab, {{"r1", 0.85}, {"a", 0.05}, {"b", 0.05}, {"x", 0.05}});
        }
        if (prev1 >= r1 && prev1 < r6) {
          return Row(vocab, {{ramp_next(prev1), 0.80}, {"a", 0.08}, {"b", 0.08},
                             {"x", 0.03}, {"<eos>", 0.01}});
        }
        if (prev1 == r6) {
          return Row(vocab, {{"a", 0.55}, {"x", 0.30}, {"b", 0.13}, {"<eos>", 0.02}});
        }
        if (prev1 == a) {
          return Row(vocab, {{"b", 0.5}, {"a", 0.2}, {"r1", 0.2}, {"x", 0.08}, {"<eos>", 0.02}});
        }
        if (prev1 == b) {
          return Row(vocab, {{"a", 0.5}, {"b", 0.2}, {"r1", 0.2}, {"x", 0.08}, {"<eos>", 0.02}});
        }
        if (prev1 == x && prev2 == x) {
          return Row(vocab, {{"a", 0.80}, {"b", 0.15}, {"x", 0.03}, {"<eos>", 0.02}});
        }
        if (prev1 == x) {
          return Row(vocab, {{"x", 0.35}, {"a", 0.40}, {"b", 0.23}, {"<eos>", 0.02}});
        }
        return Dist::UniformExcept(vocab.size(), vocab.bos());
      },
      "trap-oracle");

  MarkovOracle student = MarkovOracle::FromFunction(
      vocab, 1,
      [&](std::span<const TokenId> s) {
        const TokenId prev = s[0];
        if (prev == vocab.bos()) {
          return Row(vocab, {{"r1", 0.80}, {"a", 0.07}, {"b", 0.07}, {"x", 0.06}});
        }
        if (prev >= r1 && prev < r6) {
          return Row(vocab, {{ramp_next(prev), 0.75}, {"a", 0.10}, {"b", 0.10},
                             {"x", 0.04}, {"<eos>", 0.01}});
        }
        if (prev == r6) {
          return Row(vocab, {{"x", 0.50}, {"a", 0.35}, {"b", 0.13}, {"<eos>", 0.02}});
        }
        if (prev == a) {
          return Row(vocab, {{"b", 0.45}, {"a", 0.22}, {"r1", 0.20}, {"x", 0.11}, {"<eos>", 0.02}});
        }
        if (prev == b) {
          return Row(vocab, {{"a", 0.45}, {"b", 0.22}, {"r1", 0.20}, {"x", 0.11}, {"<eos>", 0.02}});
        }
        if (prev == x) {
          return Row(vocab, {{"x", 0.55}, {"a", 0.30}, {"b", 0.13}, {"<eos>", 0.02}});
        }
        return Dist::UniformExcept(vocab.size(), vocab.bos());
      },
      "trap-student");
  return {"trap", std::move(oracle), std::move(student)};
}

std::vector<std::string> BuiltinPairNames() { return {"context-free", "tiny", "trap"}; }

ModelPair BuiltinPair(const std::string& name) {
  if (name == "context-free") return ContextFreePair();
  if (name == "tiny") return TinyOrder1Pair();
  if (name == "trap") return TrapPair();
  throw std::invalid_argument("unknown builtin fixture '" + name +
                              "' (known: context-free, tiny, trap)");
}

MarkovOracle RandomMarkovOracle(std::size_t vocab_size, std::size_t order, double alpha,
                                double eos_prob, std::uint64_t seed) {
  if (vocab_size < 3) throw std::invalid_argument("random oracle needs V >= 3");
  if (!(alpha > 0.0)) throw std::invalid_argument("Dirichlet alpha must be > 0");
  if (!(eos_prob >= 0.0 && eos_prob < 1.0)) throw std::invalid_argument("eos_prob must be in [0, 1)");
  Vocab vocab = Vocab::Synthetic(vocab_size);
  RngStream rng(seed);
  return MarkovOracle::FromFunction(
      vocab, order,
      [&](std::span<const TokenId>) {
        std::vector<double> p(vocab_size, 0.0);
        double total = 0.0;
        for (std::size_t w = 2; w < vocab_size; ++w) {
          p[w] = Gamma(alpha, rng);
          total += p[w];
        }
        for (std::size_t w = 2; w < vocab_size; ++w) p[w] = (1.0 - eos_prob) * p[w] / total;
        p[static_cast<std::size_t>(vocab.eos())] = eos_prob;
        return Dist::FromProbs(p);
      },
      "random-v" + std::to_string(vocab_size) + "-n" + std::to_string(order) + "-s" +
          std::to_string(seed));
}

}  // namespace regretmeter
