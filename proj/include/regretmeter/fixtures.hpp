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
#include <string>
#include <vector>

#include "regretmeter/markov_oracle.hpp"

namespace regretmeter {

// Shipped oracle/student pairs with known behavior.
struct ModelPair {
  std::string name;
  MarkovOracle oracle;
  MarkovOracle student;
};

// Vocab {<bos>, <eos>, a, b}. Oracle: order 0, a/b 0.5 each, never eos.
// Student: order 0, a 0.25, b 0.75. KL is the same at every context, so
// regret grows exactly linearly.
ModelPair ContextFreePair();

// Vocab {<bos>, <eos>, a, b}: three emittable tokens. Order-1 oracle with
// eos mass in every row; order-0 student. Small enough to enumerate.
ModelPair TinyOrder1Pair();

// Order-2 oracle over a ramp r1..r6, a filler pair a/b and a trap token x.
// After "x x" the oracle almost always leaves, but the order-1 student
// cannot see two tokens back and keeps predicting x; greedy decoding walks
// the ramp, enters x and stays there.
ModelPair TrapPair();

// Names accepted by BuiltinPair(): "context-free", "tiny", "trap".
std::vector<std::string> BuiltinPairNames();
ModelPair BuiltinPair(const std::string& name);

// Oracle with rows drawn from a symmetric Dirichlet(alpha) over the
// emittable tokens, then eos mass rescaled to `eos_prob` in every row.
MarkovOracle RandomMarkovOracle(std::size_t vocab_size, std::size_t order, double alpha,
                                double eos_prob, std::uint64_t seed);

}  // namespace regretmeter
