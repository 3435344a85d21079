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
#include <optional>
#include <span>
#include <vector>

#include "regretmeter/vocab.hpp"

namespace regretmeter {

// One generated continuation with its prompt and (optional) gold reference.
// Gold index i is aligned with continuation index i.
struct Completion {
  std::vector<TokenId> prompt;
  std::vector<TokenId> continuation;
  std::vector<TokenId> gold;
};

struct QualityOptions {
  std::size_t window = 128;
  // Count a copy from the prompt as a repetition.
  bool include_prompt = true;
  // Special tokens dropped from every sequence before scoring.
  std::optional<TokenId> bos;
  std::optional<TokenId> eos;

  static QualityOptions For(const Vocab& vocab) {
    QualityOptions o;
    o.bos = vocab.bos();
    o.eos = vocab.eos();
    return o;
  }
};

// Fraction of generated positions whose token occurs among the preceding
// `window` tokens, micro-averaged over the batch. nullopt when the batch
// has no generated positions.
std::optional<double> Rep(std::span<const Completion> batch, const QualityOptions& opts = {});

// As Rep, but a repeat counts only when it differs from the gold token at
// that position; positions past the gold are excluded. nullopt when no
// position is aligned.
std::optional<double> WRep(std::span<const Completion> batch, const QualityOptions& opts = {});

// 1 - unique 4-grams / total 4-grams of one continuation; nullopt when it
// has fewer than four tokens.
std::optional<double> SeqRep4(std::span<const TokenId> continuation,
                              const QualityOptions& opts = {});
// Mean of SeqRep4 over continuations where it is defined.
std::optional<double> SeqRep4(std::span<const Completion> batch, const QualityOptions& opts = {});

// Distinct token ids across every continuation in the batch.
std::size_t Uniq(std::span<const Completion> batch, const QualityOptions& opts = {});

struct QualityReport {
  std::optional<double> rep;
  std::optional<double> wrep;
  std::optional<double> seq_rep_4;
  std::size_t uniq = 0;
};

QualityReport ComputeQuality(std::span<const Completion> batch, const QualityOptions& opts = {});

}  // namespace regretmeter
