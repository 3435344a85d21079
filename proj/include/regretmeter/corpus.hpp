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

#include "regretmeter/vocab.hpp"

namespace regretmeter {

// Token-id sequences, each starting with bos and ending with eos or
// truncated at the sampling length.
struct Corpus {
  std::vector<std::vector<TokenId>> sequences;

  // |D|: number of non-bos tokens.
  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& s : sequences) n += s.empty() ? 0 : s.size() - 1;
    return n;
  }
  bool empty() const { return sequences.empty(); }
  bool operator==(const Corpus&) const = default;
};

// Throws std::invalid_argument if any sequence breaks the context rules.
void ValidateCorpus(const Vocab& vocab, const Corpus& corpus);

}  // namespace regretmeter
