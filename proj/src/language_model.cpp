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

#include "regretmeter/language_model.hpp"

#include <algorithm>

#include "regretmeter/errors.hpp"

namespace regretmeter {

Dist LanguageModel::NextDist(std::span<const TokenId> ctx) const {
  ValidateContext(vocab(), ctx);
  if (IsTerminal(vocab(), ctx)) {
    throw TerminalContextError("context ends in eos; terminal state has no successor");
  }
  return DoNextDist(ctx);
}

std::vector<Dist> LanguageModel::NextDists(std::span<const Context> ctxs) const {
  std::vector<Dist> out;
  out.reserve(ctxs.size());
  for (const Context& c : ctxs) out.push_back(NextDist(c));
  return out;
}

std::vector<TokenId> MarkovState(std::span<const TokenId> ctx, std::size_t order,
                                 TokenId bos) {
  std::vector<TokenId> state(order, bos);
  const std::size_t take = std::min(order, ctx.size());
  for (std::size_t i = 0; i < take; ++i) {
    state[order - take + i] = ctx[ctx.size() - take + i];
  }
  return state;
}

}  // namespace regretmeter
