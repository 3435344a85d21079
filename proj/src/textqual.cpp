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

#include "regretmeter/textqual.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace regretmeter {

namespace {

std::vector<TokenId> Strip(std::span<const TokenId> seq, const QualityOptions& opts) {
  std::vector<TokenId> out;
  out.reserve(seq.size());
  for (TokenId w : seq) {
    if ((opts.bos && w == *opts.bos) || (opts.eos && w == *opts.eos)) continue;
    out.push_back(w);
  }
  return out;
}

struct RepCounts {
  std::size_t positions = 0;
  std::size_t events = 0;
};

// Walks the continuation keeping a sliding multiset of the last `window`
// tokens. `keep(i, repeated)` decides whether position i is scored and
// whether it is an event.
template <typename Fn>
void ScanRepeats(const Completion& c, const QualityOptions& opts, Fn&& fn) {
  std::vector<TokenId> seq;
  if (opts.include_prompt) seq = Strip(c.prompt, opts);
  const std::size_t offset = seq.size();
  const auto cont = Strip(c.continuation, opts);
  seq.insert(seq.end(), cont.begin(), cont.end());

  std::unordered_map<TokenId, std::size_t> in_window;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i >= offset) fn(i - offset, in_window.count(seq[i]) > 0);
    ++in_window[seq[i]];
    if (opts.window == 0) {
      in_window.clear();
    } else if (i >= opts.window) {
      auto it = in_window.find(seq[i - opts.window]);
      if (--it->second == 0) in_window.erase(it);
    }
  }
}

}  // namespace

std::optional<double> Rep(std::span<const Completion> batch, const QualityOptions& opts) {
  RepCounts n;
  for (const auto& c : batch) {
    ScanRepeats(c, opts, [&](std::size_t, bool repeated) {
      ++n.positions;
      n.events += repeated;
    });
  }
  if (n.positions == 0) return std::nullopt;
  return static_cast<double>(n.events) / static_cast<double>(n.positions);
}

std::optional<double> WRep(std::span<const Completion> batch, const QualityOptions& opts) {
  RepCounts n;
  for (const auto& c : batch) {
    const auto cont = Strip(c.continuation, opts);
    ScanRepeats(c, opts, [&](std::size_t i, bool repeated) {
      if (i >= c.gold.size()) return;
      ++n.positions;
      n.events += repeated && cont[i] != c.gold[i];
    });
  }
  if (n.positions == 0) return std::nullopt;
  return static_cast<double>(n.events) / static_cast<double>(n.positions);
}

std::optional<double> SeqRep4(std::span<const TokenId> continuation, const QualityOptions& opts) {
  const auto seq = Strip(continuation, opts);
  if (seq.size() < 4) return std::nullopt;
  std::set<std::array<TokenId, 4>> unique;
  const std::size_t total = seq.size() - 3;
  for (std::size_t i = 0; i < total; ++i) {
    unique.insert({seq[i], seq[i + 1], seq[i + 2], seq[i + 3]});
  }
  return 1.0 - static_cast<double>(unique.size()) / static_cast<double>(total);
}

std::optional<double> SeqRep4(std::span<const Completion> batch, const QualityOptions& opts) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : batch) {
    if (auto v = SeqRep4(c.continuation, opts)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::size_t Uniq(std::span<const Completion> batch, const QualityOptions& opts) {
  std::unordered_set<TokenId> seen;
  for (const auto& c : batch) {
    for (TokenId w : Strip(c.continuation, opts)) seen.insert(w);
  }
  return seen.size();
}

QualityReport ComputeQuality(std::span<const Completion> batch, const QualityOptions& opts) {
  return {Rep(batch, opts), WRep(batch, opts), SeqRep4(batch, opts), Uniq(batch, opts)};
}

}  // namespace regretmeter
