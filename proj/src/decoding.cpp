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

#include "regretmeter/decoding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "regretmeter/errors.hpp"
#include "regretmeter/model_io.hpp"

namespace regretmeter {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Slack on the nucleus threshold so p = 1 keeps exactly the support.
constexpr double kNucleusSlack = 1e-12;

[[noreturn]] void SpecError(const std::string& text, const std::string& why) {
  throw std::invalid_argument("invalid decoder spec '" + text + "': " + why +
                              "; expected " + DecoderSpecGrammar());
}

double ParsePositiveReal(const std::string& text, const std::string& v) {
  double x = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x)) {
    SpecError(text, "'" + v + "' is not a number");
  }
  if (!(x > 0.0)) SpecError(text, "'" + v + "' must be > 0");
  return x;
}

std::size_t ParsePositiveInt(const std::string& text, const std::string& v) {
  std::size_t x = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || x == 0) {
    SpecError(text, "'" + v + "' is not a positive integer");
  }
  return x;
}

std::map<std::string, std::string> ParseParams(const std::string& text,
                                               const std::string& params) {
  std::map<std::string, std::string> out;
  std::size_t start = 0;
  while (start <= params.size()) {
    const std::size_t end = std::min(params.find(',', start), params.size());
    const std::string kv = params.substr(start, end - start);
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size()) {
      SpecError(text, "parameter '" + kv + "' is not key=value");
    }
    if (!out.emplace(kv.substr(0, eq), kv.substr(eq + 1)).second) {
      SpecError(text, "duplicate parameter '" + kv.substr(0, eq) + "'");
    }
    start = end + 1;
  }
  return out;
}

// Pops `key` from params if present.
std::optional<std::string> Take(std::map<std::string, std::string>& params,
                                const std::string& key) {
  auto it = params.find(key);
  if (it == params.end()) return std::nullopt;
  std::string v = it->second;
  params.erase(it);
  return v;
}

void RequireEmpty(const std::string& text, const std::map<std::string, std::string>& params) {
  if (!params.empty()) SpecError(text, "unknown parameter '" + params.begin()->first + "'");
}

// Token ids sorted by probability, highest first, lowest id on ties.
std::vector<std::size_t> RankByProb(const Dist& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.logprobs()[a] > d.logprobs()[b];
  });
  return order;
}

Dist Temper(const Dist& d, double temperature) {
  if (temperature == 1.0) return d;
  std::vector<double> logits(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) logits[i] = d.logprobs()[i] / temperature;
  return Dist::FromLogits(logits);
}

Dist KeepOnly(const Dist& d, std::span<const std::size_t> kept) {
  std::vector<double> logits(d.size(), kNegInf);
  for (std::size_t i : kept) logits[i] = d.logprobs()[i];
  return Dist::FromLogits(logits);
}

}  // namespace

const char* DecoderSpecGrammar() {
  return "one of greedy | beam:k=<int> | temp:t=<real> | topk:k=<int>[,t=<real>] | "
         "topp:p=<real in (0,1]>[,t=<real>]";
}

DecoderSpec ParseDecoderSpec(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon == std::string::npos) {
    if (kind == "greedy") return decoder::Greedy{};
    SpecError(text, "unknown decoder '" + kind + "'");
  }
  auto params = ParseParams(text, text.substr(colon + 1));
  if (kind == "beam") {
    auto k = Take(params, "k");
    if (!k) SpecError(text, "beam needs k");
    RequireEmpty(text, params);
    return decoder::Beam{ParsePositiveInt(text, *k)};
  }
  if (kind == "temp") {
    auto t = Take(params, "t");
    if (!t) SpecError(text, "temp needs t");
    RequireEmpty(text, params);
    return decoder::Ancestral{ParsePositiveReal(text, *t)};
  }
  if (kind == "topk") {
    auto k = Take(params, "k");
    if (!k) SpecError(text, "topk needs k");
    auto t = Take(params, "t");
    RequireEmpty(text, params);
    return decoder::TopK{ParsePositiveInt(text, *k), t ? ParsePositiveReal(text, *t) : 1.0};
  }
  if (kind == "topp") {
    auto p = Take(params, "p");
    if (!p) SpecError(text, "topp needs p");
    auto t = Take(params, "t");
    RequireEmpty(text, params);
    const double pv = ParsePositiveReal(text, *p);
    if (pv > 1.0) SpecError(text, "p must be in (0, 1]");
    return decoder::TopP{pv, t ? ParsePositiveReal(text, *t) : 1.0};
  }
  SpecError(text, "unknown decoder '" + kind + "'");
}

std::string ToString(const DecoderSpec& spec) {
  struct Printer {
    std::string operator()(const decoder::Greedy&) const { return "greedy"; }
    std::string operator()(const decoder::Beam& b) const {
      return "beam:k=" + std::to_string(b.width);
    }
    std::string operator()(const decoder::Ancestral& a) const {
      return "temp:t=" + FormatShortest(a.temperature);
    }
    std::string operator()(const decoder::TopK& k) const {
      std::string s = "topk:k=" + std::to_string(k.k);
      if (k.temperature != 1.0) s += ",t=" + FormatShortest(k.temperature);
      return s;
    }
    std::string operator()(const decoder::TopP& p) const {
      std::string s = "topp:p=" + FormatShortest(p.p);
      if (p.temperature != 1.0) s += ",t=" + FormatShortest(p.temperature);
      return s;
    }
  };
  return std::visit(Printer{}, spec);
}

std::vector<DecoderSpec> ParseDecoderSpecList(const std::string& text) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string piece = text.substr(start, end - start);
    // A bare key=value continues the previous spec's parameter list.
    if (!pieces.empty() && piece.find('=') != std::string::npos &&
        piece.find(':') == std::string::npos) {
      pieces.back() += "," + piece;
    } else if (!piece.empty()) {
      pieces.push_back(piece);
    }
    start = end + 1;
  }
  if (pieces.empty()) throw std::invalid_argument("empty decoder spec list");
  std::vector<DecoderSpec> specs;
  for (const auto& p : pieces) specs.push_back(ParseDecoderSpec(p));
  return specs;
}

std::string Slug(const DecoderSpec& spec) {
  std::string out;
  for (char c : ToString(spec)) {
    switch (c) {
      case ':':
      case ',':
        out += '_';
        break;
      case '=':
        break;
      case '.':
        out += 'p';
        break;
      default:
        out += c;
    }
  }
  return out;
}

bool IsStochastic(const DecoderSpec& spec) {
  return !std::holds_alternative<decoder::Greedy>(spec) &&
         !std::holds_alternative<decoder::Beam>(spec);
}

std::vector<DecoderSpec> DefaultDecoderGrid() {
  return {decoder::Greedy{},        decoder::Beam{5},        decoder::Ancestral{1.0},
          decoder::Ancestral{1.2},  decoder::TopK{100, 1.0}, decoder::TopP{0.94, 1.0}};
}

Dist TransformDist(const Dist& dist, const DecoderSpec& spec) {
  struct Visitor {
    const Dist& d;
    Dist operator()(const decoder::Greedy&) const { return Dist::OneHot(d.size(), d.argmax()); }
    Dist operator()(const decoder::Beam&) const { return Dist::OneHot(d.size(), d.argmax()); }
    Dist operator()(const decoder::Ancestral& a) const { return Temper(d, a.temperature); }
    Dist operator()(const decoder::TopK& k) const {
      const Dist t = Temper(d, k.temperature);
      std::vector<std::size_t> kept;
      for (std::size_t i : RankByProb(t)) {
        if (kept.size() == k.k || t.logprobs()[i] == kNegInf) break;
        kept.push_back(i);
      }
      return KeepOnly(t, kept);
    }
    Dist operator()(const decoder::TopP& p) const {
      const Dist t = Temper(d, p.temperature);
      std::vector<std::size_t> kept;
      double cum = 0.0;
      for (std::size_t i : RankByProb(t)) {
        if (t.logprobs()[i] == kNegInf) break;
        kept.push_back(i);
        cum += std::exp(t.logprobs()[i]);
        if (cum >= p.p - kNucleusSlack) break;
      }
      return KeepOnly(t, kept);
    }
  };
  return std::visit(Visitor{dist}, spec);
}

namespace {

TokenId DecodeFromDist(const Dist& model_dist, const DecoderSpec& spec, RngStream& rng) {
  if (!IsStochastic(spec)) return model_dist.argmax();
  if (const auto* a = std::get_if<decoder::Ancestral>(&spec); a && a->temperature == 1.0) {
    return SampleToken(model_dist, rng);
  }
  return SampleToken(TransformDist(model_dist, spec), rng);
}

}  // namespace

TokenId DecodeStep(const LanguageModel& model, std::span<const TokenId> ctx,
                   const DecoderSpec& spec, RngStream& rng) {
  return DecodeFromDist(model.NextDist(ctx), spec, rng);
}

BeamResult BeamSearch(const LanguageModel& model, std::span<const TokenId> prompt,
                      std::size_t width, std::size_t max_len) {
  if (width < 1) throw std::invalid_argument("beam width must be >= 1");
  const Vocab& vocab = model.vocab();
  ValidateContext(vocab, prompt);
  if (IsTerminal(vocab, prompt)) throw TerminalContextError("beam search from a terminal prompt");

  struct Hyp {
    std::vector<TokenId> tokens;  // continuation only
    double score = 0.0;
    bool frozen = false;
  };
  auto better = [](const Hyp& a, const Hyp& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  };

  std::vector<Hyp> beam = {Hyp{}};
  std::vector<TokenId> ctx(prompt.begin(), prompt.end());
  std::size_t live_len = prompt.size();
  while (live_len < max_len) {
    std::vector<Hyp> pool;
    bool any_live = false;
    for (const Hyp& h : beam) {
      if (h.frozen) {
        pool.push_back(h);
        continue;
      }
      any_live = true;
      ctx.resize(prompt.size());
      ctx.insert(ctx.end(), h.tokens.begin(), h.tokens.end());
      const Dist d = model.NextDist(ctx);
      const auto ranked = RankByProb(d);
      for (std::size_t r = 0; r < ranked.size() && r < width; ++r) {
        const std::size_t w = ranked[r];
        if (d.logprobs()[w] == kNegInf) break;
        Hyp next = h;
        next.tokens.push_back(static_cast<TokenId>(w));
        next.score += d.logprobs()[w];
        next.frozen = static_cast<TokenId>(w) == vocab.eos();
        pool.push_back(std::move(next));
      }
    }
    if (!any_live) break;
    std::sort(pool.begin(), pool.end(), better);
    if (pool.size() > width) pool.resize(width);
    beam = std::move(pool);
    ++live_len;
  }
  const Hyp& best = *std::min_element(beam.begin(), beam.end(), better);
  return BeamResult{best.tokens, best.score};
}

Rollout GenerateRollout(const LanguageModel& model, const LanguageModel& oracle,
                        const Context& prompt, const DecoderSpec& spec, std::size_t max_len,
                        RngStream& rng, const LossOptions& opts) {
  const Vocab& vocab = model.vocab();
  ValidateContext(vocab, prompt);
  if (IsTerminal(vocab, prompt)) throw TerminalContextError("rollout from a terminal prompt");
  if (max_len < prompt.size()) {
    throw std::invalid_argument("max_len is shorter than the prompt");
  }
  Rollout r;
  r.prompt = prompt;
  Context ctx = prompt;
  auto record = [&](const Dist& model_dist) {
    const double kl = KlDivergence(oracle.NextDist(ctx), model_dist, opts);
    r.has_infinite_kl |= std::isinf(kl);
    r.per_step_kl.push_back(kl);
  };

  if (const auto* beam = std::get_if<decoder::Beam>(&spec)) {
    BeamResult best = BeamSearch(model, prompt, beam->width, max_len);
    for (TokenId tok : best.continuation) {
      record(model.NextDist(ctx));
      ctx.push_back(tok);
    }
    r.continuation = std::move(best.continuation);
  } else {
    while (ctx.size() < max_len) {
      const Dist d = model.NextDist(ctx);
      record(d);
      const TokenId tok = DecodeFromDist(d, spec, rng);
      ctx.push_back(tok);
      r.continuation.push_back(tok);
      if (tok == vocab.eos()) break;
    }
  }
  r.ended_by_eos = !r.continuation.empty() && r.continuation.back() == vocab.eos();
  r.active_len = r.per_step_kl.size();
  return r;
}

void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<Rollout> GenerateRollouts(const LanguageModel& model, const LanguageModel& oracle,
                                      const std::vector<Context>& prompts,
                                      const DecoderSpec& spec, std::size_t horizon,
                                      std::uint64_t seed, std::size_t workers,
                                      const LossOptions& opts) {
  if (!CompatibleVocabs(model.vocab(), oracle.vocab())) {
    throw std::invalid_argument("model and oracle vocabularies differ");
  }
  std::vector<Rollout> out(prompts.size());
  ParallelFor(prompts.size(), workers, [&](std::size_t i) {
    RngStream rng = RngStream::Substream(seed, i);
    out[i] = GenerateRollout(model, oracle, prompts[i], spec, prompts[i].size() + horizon, rng,
                             opts);
  });
  return out;
}

}  // namespace regretmeter
