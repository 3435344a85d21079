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

#include "regretmeter/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "regretmeter/errors.hpp"
#include "regretmeter/rng.hpp"

namespace regretmeter {

namespace {

// Welford accumulator for bootstrap replicates.
class RunningStats {
 public:
  void Add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double stddev() const {
    return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

std::vector<std::size_t> Resample(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  RngStream rng = RngStream::Substream(seed, index);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.Below(n);
  return idx;
}

std::vector<double> CumulativeSum(std::span<const double> xs) {
  std::vector<double> out(xs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = acc += xs[i];
  return out;
}

// Estimators fold over units in sorted order so that permuting the input
// leaves results bit-identical.
Corpus SortedCopy(const Corpus& corpus) {
  Corpus out = corpus;
  std::sort(out.sequences.begin(), out.sequences.end());
  return out;
}

std::string FormatContext(std::span<const TokenId> ctx) {
  std::string s = "[";
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(ctx[i]);
  }
  return s + "]";
}

}  // namespace

StepMeans MeanByStep(const StepLosses& units, std::size_t horizon,
                     std::span<const std::size_t> sample) {
  std::vector<double> sums(horizon, 0.0);
  std::vector<std::size_t> counts(horizon, 0);
  auto add_unit = [&](std::size_t u) {
    const auto& losses = units[u];
    const std::size_t n = std::min(losses.size(), horizon);
    for (std::size_t t = 0; t < n; ++t) {
      if (std::isinf(losses[t])) {
        throw InfiniteLossError("infinite per-step loss at unit " + std::to_string(u) +
                                    ", step " + std::to_string(t + 1) +
                                    " (enable a probability floor or smooth the model)",
                                u, t + 1);
      }
      sums[t] += losses[t];
      ++counts[t];
    }
  };
  if (sample.empty()) {
    for (std::size_t u = 0; u < units.size(); ++u) add_unit(u);
  } else {
    for (std::size_t u : sample) add_unit(u);
  }
  StepMeans out;
  for (std::size_t t = 0; t < horizon && counts[t] > 0; ++t) {
    out.mean.push_back(sums[t] / static_cast<double>(counts[t]));
    out.count.push_back(counts[t]);
  }
  return out;
}

double PerStepErrorSeries::eps_le(std::size_t l) const {
  if (l == 0) return 0.0;
  if (l > eps_t.size()) throw std::out_of_range("eps_le: l beyond series length");
  double acc = 0.0;
  for (std::size_t t = 0; t < l; ++t) acc += eps_t[t];
  return acc / static_cast<double>(l);
}

PerStepErrorSeries EstimateEps(const LanguageModel& oracle, const LanguageModel& model,
                               const Corpus& unsorted, std::size_t horizon,
                               const EpsOptions& opts) {
  if (unsorted.empty()) throw std::invalid_argument("empty held-out corpus");
  ValidateCorpus(oracle.vocab(), unsorted);
  const Corpus heldout = SortedCopy(unsorted);
  PerStepErrorSeries series;
  series.units.resize(heldout.sequences.size());
  ParallelFor(heldout.sequences.size(), opts.workers, [&](std::size_t i) {
    const auto& seq = heldout.sequences[i];
    auto& losses = series.units[i];
    for (std::size_t t = 1; t <= horizon; ++t) {
      const std::size_t pos = opts.first_position + t;
      if (pos >= seq.size()) break;
      losses.push_back(KlNext(oracle, model, std::span(seq).first(pos), opts.loss));
    }
  });
  for (std::size_t i = 0; i < series.units.size(); ++i) {
    const auto& losses = series.units[i];
    for (std::size_t t = 0; t < losses.size(); ++t) {
      if (std::isinf(losses[t])) {
        const auto ctx = std::span(heldout.sequences[i]).first(opts.first_position + t + 1);
        throw InfiniteLossError("infinite KL at held-out sequence " + std::to_string(i) +
                                    ", step " + std::to_string(t + 1) + ", context " +
                                    FormatContext(ctx) +
                                    ": model gives zero probability to an oracle token",
                                i, t + 1);
      }
    }
  }
  StepMeans means = MeanByStep(series.units, horizon);
  series.eps_t = std::move(means.mean);
  series.counts_t = std::move(means.count);
  series.stderr_t.assign(series.eps_t.size(), 0.0);
  std::vector<double> sq(series.eps_t.size(), 0.0);
  for (const auto& losses : series.units) {
    for (std::size_t t = 0; t < std::min(losses.size(), sq.size()); ++t) {
      const double d = losses[t] - series.eps_t[t];
      sq[t] += d * d;
    }
  }
  for (std::size_t t = 0; t < sq.size(); ++t) {
    const double n = static_cast<double>(series.counts_t[t]);
    if (n > 1) series.stderr_t[t] = std::sqrt(sq[t] / (n - 1) / n);
  }
  return series;
}

RegretCurve RegretFromRollouts(const std::vector<Rollout>& rollouts, std::size_t horizon,
                               const BootstrapOptions& bootstrap) {
  if (rollouts.empty()) throw std::invalid_argument("need at least one rollout");
  RegretCurve curve;
  curve.units.reserve(rollouts.size());
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const Rollout& r = rollouts[i];
    if (r.has_infinite_kl) {
      const auto it = std::find_if(r.per_step_kl.begin(), r.per_step_kl.end(),
                                   [](double x) { return std::isinf(x); });
      const std::size_t step = static_cast<std::size_t>(it - r.per_step_kl.begin()) + 1;
      Context ctx = r.prompt;
      ctx.insert(ctx.end(), r.continuation.begin(), r.continuation.begin() + (step - 1));
      throw InfiniteLossError("infinite KL in rollout " + std::to_string(i) + ", step " +
                                  std::to_string(step) + ", context " + FormatContext(ctx),
                              i, step);
    }
    curve.units.push_back(r.per_step_kl);
  }
  StepMeans means = MeanByStep(curve.units, horizon);
  curve.regret_le_l = CumulativeSum(means.mean);
  curve.counts_t = std::move(means.count);

  const std::size_t len = curve.regret_le_l.size();
  std::vector<RunningStats> stats(len);
  for (std::size_t b = 0; b < bootstrap.resamples; ++b) {
    const auto idx = Resample(curve.units.size(), bootstrap.seed, 2 * b);
    const auto cum = CumulativeSum(MeanByStep(curve.units, len, idx).mean);
    for (std::size_t l = 0; l < cum.size(); ++l) stats[l].Add(cum[l]);
  }
  curve.stderr_le_l.resize(len);
  for (std::size_t l = 0; l < len; ++l) curve.stderr_le_l[l] = stats[l].stddev();
  return curve;
}

RegretCurve EstimateRegret(const LanguageModel& oracle, const LanguageModel& model,
                           const DecoderSpec& spec, const std::vector<Context>& prompts,
                           std::size_t horizon, std::uint64_t seed, const RegretOptions& opts) {
  if (prompts.empty()) throw std::invalid_argument("need at least one prompt");
  std::vector<Context> sorted = prompts;
  std::sort(sorted.begin(), sorted.end());
  const auto rollouts =
      GenerateRollouts(model, oracle, sorted, spec, horizon, seed, opts.workers, opts.loss);
  return RegretFromRollouts(rollouts, horizon, opts.bootstrap);
}

std::vector<double> RunningMean(std::span<const double> eps_t) {
  std::vector<double> out(eps_t.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < eps_t.size(); ++t) {
    acc += eps_t[t];
    out[t] = acc / static_cast<double>(t + 1);
  }
  return out;
}

std::vector<std::optional<double>> AccErr(std::span<const double> regret_le_l,
                                          std::span<const double> eps_t) {
  const std::size_t n = std::min(regret_le_l.size(), eps_t.size());
  const auto eps_le = RunningMean(eps_t.first(n));
  std::vector<std::optional<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (eps_le[i] > 0.0) out[i] = regret_le_l[i] / eps_le[i];
  }
  return out;
}

std::vector<std::optional<double>> AccErr(const RegretCurve& curve,
                                          const PerStepErrorSeries& eps) {
  return AccErr(curve.regret_le_l, eps.eps_t);
}

std::vector<std::optional<double>> ExcessAccErr(std::span<const double> regret_le_l,
                                                std::span<const double> eps_t) {
  const std::size_t n = std::min(regret_le_l.size(), eps_t.size());
  const auto eps_le = RunningMean(eps_t.first(n));
  std::vector<std::optional<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double baseline = static_cast<double>(i + 1) * eps_le[i];
    if (baseline > 0.0) out[i] = (regret_le_l[i] - baseline) / baseline * 100.0;
  }
  return out;
}

std::vector<std::optional<double>> ExcessAccErr(const RegretCurve& curve,
                                                const PerStepErrorSeries& eps) {
  return ExcessAccErr(curve.regret_le_l, eps.eps_t);
}

BoundDiagnostic DiagnoseBounds(std::span<const double> eps_t,
                               std::span<const double> regret_le_l, std::size_t horizon) {
  if (horizon == 0 || horizon > eps_t.size() || horizon > regret_le_l.size()) {
    throw std::invalid_argument("bound diagnostic needs series covering the horizon");
  }
  BoundDiagnostic d;
  double acc = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) acc += eps_t[t];
  const double h = static_cast<double>(horizon);
  d.eps = acc / h;
  d.lo = h * d.eps;
  d.hi = h * h * d.eps;
  d.regret = regret_le_l[horizon - 1];
  const double tol = 1e-9 * std::max(1.0, std::abs(d.hi));
  using P = BoundDiagnostic::Position;
  if (std::abs(d.regret - d.lo) <= tol) {
    d.position = P::kAtLower;
  } else if (std::abs(d.regret - d.hi) <= tol) {
    d.position = P::kAtUpper;
  } else if (d.regret < d.lo) {
    d.position = P::kBelow;
  } else if (d.regret > d.hi) {
    d.position = P::kAbove;
  } else {
    d.position = P::kInside;
  }
  return d;
}

const char* ToString(BoundDiagnostic::Position position) {
  switch (position) {
    case BoundDiagnostic::Position::kBelow: return "below";
    case BoundDiagnostic::Position::kAtLower: return "at_lower";
    case BoundDiagnostic::Position::kInside: return "inside";
    case BoundDiagnostic::Position::kAtUpper: return "at_upper";
    case BoundDiagnostic::Position::kAbove: return "above";
  }
  return "unknown";
}

double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("pearson: zero variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PerplexityIdentity CheckPerplexityIdentity(const LanguageModel& oracle,
                                           const LanguageModel& model, const Corpus& unsorted,
                                           const BootstrapOptions& bootstrap,
                                           const LossOptions& loss) {
  if (unsorted.token_count() == 0) throw std::invalid_argument("empty held-out corpus");
  const Corpus heldout = SortedCopy(unsorted);
  PerplexityIdentity out;
  out.entropy_model = CorpusNll(model, heldout).entropy_rate();
  out.entropy_oracle = CorpusNll(oracle, heldout).entropy_rate();

  // Per token: KL minus its single-sample estimate log o(w) - log p(w);
  // zero mean under oracle-generated data.
  std::vector<double> diffs;
  diffs.reserve(heldout.token_count());
  double kl_sum = 0.0;
  for (std::size_t s = 0; s < heldout.sequences.size(); ++s) {
    const auto& seq = heldout.sequences[s];
    for (std::size_t i = 1; i < seq.size(); ++i) {
      const auto ctx = std::span(seq).first(i);
      const Dist o = oracle.NextDist(ctx);
      const Dist p = model.NextDist(ctx);
      const double kl = KlDivergence(o, p, loss);
      if (std::isinf(kl)) {
        throw InfiniteLossError("infinite KL at held-out sequence " + std::to_string(s) +
                                    ", position " + std::to_string(i),
                                s, i);
      }
      kl_sum += kl;
      diffs.push_back(kl - (o.logprob(seq[i]) - p.logprob(seq[i])));
    }
  }
  out.tokens = diffs.size();
  out.mean_eps = kl_sum / static_cast<double>(out.tokens);
  out.residual = std::abs(out.mean_eps - (out.entropy_model - out.entropy_oracle));

  RunningStats stats;
  for (std::size_t b = 0; b < bootstrap.resamples; ++b) {
    RngStream rng = RngStream::Substream(bootstrap.seed, b);
    double acc = 0.0;
    for (std::size_t k = 0; k < diffs.size(); ++k) acc += diffs[rng.Below(diffs.size())];
    stats.Add(acc / static_cast<double>(diffs.size()));
  }
  out.stderr = stats.stddev();
  return out;
}

std::vector<ExposureRow> BuildExposureRows(const PerStepErrorSeries& eps,
                                           const RegretCurve& curve,
                                           const BootstrapOptions& bootstrap) {
  const std::size_t len = std::min(eps.length(), curve.length());
  const auto eps_le = RunningMean(std::span(eps.eps_t).first(len));
  const auto acc = AccErr(std::span(curve.regret_le_l).first(len), std::span(eps.eps_t).first(len));
  const auto pct =
      ExcessAccErr(std::span(curve.regret_le_l).first(len), std::span(eps.eps_t).first(len));

  std::vector<RunningStats> eps_stats(len), acc_stats(len), pct_stats(len);
  for (std::size_t b = 0; b < bootstrap.resamples; ++b) {
    // Rollout resamples reuse the indices of RegretFromRollouts (even
    // substreams); held-out resamples take the odd ones.
    const auto ridx = Resample(curve.units.size(), bootstrap.seed, 2 * b);
    const auto eidx = Resample(eps.units.size(), bootstrap.seed, 2 * b + 1);
    const auto r_b = CumulativeSum(MeanByStep(curve.units, len, ridx).mean);
    const auto e_b = RunningMean(MeanByStep(eps.units, len, eidx).mean);
    for (std::size_t l = 0; l < e_b.size(); ++l) eps_stats[l].Add(e_b[l]);
    const std::size_t n = std::min(r_b.size(), e_b.size());
    for (std::size_t l = 0; l < n; ++l) {
      if (e_b[l] <= 0.0) continue;
      const double baseline = static_cast<double>(l + 1) * e_b[l];
      acc_stats[l].Add(r_b[l] / e_b[l]);
      pct_stats[l].Add((r_b[l] - baseline) / baseline * 100.0);
    }
  }

  std::vector<ExposureRow> rows(len);
  for (std::size_t i = 0; i < len; ++i) {
    ExposureRow& row = rows[i];
    const double l = static_cast<double>(i + 1);
    row.l = i + 1;
    row.eps_le_l = eps_le[i];
    row.regret_le_l = curve.regret_le_l[i];
    row.acc_err = acc[i];
    row.pct_ex_acc_err = pct[i];
    row.bound_lo = l * eps_le[i];
    row.bound_hi = l * l * eps_le[i];
    row.stderr = i < curve.stderr_le_l.size() ? curve.stderr_le_l[i] : 0.0;
    row.eps_stderr = eps_stats[i].stddev();
    if (acc[i]) row.acc_err_stderr = acc_stats[i].stddev();
    if (pct[i]) row.pct_ex_acc_err_stderr = pct_stats[i].stddev();
    row.active = curve.counts_t[i];
  }
  return rows;
}

}  // namespace regretmeter
