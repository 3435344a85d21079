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
#include <optional>
#include <span>
#include <vector>

#include "regretmeter/corpus.hpp"
#include "regretmeter/decoding.hpp"
#include "regretmeter/language_model.hpp"
#include "regretmeter/likelihood.hpp"

namespace regretmeter {

// Per-unit step losses. A unit is a held-out sequence or a rollout; entry
// t-1 is its loss at step t, and a unit stops contributing after its last
// entry (eos or truncation).
using StepLosses = std::vector<std::vector<double>>;

struct StepMeans {
  std::vector<double> mean;          // index t-1
  std::vector<std::size_t> count;    // units active at step t
};

// Mean over active units at each step, up to `horizon`, summed in unit
// order. Stops at the first step no unit reaches. `sample` selects units
// (with repeats) for bootstrap resamples; empty means every unit once.
// Throws InfiniteLossError on a +inf loss.
StepMeans MeanByStep(const StepLosses& units, std::size_t horizon,
                     std::span<const std::size_t> sample = {});

struct BootstrapOptions {
  std::size_t resamples = 1000;
  std::uint64_t seed = 0x5eed;
};

// Per-step error eps_t of the model on oracle-visited contexts.
struct PerStepErrorSeries {
  std::vector<double> eps_t;          // index t-1
  std::vector<std::size_t> counts_t;  // non-increasing
  std::vector<double> stderr_t;       // token-level standard error of eps_t
  StepLosses units;                   // per held-out sequence

  std::size_t length() const { return eps_t.size(); }
  // eps_{<=l} = (1/l) sum_{t<=l} eps_t; 0 for l = 0.
  double eps_le(std::size_t l) const;
};

struct EpsOptions {
  // Step t scores the context of the held-out token at index
  // first_position + t, i.e. w_0^{first_position + t - 1}. Set it to the
  // number of prompt tokens after bos to line eps_t up with rollouts.
  std::size_t first_position = 0;
  std::size_t workers = 1;
  LossOptions loss;
};

// eps_t = mean over held-out sequences reaching step t of
// KL(o(.|ctx) || p(.|ctx)); positions past eos are excluded. Sequences are
// processed in sorted order (`units` follows it), so the result does not
// depend on corpus order or worker count.
PerStepErrorSeries EstimateEps(const LanguageModel& oracle, const LanguageModel& model,
                               const Corpus& heldout, std::size_t horizon,
                               const EpsOptions& opts = {});

// Inference-time regret R_{<=l}: since the oracle's own loss is zero this
// is the accumulated per-step loss on the model's rollout contexts.
struct RegretCurve {
  std::vector<double> regret_le_l;    // index l-1; R_{<=0} = 0 is implicit
  std::vector<std::size_t> counts_t;  // rollouts active at step t
  std::vector<double> stderr_le_l;    // bootstrap over rollouts
  StepLosses units;                   // per rollout

  std::size_t length() const { return regret_le_l.size(); }
  double at(std::size_t l) const { return l == 0 ? 0.0 : regret_le_l.at(l - 1); }
};

RegretCurve RegretFromRollouts(const std::vector<Rollout>& rollouts, std::size_t horizon,
                               const BootstrapOptions& bootstrap = {});

struct RegretOptions {
  std::size_t workers = 1;
  BootstrapOptions bootstrap;
  LossOptions loss;
};

// Rolls out every prompt under `spec` for `horizon` steps and folds the
// per-step KL into R_{<=l}. Prompts are sorted first; the result is
// bit-identical for any prompt order and worker count.
RegretCurve EstimateRegret(const LanguageModel& oracle, const LanguageModel& model,
                           const DecoderSpec& spec, const std::vector<Context>& prompts,
                           std::size_t horizon, std::uint64_t seed,
                           const RegretOptions& opts = {});

// Running average eps_{<=l}, index l-1.
std::vector<double> RunningMean(std::span<const double> eps_t);

// AccErr_{<=}(l) = R_{<=l} / eps_{<=l}; nullopt where eps_{<=l} = 0.
std::vector<std::optional<double>> AccErr(std::span<const double> regret_le_l,
                                          std::span<const double> eps_t);
std::vector<std::optional<double>> AccErr(const RegretCurve& curve,
                                          const PerStepErrorSeries& eps);

// %ExAccErr_{<=}(l) = (R_{<=l} - l eps_{<=l}) / (l eps_{<=l}) * 100;
// nullopt where eps_{<=l} = 0.
std::vector<std::optional<double>> ExcessAccErr(std::span<const double> regret_le_l,
                                                std::span<const double> eps_t);
std::vector<std::optional<double>> ExcessAccErr(const RegretCurve& curve,
                                                const PerStepErrorSeries& eps);

// Where R_{<=T} sits relative to T*eps and T^2*eps. The upper bound
// assumes a loss bounded in [0, 1], which KL is not, so leaving the range
// is reported rather than treated as an error.
struct BoundDiagnostic {
  enum class Position { kBelow, kAtLower, kInside, kAtUpper, kAbove };
  double lo = 0.0;
  double hi = 0.0;
  double regret = 0.0;
  double eps = 0.0;
  Position position = Position::kAtLower;
};

BoundDiagnostic DiagnoseBounds(std::span<const double> eps_t,
                               std::span<const double> regret_le_l, std::size_t horizon);
const char* ToString(BoundDiagnostic::Position position);

// Product-moment correlation. Throws std::invalid_argument on length
// mismatch, fewer than two points, or zero variance.
double Pearson(std::span<const double> xs, std::span<const double> ys);

struct PerplexityIdentity {
  double entropy_model = 0.0;   // H(p; D_h)
  double entropy_oracle = 0.0;  // H(o; D_h)
  double mean_eps = 0.0;        // token-weighted mean KL over D_h
  double residual = 0.0;        // |mean_eps - (H_model - H_oracle)|
  double stderr = 0.0;          // token-level bootstrap
  std::size_t tokens = 0;
};

// Checks eps = H(p; D_h) + c with c = -H(o; D_h) on oracle-generated data.
PerplexityIdentity CheckPerplexityIdentity(const LanguageModel& oracle,
                                           const LanguageModel& model, const Corpus& heldout,
                                           const BootstrapOptions& bootstrap = {},
                                           const LossOptions& loss = {});

// One row per l of the exposure report.
struct ExposureRow {
  std::size_t l = 0;
  double eps_le_l = 0.0;
  double regret_le_l = 0.0;
  std::optional<double> acc_err;
  std::optional<double> pct_ex_acc_err;
  double bound_lo = 0.0;  // l * eps_{<=l}
  double bound_hi = 0.0;  // l^2 * eps_{<=l}
  double stderr = 0.0;    // of regret_le_l
  double eps_stderr = 0.0;
  std::optional<double> acc_err_stderr;
  std::optional<double> pct_ex_acc_err_stderr;
  std::size_t active = 0;  // rollouts active at step l
};

// Combines eps and regret curves; acc_err / pct standard errors come from
// a joint bootstrap resampling rollouts and held-out sequences.
std::vector<ExposureRow> BuildExposureRows(const PerStepErrorSeries& eps,
                                           const RegretCurve& curve,
                                           const BootstrapOptions& bootstrap = {});

}  // namespace regretmeter
