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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "regretmeter/errors.hpp"
#include "regretmeter/exact_enum.hpp"
#include "regretmeter/fixtures.hpp"
#include "regretmeter/likelihood.hpp"
#include "regretmeter/metrics.hpp"
#include "test_support.hpp"

using namespace regretmeter;
using namespace regretmeter::testing;

namespace {

template <typename T>
void Shuffle(std::vector<T>& xs, std::uint64_t seed) {
  RngStream rng(seed);
  for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[rng.Below(i)]);
}

double RefPearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("mean by step: active units only") {
  const StepLosses units{{1, 2, 3}, {3}, {}};
  const auto m = MeanByStep(units, 10);
  CHECK(m.mean == std::vector<double>{2, 2, 3});
  CHECK(m.count == std::vector<std::size_t>{2, 1, 1});
  CHECK(MeanByStep(units, 2).mean.size() == 2);
  const std::vector<std::size_t> pick{0, 0, 2};
  const auto r = MeanByStep(units, 10, pick);
  CHECK(r.mean == std::vector<double>{1, 2, 3});
  CHECK(r.count == std::vector<std::size_t>{2, 2, 2});
  CHECK_THROWS_AS(MeanByStep(StepLosses{{1, INFINITY}}, 5), InfiniteLossError);
}

TEST_CASE("running mean, acc err and excess: worked example") {
  const std::vector<double> eps{1, 3};
  const std::vector<double> regret{2, 8};
  CHECK(RunningMean(eps) == std::vector<double>{1, 2});
  const auto acc = AccErr(regret, eps);
  CHECK(*acc[0] == 2.0);
  CHECK(*acc[1] == 4.0);
  const auto ex = ExcessAccErr(regret, eps);
  CHECK(*ex[0] == doctest::Approx(100.0));
  CHECK(*ex[1] == doctest::Approx(100.0));
  const std::vector<double> zero{0, 0};
  CHECK_FALSE(AccErr(regret, zero)[0].has_value());
  CHECK_FALSE(ExcessAccErr(regret, zero)[1].has_value());
}

TEST_CASE("acc err: property: regret equal to l eps gives AccErr = l and no excess") {
  RngStream rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.Below(50);
    std::vector<double> eps(n);
    for (auto& e : eps) e = 0.01 + rng.Uniform();
    const auto mean = RunningMean(eps);
    std::vector<double> regret(n);
    for (std::size_t i = 0; i < n; ++i) regret[i] = static_cast<double>(i + 1) * mean[i];
    const auto acc = AccErr(regret, eps);
    const auto ex = ExcessAccErr(regret, eps);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(*acc[i] == doctest::Approx(static_cast<double>(i + 1)).epsilon(1e-12));
      CHECK(std::abs(*ex[i]) < 1e-9);
    }
  }
}

TEST_CASE("bounds: positions") {
  const std::vector<double> eps(10, 0.1);
  auto at = [&](double r) {
    std::vector<double> regret(10, 0.0);
    regret[9] = r;
    return DiagnoseBounds(eps, regret, 10);
  };
  const auto d = at(5.0);
  CHECK(d.lo == doctest::Approx(1.0));
  CHECK(d.hi == doctest::Approx(10.0));
  CHECK(d.eps == doctest::Approx(0.1));
  using P = BoundDiagnostic::Position;
  CHECK(d.position == P::kInside);
  CHECK(at(1.0).position == P::kAtLower);
  CHECK(at(10.0).position == P::kAtUpper);
  CHECK(at(0.5).position == P::kBelow);
  CHECK(at(20.0).position == P::kAbove);
  CHECK(std::string(ToString(P::kAtLower)) == "at_lower");
  CHECK(std::string(ToString(P::kAbove)) == "above");
  CHECK_THROWS_AS(DiagnoseBounds(eps, eps, 11), std::invalid_argument);
}

TEST_CASE("pearson: examples, reference and errors") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(Pearson(x, std::vector<double>{2, 4, 6, 8}) == doctest::Approx(1.0));
  CHECK(Pearson(x, std::vector<double>{8, 6, 4, 2}) == doctest::Approx(-1.0));
  RngStream rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(3 + rng.Below(20)), b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.Uniform();
      b[i] = a[i] * 0.5 + rng.Uniform();
    }
    const double r = Pearson(a, b);
    CHECK(r == doctest::Approx(RefPearson(a, b)).epsilon(1e-9));
    CHECK(r <= 1.0);
    CHECK(r >= -1.0);
  }
  CHECK_THROWS_AS(Pearson(x, std::vector<double>{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Pearson(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
  CHECK_THROWS_AS(Pearson(x, std::vector<double>{3, 3, 3, 3}), std::invalid_argument);
}

TEST_CASE("eps: context-free pair is constant") {
  const auto pair = ContextFreePair();
  const Corpus heldout = SampleCorpus(pair.oracle, 50, 21, 3);
  const auto eps = EstimateEps(pair.oracle, pair.student, heldout, 20);
  const double want = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  REQUIRE(eps.length() == 20);
  for (double e : eps.eps_t) CHECK(e == doctest::Approx(want).epsilon(1e-12));
  CHECK(eps.eps_le(0) == 0.0);
  CHECK(eps.eps_le(20) == doctest::Approx(want).epsilon(1e-12));
  for (std::size_t c : eps.counts_t) CHECK(c == 50);
}

TEST_CASE("eps: agrees with the exact value within 4 standard errors") {
  const auto pair = TinyOrder1Pair();
  const std::size_t horizon = 8;
  const Corpus heldout = SampleCorpus(pair.oracle, 20000, 1 + horizon, 12);
  const auto eps = EstimateEps(pair.oracle, pair.student, heldout, horizon);
  const auto exact = RefEps(pair.oracle, pair.student, horizon);
  REQUIRE(eps.length() == exact.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    CAPTURE(t);
    CHECK(std::abs(eps.eps_t[t] - exact[t]) <= 4 * eps.stderr_t[t] + 1e-12);
  }
  for (std::size_t t = 1; t < eps.length(); ++t) CHECK(eps.counts_t[t] <= eps.counts_t[t - 1]);
}

TEST_CASE("eps: first position shifts the scored contexts") {
  const auto pair = TinyOrder1Pair();
  const Corpus heldout{{{0, 2, 3, 2, 1}, {0, 3, 3}}};
  EpsOptions opts;
  opts.first_position = 1;
  const auto eps = EstimateEps(pair.oracle, pair.student, heldout, 5, opts);
  // Step 1 scores the context w_0^1; the second sequence has one more step.
  const double a = RefKl(pair.oracle.NextDist(Context{0, 2}), pair.student.NextDist(Context{0, 2}));
  const double b = RefKl(pair.oracle.NextDist(Context{0, 3}), pair.student.NextDist(Context{0, 3}));
  REQUIRE(eps.length() == 3);
  CHECK(eps.eps_t[0] == doctest::Approx((a + b) / 2).epsilon(1e-12));
  CHECK(eps.counts_t == std::vector<std::size_t>{2, 1, 1});
}

TEST_CASE("eps: infinite loss names the context unless floored") {
  const Vocab v = AbVocab();
  const auto oracle = Unigram(v, {0, 0, 0.5, 0.5});
  const auto student = Unigram(v, {0, 0, 1.0, 0.0});
  const Corpus heldout{{{0, 2, 3}}};
  try {
    EstimateEps(oracle, student, heldout, 2);
    FAIL("expected an error");
  } catch (const InfiniteLossError& e) {
    CHECK(std::string(e.what()).find("[0") != std::string::npos);
  }
  EpsOptions opts;
  opts.loss.prob_floor = 1e-10;
  const auto eps = EstimateEps(oracle, student, heldout, 2, opts);
  CHECK(std::isfinite(eps.eps_t[0]));
}

TEST_CASE("eps: property: bit-identical under reordering and worker count") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto oracle = RandomMarkovOracle(5, 1, 0.8, 0.1, seed);
    const auto student = RandomMarkovOracle(5, 1, 0.8, 0.1, seed + 50);
    const Corpus heldout = SampleCorpus(oracle, 300, 16, seed);
    Corpus shuffled = heldout;
    Shuffle(shuffled.sequences, seed);
    EpsOptions many;
    many.workers = 3;
    const auto a = EstimateEps(oracle, student, heldout, 15);
    const auto b = EstimateEps(oracle, student, shuffled, 15, many);
    CHECK(a.eps_t == b.eps_t);
    CHECK(a.stderr_t == b.stderr_t);
    CHECK(a.counts_t == b.counts_t);
  }
}

TEST_CASE("regret: context-free pair grows linearly under every decoder") {
  const auto pair = ContextFreePair();
  const double eps = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  const std::vector<Context> prompts(20, Context{0});
  const Corpus heldout = SampleCorpus(pair.oracle, 20, 31, 1);
  const auto e = EstimateEps(pair.oracle, pair.student, heldout, 30);
  for (const auto& spec : DefaultDecoderGrid()) {
    const auto curve = EstimateRegret(pair.oracle, pair.student, spec, prompts, 30, 9);
    REQUIRE(curve.length() == 30);
    for (std::size_t l = 1; l <= 30; ++l) {
      CHECK(curve.at(l) == doctest::Approx(static_cast<double>(l) * eps).epsilon(1e-12));
    }
    const auto acc = AccErr(curve, e);
    const auto ex = ExcessAccErr(curve, e);
    for (std::size_t l = 1; l <= 30; ++l) {
      CHECK(*acc[l - 1] == doctest::Approx(static_cast<double>(l)).epsilon(1e-12));
      CHECK(std::abs(*ex[l - 1]) < 1e-9);
    }
    CHECK(DiagnoseBounds(e.eps_t, curve.regret_le_l, 30).position ==
          BoundDiagnostic::Position::kAtLower);
  }
}

TEST_CASE("regret: folds rollouts as cumulative step means") {
  const auto pair = TinyOrder1Pair();
  const std::vector<Context> prompts(30, Context{0});
  const auto rs = GenerateRollouts(pair.student, pair.oracle, prompts, decoder::Ancestral{1.0}, 10, 4);
  const auto curve = RegretFromRollouts(rs, 10);
  StepLosses units;
  for (const auto& r : rs) units.push_back(r.per_step_kl);
  const auto means = MeanByStep(units, 10);
  REQUIRE(curve.length() == means.mean.size());
  double acc = 0;
  for (std::size_t t = 0; t < curve.length(); ++t) {
    acc += means.mean[t];
    CHECK(curve.regret_le_l[t] == doctest::Approx(acc).epsilon(1e-12));
    CHECK(curve.counts_t[t] == means.count[t]);
    CHECK(curve.stderr_le_l[t] >= 0.0);
  }
}

TEST_CASE("regret: agrees with the exact value within 4 standard errors") {
  const auto pair = TinyOrder1Pair();
  const std::size_t horizon = 6;
  const std::vector<Context> prompts(15000, Context{0});
  for (const auto& spec : {DecoderSpec{decoder::Ancestral{1.0}}, DecoderSpec{decoder::Ancestral{1.3}},
                           DecoderSpec{decoder::TopK{2, 1.0}}, DecoderSpec{decoder::TopP{0.7, 1.0}}}) {
    CAPTURE(ToString(spec));
    RegretOptions opts;
    opts.bootstrap.resamples = 200;
    const auto curve = EstimateRegret(pair.oracle, pair.student, spec, prompts, horizon, 5, opts);
    const auto exact = Cumsum(RefRegretPerStep(pair.oracle, pair.student, spec, Context{0}, horizon));
    REQUIRE(curve.length() == exact.size());
    for (std::size_t l = 0; l < exact.size(); ++l) {
      CHECK(std::abs(curve.regret_le_l[l] - exact[l]) <= 4 * curve.stderr_le_l[l] + 1e-12);
    }
  }
}

TEST_CASE("regret: property: bit-identical under prompt reordering and worker count") {
  const auto pair = TinyOrder1Pair();
  std::vector<Context> prompts;
  for (int i = 0; i < 60; ++i) prompts.push_back(i % 4 == 0 ? Context{0, 3} : Context{0});
  auto shuffled = prompts;
  Shuffle(shuffled, 17);
  RegretOptions one, many;
  one.bootstrap.resamples = many.bootstrap.resamples = 50;
  many.workers = 4;
  for (const auto& spec : DefaultDecoderGrid()) {
    const auto a = EstimateRegret(pair.oracle, pair.student, spec, prompts, 12, 99, one);
    const auto b = EstimateRegret(pair.oracle, pair.student, spec, shuffled, 12, 99, many);
    CHECK(a.regret_le_l == b.regret_le_l);
    CHECK(a.stderr_le_l == b.stderr_le_l);
    CHECK(a.counts_t == b.counts_t);
  }
}

TEST_CASE("perplexity identity: eps equals the entropy gap") {
  const auto pair = TinyOrder1Pair();
  const Corpus heldout = SampleCorpus(pair.oracle, 4000, 30, 8);
  BootstrapOptions boot;
  boot.resamples = 200;
  const auto id = CheckPerplexityIdentity(pair.oracle, pair.student, heldout, boot);
  CHECK(id.tokens == heldout.token_count());
  CHECK(id.entropy_model ==
        doctest::Approx(CorpusNll(pair.student, heldout).entropy_rate()).epsilon(1e-12));
  CHECK(id.entropy_oracle ==
        doctest::Approx(CorpusNll(pair.oracle, heldout).entropy_rate()).epsilon(1e-12));
  CHECK(id.residual ==
        doctest::Approx(std::abs(id.mean_eps - (id.entropy_model - id.entropy_oracle))));
  CHECK(id.stderr > 0.0);
  CHECK(id.residual <= 4 * id.stderr);
  // An exact model has no gap at all.
  const auto self = CheckPerplexityIdentity(pair.oracle, pair.oracle, heldout, boot);
  CHECK(self.mean_eps == 0.0);
  CHECK(self.residual < 1e-12);
}

TEST_CASE("exposure rows: combine the two curves") {
  const auto pair = TinyOrder1Pair();
  const Corpus heldout = SampleCorpus(pair.oracle, 400, 11, 2);
  const auto eps = EstimateEps(pair.oracle, pair.student, heldout, 10);
  const std::vector<Context> prompts(200, Context{0});
  RegretOptions opts;
  opts.bootstrap.resamples = 100;
  const auto curve =
      EstimateRegret(pair.oracle, pair.student, decoder::Ancestral{1.0}, prompts, 10, 3, opts);
  const auto rows = BuildExposureRows(eps, curve, opts.bootstrap);
  REQUIRE(rows.size() == std::min(eps.length(), curve.length()));
  const auto acc = AccErr(curve, eps);
  for (const auto& row : rows) {
    const double l = static_cast<double>(row.l);
    CHECK(row.eps_le_l == doctest::Approx(eps.eps_le(row.l)).epsilon(1e-12));
    CHECK(row.regret_le_l == curve.at(row.l));
    CHECK(row.bound_lo == doctest::Approx(l * row.eps_le_l));
    CHECK(row.bound_hi == doctest::Approx(l * l * row.eps_le_l));
    CHECK(*row.acc_err == *acc[row.l - 1]);
    CHECK(row.active == curve.counts_t[row.l - 1]);
    // Every unit shares step 1's context, so spread starts at l = 2.
    if (row.l > 1) {
      CHECK(row.stderr > 0.0);
      CHECK(row.eps_stderr > 0.0);
      CHECK(*row.pct_ex_acc_err_stderr > 0.0);
    }
  }
}

}  // TEST_SUITE
