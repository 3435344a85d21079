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

#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "regretmeter/exact_enum.hpp"
#include "regretmeter/fixtures.hpp"
#include "regretmeter/likelihood.hpp"
#include "regretmeter/metrics.hpp"
#include "regretmeter/model_io.hpp"
#include "test_support.hpp"

using namespace regretmeter;
using namespace regretmeter::testing;

namespace {

Fixture Load(const std::string& name) {
  return LoadFixture(std::string(REGRETMETER_FIXTURE_DIR) + "/" + name + ".fixture");
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void CheckClose(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CAPTURE(i);
    CHECK(std::abs(got[i] - want[i]) <= tol);
  }
}

}  // namespace

TEST_SUITE("fixtures") {

TEST_CASE("files: parse and re-serialize byte for byte") {
  for (const char* name : {"tiny", "trap"}) {
    const std::string path = std::string(REGRETMETER_FIXTURE_DIR) + "/" + name + ".fixture";
    const Fixture f = LoadFixture(path);
    std::ostringstream out;
    WriteFixture(out, f);
    CHECK(out.str() == ReadFile(path));
  }
}

TEST_CASE("files: shipped models match the builtin pairs") {
  for (const char* name : {"tiny", "trap"}) {
    const Fixture f = Load(name);
    const auto pair = BuiltinPair(name);
    CHECK(ModelToString(f.oracle) == ModelToString(TabularModel(pair.oracle)));
    CHECK(ModelToString(f.student) == ModelToString(TabularModel(pair.student)));
  }
}

TEST_CASE("tiny: expected vectors agree with the recursive reference") {
  const Fixture f = Load("tiny");
  const auto& oracle = AsLanguageModel(f.oracle);
  const auto& student = AsLanguageModel(f.student);
  CHECK(f.horizon == 5);
  CheckClose(f.expected.at("eps_t"), RefEps(oracle, student, f.horizon), 1e-12);
  for (const auto& spec : DefaultDecoderGrid()) {
    CAPTURE(ToString(spec));
    const auto& want = f.expected.at("regret:" + ToString(spec));
    if (std::holds_alternative<decoder::Beam>(spec)) {
      // Loss along the beam hypothesis.
      const auto beam = BeamSearch(student, Context{0}, std::get<decoder::Beam>(spec).width, 1 + f.horizon);
      std::vector<double> per_step;
      Context ctx{0};
      for (TokenId w : beam.continuation) {
        per_step.push_back(RefKl(oracle.NextDist(ctx), student.NextDist(ctx)));
        ctx.push_back(w);
      }
      CheckClose(want, Cumsum(per_step), 1e-12);
    } else {
      CheckClose(want, Cumsum(RefRegretPerStep(oracle, student, spec, Context{0}, f.horizon)), 1e-12);
    }
  }
}

TEST_CASE("tiny: Monte-Carlo estimates sit within 3 standard errors") {
  const Fixture f = Load("tiny");
  const auto& oracle = AsLanguageModel(f.oracle);
  const auto& student = AsLanguageModel(f.student);
  const Corpus heldout = SampleCorpus(oracle, 2000, 1 + f.horizon, 21);
  const auto eps = EstimateEps(oracle, student, heldout, f.horizon);
  const auto& eps_want = f.expected.at("eps_t");
  for (std::size_t t = 0; t < eps_want.size(); ++t) {
    CHECK(std::abs(eps.eps_t[t] - eps_want[t]) <= 3 * eps.stderr_t[t] + 1e-12);
  }
  const std::vector<Context> prompts(2000, Context{0});
  RegretOptions opts;
  opts.bootstrap.resamples = 300;
  for (const auto& spec : DefaultDecoderGrid()) {
    CAPTURE(ToString(spec));
    const auto curve = EstimateRegret(oracle, student, spec, prompts, f.horizon, 22, opts);
    const auto& want = f.expected.at("regret:" + ToString(spec));
    REQUIRE(curve.length() == want.size());
    for (std::size_t l = 0; l < want.size(); ++l) {
      CHECK(std::abs(curve.regret_le_l[l] - want[l]) <= 3 * curve.stderr_le_l[l] + 1e-12);
    }
  }
}

TEST_CASE("trap: golden vectors are reproduced") {
  const Fixture f = Load("trap");
  const auto& oracle = AsLanguageModel(f.oracle);
  const auto& student = AsLanguageModel(f.student);
  CHECK(f.horizon == 64);
  CheckClose(MarkovExactEps(oracle, student, f.horizon).per_step, f.expected.at("eps_t"), 1e-12);
  const std::vector<Context> prompts(2000, Context{0});
  RegretOptions opts;
  opts.bootstrap.resamples = 200;
  for (const auto& spec : DefaultDecoderGrid()) {
    const std::string name = ToString(spec);
    CAPTURE(name);
    const auto& exact = f.expected.at("regret:" + name);
    CheckClose(MarkovExactRegret(oracle, student, spec, Context{0}, f.horizon).Cumulative(), exact,
               1e-10);
    const auto mc = EstimateRegret(oracle, student, spec, prompts, f.horizon, 1, opts);
    CheckClose(mc.regret_le_l, f.expected.at("mc_regret:" + name), 1e-10);
    CheckClose(mc.stderr_le_l, f.expected.at("mc_regret_se:" + name), 1e-10);
    // The frozen Monte-Carlo curve agrees with the exact one.
    const auto& se = f.expected.at("mc_regret_se:" + name);
    for (std::size_t l = 0; l < exact.size(); ++l) {
      CHECK(std::abs(mc.regret_le_l[l] - exact[l]) <= 4 * se[l] + 1e-9);
    }
  }
}

TEST_CASE("trap: greedy decoding walks into the trap and stays") {
  const auto pair = TrapPair();
  RngStream rng(0);
  const auto r = GenerateRollout(pair.student, pair.oracle, Context{0}, decoder::Greedy{}, 65, rng);
  REQUIRE(r.continuation.size() == 64);
  const TokenId x = *pair.oracle.vocab().find("x");
  for (std::size_t i = 7; i < r.continuation.size(); ++i) CHECK(r.continuation[i] == x);
  // The oracle leaves "x x" with probability 0.97; the student stays with 0.55.
  const Context xx{0, x, x};
  CHECK(pair.oracle.NextDist(xx).prob(x) == doctest::Approx(0.03));
  CHECK(pair.student.NextDist(xx).prob(x) == doctest::Approx(0.55));
}

}  // TEST_SUITE
