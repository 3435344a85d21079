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

#include <doctest.h>

#include <cmath>
#include <limits>

#include "regretmeter/dist.hpp"
#include "regretmeter/vocab.hpp"
#include "test_support.hpp"

using namespace regretmeter;

TEST_SUITE("vocab_dist") {
  TEST_CASE("vocab ids are dense and specials are distinct") {
    Vocab v({"<bos>", "<eos>", "a", "b"}, 0, 1);
    CHECK(v.size() == 4);
    CHECK(v.emittable() == 3);
    CHECK(v.find("b") == 3);
    CHECK_FALSE(v.find("zz").has_value());
    CHECK(v.token(2) == "a");
    CHECK_THROWS(Vocab({"<bos>", "a"}, 0, 0));
    CHECK_THROWS(Vocab({"<bos>", "<eos>", "a", "a"}, 0, 1));
    CHECK_THROWS(Vocab({"<bos>", "<eos>", "a b"}, 0, 1));
    CHECK_THROWS(Vocab({"<bos>", "<eos>"}, 0, 5));
  }

  TEST_CASE("synthetic vocab") {
    Vocab v = Vocab::Synthetic(5);
    CHECK(v.token(v.bos()) == "<bos>");
    CHECK(v.token(v.eos()) == "<eos>");
    CHECK(v.token(4) == "t4");
  }

  TEST_CASE("context rules") {
    Vocab v = testing::AbVocab();
    CHECK_NOTHROW(ValidateContext(v, Context{0}));
    CHECK_NOTHROW(ValidateContext(v, Context{0, 2, 3, 1}));
    CHECK_THROWS(ValidateContext(v, Context{}));
    CHECK_THROWS(ValidateContext(v, Context{2, 3}));
    CHECK_THROWS(ValidateContext(v, Context{0, 2, 0}));
    CHECK_THROWS(ValidateContext(v, Context{0, 1, 2}));
    CHECK_THROWS(ValidateContext(v, Context{0, 9}));
    CHECK(IsTerminal(v, Context{0, 2, 1}));
    CHECK_FALSE(IsTerminal(v, Context{0, 2}));
  }

  TEST_CASE("dist validation") {
    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK_NOTHROW(Dist::FromLogprobs({std::log(0.5), std::log(0.5), ninf}));
    CHECK_THROWS(Dist::FromLogprobs({std::log(0.5), std::log(0.4)}));
    CHECK_THROWS(Dist::FromLogprobs({std::nan(""), 0.0}));
    CHECK_THROWS(Dist::FromLogprobs({INFINITY, 0.0}));
    CHECK_THROWS(Dist::FromProbs(std::vector<double>{0.5, -0.1, 0.6}));
  }

  TEST_CASE("dist accessors") {
    Dist d = testing::P({0.2, 0.5, 0.3});
    CHECK(d.argmax() == 1);
    CHECK(d.prob(2) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(testing::P({0.5, 0.5}).argmax() == 0);
    CHECK(Dist::OneHot(3, 2).entropy() == 0.0);
    CHECK(Dist::Uniform(4).entropy() == doctest::Approx(std::log(4.0)));
    Dist u = Dist::UniformExcept(4, 0);
    CHECK(u.prob(0) == 0.0);
    CHECK(u.prob(1) == doctest::Approx(1.0 / 3));
  }

  TEST_CASE("log-softmax keeps -inf at zero mass") {
    const double ninf = -std::numeric_limits<double>::infinity();
    Dist d = Dist::FromLogits(std::vector<double>{1000.0, 1000.0, ninf});
    CHECK(d.prob(0) == doctest::Approx(0.5));
    CHECK(d.prob(2) == 0.0);
    CHECK(LogSumExp(std::vector<double>{ninf, ninf}) == ninf);
  }

  TEST_CASE("random dists are normalized to 1e-9") {
    RngStream rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> logits(1 + rng.Below(50));
      for (auto& x : logits) x = (rng.Uniform() - 0.5) * 80.0;
      Dist d = Dist::FromLogits(logits);
      double s = 0.0;
      for (double p : d.probs()) s += p;
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
  }
}
