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

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "regretmeter/markov_oracle.hpp"
#include "regretmeter/ngram_student.hpp"

namespace regretmeter {

// Versioned flat text format for tabular models:
//
//   regretmeter-model 1
//   kind markov|ngram
//   name <id>
//   vocab <V> <bos> <eos>
//   token <id> <string>          (V lines)
//   order <n>
//   lambda <x>                   (ngram only)
//   row <state ids...> : <V values>
//   end
//
// Markov rows hold logprobs, ngram rows hold counts. Reals are written with
// 17 significant digits so a write/read round trip is bit-exact.
using TabularModel = std::variant<MarkovOracle, NGramStudent>;

inline constexpr int kModelFormatVersion = 1;

void WriteModel(std::ostream& out, const MarkovOracle& model);
void WriteModel(std::ostream& out, const NGramStudent& model);
void WriteModel(std::ostream& out, const TabularModel& model);
std::string ModelToString(const TabularModel& model);

// Reads one model block, consuming through its `end` line. `line_no` tracks
// the current line for error messages.
TabularModel ReadModel(std::istream& in, std::size_t& line_no);
TabularModel ReadModel(std::istream& in);

void SaveModel(const std::string& path, const TabularModel& model);
TabularModel LoadModel(const std::string& path);

const LanguageModel& AsLanguageModel(const TabularModel& model);

// Stable 64-bit hash of the serialized form, for report metadata.
std::string ModelHash(const TabularModel& model);

// Formats a double with 17 significant digits ("-inf"/"inf" for infinities).
std::string FormatReal(double x);
// Shortest representation that parses back to the same double.
std::string FormatShortest(double x);

// A certification fixture: oracle, student, and frozen expected vectors.
//
//   regretmeter-fixture 1
//   name <name>
//   horizon <T>
//   [oracle]  <model block>
//   [student] <model block>
//   expected <key> <n> <values...>     (any number of lines)
//   end
struct Fixture {
  std::string name;
  std::size_t horizon = 0;
  TabularModel oracle;
  TabularModel student;
  // Keys are e.g. "eps_t", "regret:greedy", "regret:temp:t=1.2".
  std::map<std::string, std::vector<double>> expected;
};

void WriteFixture(std::ostream& out, const Fixture& fixture);
Fixture ReadFixture(std::istream& in);
Fixture LoadFixture(const std::string& path);
void SaveFixture(const std::string& path, const Fixture& fixture);

}  // namespace regretmeter
