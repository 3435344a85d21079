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

#include "regretmeter/model_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "regretmeter/errors.hpp"
#include "regretmeter/rng.hpp"

namespace regretmeter {

std::string FormatReal(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string FormatShortest(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

// Splits a line on single spaces; empty fields are not produced.
std::vector<std::string> Fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

double ParseReal(const std::string& s, std::size_t line_no) {
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("not a real number: '" + s + "'", line_no);
  }
  return v;
}

long long ParseInt(const std::string& s, std::size_t line_no) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("not an integer: '" + s + "'", line_no);
  }
  return v;
}

bool NextLine(std::istream& in, std::string& line, std::size_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

std::vector<std::string> ExpectKey(std::istream& in, std::size_t& line_no,
                                   const std::string& key, std::size_t min_fields) {
  std::string line;
  if (!NextLine(in, line, line_no)) {
    throw ParseError("unexpected end of input, expected '" + key + "'", line_no);
  }
  auto f = Fields(line);
  if (f.empty() || f[0] != key) {
    throw ParseError("expected '" + key + "', got '" + line + "'", line_no);
  }
  if (f.size() < min_fields) throw ParseError("too few fields for '" + key + "'", line_no);
  return f;
}

void WriteHeader(std::ostream& out, const char* kind, const std::string& name,
                 const Vocab& vocab, std::size_t order) {
  out << "regretmeter-model " << kModelFormatVersion << "\n";
  out << "kind " << kind << "\n";
  out << "name " << name << "\n";
  out << "vocab " << vocab.size() << " " << vocab.bos() << " " << vocab.eos() << "\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << "token " << i << " " << vocab.tokens()[i] << "\n";
  }
  out << "order " << order << "\n";
}

void WriteRow(std::ostream& out, std::span<const TokenId> state,
              std::span<const double> values, bool as_counts) {
  out << "row";
  for (TokenId t : state) out << " " << t;
  out << " :";
  for (double v : values) out << " " << (as_counts ? FormatShortest(v) : FormatReal(v));
  out << "\n";
}

}  // namespace

void WriteModel(std::ostream& out, const MarkovOracle& model) {
  WriteHeader(out, "markov", model.model_id(), model.vocab(), model.order());
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    WriteRow(out, model.StateTokens(s), model.row(s).logprobs(), false);
  }
  out << "end\n";
}

void WriteModel(std::ostream& out, const NGramStudent& model) {
  WriteHeader(out, "ngram", model.model_id(), model.vocab(), model.order());
  out << "lambda " << FormatReal(model.lambda()) << "\n";
  for (const auto& [state, row] : model.counts()) WriteRow(out, state, row, true);
  out << "end\n";
}

void WriteModel(std::ostream& out, const TabularModel& model) {
  std::visit([&](const auto& m) { WriteModel(out, m); }, model);
}

std::string ModelToString(const TabularModel& model) {
  std::ostringstream ss;
  WriteModel(ss, model);
  return ss.str();
}

TabularModel ReadModel(std::istream& in, std::size_t& line_no) {
  auto magic = ExpectKey(in, line_no, "regretmeter-model", 2);
  if (ParseInt(magic[1], line_no) != kModelFormatVersion) {
    throw ParseError("unsupported model format version " + magic[1], line_no);
  }
  const std::string kind = ExpectKey(in, line_no, "kind", 2)[1];
  if (kind != "markov" && kind != "ngram") {
    throw ParseError("unknown model kind '" + kind + "'", line_no);
  }
  const std::string name = ExpectKey(in, line_no, "name", 2)[1];
  auto vf = ExpectKey(in, line_no, "vocab", 4);
  const long long v = ParseInt(vf[1], line_no);
  if (v < 2) throw ParseError("vocab size must be >= 2", line_no);
  const auto bos = static_cast<TokenId>(ParseInt(vf[2], line_no));
  const auto eos = static_cast<TokenId>(ParseInt(vf[3], line_no));
  std::vector<std::string> tokens;
  for (long long i = 0; i < v; ++i) {
    auto tf = ExpectKey(in, line_no, "token", 3);
    if (ParseInt(tf[1], line_no) != i) throw ParseError("token ids must be dense and ordered", line_no);
    tokens.push_back(tf[2]);
  }
  Vocab vocab = [&] {
    try {
      return Vocab(std::move(tokens), bos, eos);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }();
  const long long order = ParseInt(ExpectKey(in, line_no, "order", 2)[1], line_no);
  if (order < 0) throw ParseError("negative order", line_no);
  double lambda = 0.0;
  if (kind == "ngram") lambda = ParseReal(ExpectKey(in, line_no, "lambda", 2)[1], line_no);

  std::vector<std::pair<std::vector<TokenId>, std::vector<double>>> rows;
  std::string line;
  for (;;) {
    if (!NextLine(in, line, line_no)) throw ParseError("missing 'end'", line_no);
    auto f = Fields(line);
    if (f.size() == 1 && f[0] == "end") break;
    if (f.empty() || f[0] != "row") throw ParseError("expected 'row' or 'end'", line_no);
    const auto o = static_cast<std::size_t>(order);
    if (f.size() != 1 + o + 1 + static_cast<std::size_t>(v) || f[1 + o] != ":") {
      throw ParseError("malformed row: expected " + std::to_string(order) +
                           " state ids, ':' and " + std::to_string(v) + " values",
                       line_no);
    }
    std::vector<TokenId> state;
    for (std::size_t i = 0; i < o; ++i) {
      const long long t = ParseInt(f[1 + i], line_no);
      if (t < 0 || t >= v) throw ParseError("state id out of range", line_no, 0);
      state.push_back(static_cast<TokenId>(t));
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < static_cast<std::size_t>(v); ++i) {
      values.push_back(ParseReal(f[2 + o + i], line_no));
    }
    rows.emplace_back(std::move(state), std::move(values));
  }

  try {
    if (kind == "markov") {
      std::size_t num_states = 1;
      for (long long i = 0; i < order; ++i) num_states *= vocab.size();
      if (rows.size() != num_states) {
        throw ParseError("Markov table has " + std::to_string(rows.size()) +
                             " rows, expected " + std::to_string(num_states),
                         line_no);
      }
      std::vector<Dist> table(num_states, Dist::OneHot(vocab.size(), vocab.eos()));
      std::vector<bool> seen(table.size(), false);
      for (auto& [state, values] : rows) {
        std::size_t idx = 0;
        for (TokenId t : state) idx = idx * vocab.size() + static_cast<std::size_t>(t);
        if (seen[idx]) throw ParseError("duplicate state row", line_no);
        seen[idx] = true;
        table[idx] = Dist::FromLogprobs(std::move(values));
      }
      return MarkovOracle(std::move(vocab), static_cast<std::size_t>(order),
                          std::move(table), name);
    }
    NGramStudent::CountTable counts;
    for (auto& [state, values] : rows) {
      if (!counts.emplace(std::move(state), std::move(values)).second) {
        throw ParseError("duplicate state row", line_no);
      }
    }
    return NGramStudent(std::move(vocab), static_cast<std::size_t>(order), lambda,
                        std::move(counts), name);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_no);
  }
}

TabularModel ReadModel(std::istream& in) {
  std::size_t line_no = 0;
  return ReadModel(in, line_no);
}

void SaveModel(const std::string& path, const TabularModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  WriteModel(out, model);
  if (!out) throw Error("write to '" + path + "' failed");
}

TabularModel LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  try {
    return ReadModel(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

const LanguageModel& AsLanguageModel(const TabularModel& model) {
  return std::visit([](const auto& m) -> const LanguageModel& { return m; }, model);
}

std::string ModelHash(const TabularModel& model) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(Fnv1a(ModelToString(model))));
  return buf;
}

void WriteFixture(std::ostream& out, const Fixture& fixture) {
  out << "regretmeter-fixture " << kModelFormatVersion << "\n";
  out << "name " << fixture.name << "\n";
  out << "horizon " << fixture.horizon << "\n";
  out << "[oracle]\n";
  WriteModel(out, fixture.oracle);
  out << "[student]\n";
  WriteModel(out, fixture.student);
  for (const auto& [key, values] : fixture.expected) {
    out << "expected " << key << " " << values.size();
    for (double v : values) out << " " << FormatReal(v);
    out << "\n";
  }
  out << "end\n";
}

Fixture ReadFixture(std::istream& in) {
  std::size_t line_no = 0;
  auto magic = ExpectKey(in, line_no, "regretmeter-fixture", 2);
  if (ParseInt(magic[1], line_no) != kModelFormatVersion) {
    throw ParseError("unsupported fixture format version " + magic[1], line_no);
  }
  std::string name = ExpectKey(in, line_no, "name", 2)[1];
  const long long horizon = ParseInt(ExpectKey(in, line_no, "horizon", 2)[1], line_no);
  ExpectKey(in, line_no, "[oracle]", 1);
  TabularModel oracle = ReadModel(in, line_no);
  ExpectKey(in, line_no, "[student]", 1);
  TabularModel student = ReadModel(in, line_no);
  std::map<std::string, std::vector<double>> expected;
  std::string line;
  for (;;) {
    if (!NextLine(in, line, line_no)) throw ParseError("missing 'end'", line_no);
    auto f = Fields(line);
    if (f.size() == 1 && f[0] == "end") break;
    if (f.size() < 3 || f[0] != "expected") throw ParseError("expected 'expected' or 'end'", line_no);
    const long long n = ParseInt(f[2], line_no);
    if (n < 0 || f.size() != 3 + static_cast<std::size_t>(n)) {
      throw ParseError("expected-values count mismatch", line_no);
    }
    std::vector<double> values;
    for (long long i = 0; i < n; ++i) values.push_back(ParseReal(f[3 + i], line_no));
    expected[f[1]] = std::move(values);
  }
  return Fixture{std::move(name), static_cast<std::size_t>(horizon), std::move(oracle),
                 std::move(student), std::move(expected)};
}

Fixture LoadFixture(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open fixture file '" + path + "'");
  try {
    return ReadFixture(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void SaveFixture(const std::string& path, const Fixture& fixture) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  WriteFixture(out, fixture);
}

}  // namespace regretmeter
