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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "json.hpp"
#include "regretmeter/corpus_io.hpp"
#include "regretmeter/errors.hpp"
#include "regretmeter/model_io.hpp"
#include "regretmeter/report_io.hpp"

using namespace regretmeter;
using namespace regretmeter::cli;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult Run(std::vector<std::string> args) {
  args.insert(args.begin(), "regretmeter");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
std::string Scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("regretmeter_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool Contains(const std::string& s, const std::string& needle) {
  return s.find(needle) != std::string::npos;
}

std::vector<std::string> SmallEval(const std::string& out,
                                   const std::string& specs = "greedy,temp:t=1.2") {
  return {"eval", "--oracle", "builtin:tiny", "--student", "builtin:tiny", "--horizon", "6",
          "--prompts", "40", "--heldout", "40", "--bootstrap", "20", "--specs",
          specs, "--out", out};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config text: comments, spacing and errors") {
  const auto m = ParseConfigText("# run\nseed = 7\n  horizon=12  # inline\n\n");
  CHECK(m.at("seed") == "7");
  CHECK(m.at("horizon") == "12");
  try {
    ParseConfigText("seed = 1\nseed = 2\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(Contains(e.what(), "seed"));
  }
  CHECK_THROWS_AS(ParseConfigText("just words\n"), ParseError);
}

TEST_CASE("run config: every problem is reported at once") {
  try {
    ParseRunConfig({{"oracle", "builtin:tiny"},
                    {"student", "builtin:tiny"},
                    {"specs", "beem:k=5"},
                    {"horizon", "-3"},
                    {"colour", "blue"}});
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.problems().size() >= 3);
    const std::string what = e.what();
    CHECK(Contains(what, "greedy | beam:k="));
    CHECK(Contains(what, "horizon"));
    CHECK(Contains(what, "colour"));
  }
  CHECK_THROWS_AS(ParseRunConfig({}), ConfigError);
}

TEST_CASE("run config: property: serialized form round trips") {
  RunConfig c;
  c.seed = 42;
  c.oracle = "builtin:trap";
  c.student = "ngram";
  c.student_order = 2;
  c.lambda = 0.25;
  c.specs = {decoder::TopK{10, 0.9}, decoder::Greedy{}};
  c.horizon = 33;
  c.prob_floor = 1e-10;
  c.include_prompt = false;
  c.out = "ignored";
  c.workers = 5;
  const auto map = ToConfigMap(c);
  CHECK(map.count("out") == 0);
  CHECK(map.count("workers") == 0);
  const RunConfig back = ParseRunConfig(map);
  CHECK(ToConfigMap(back) == map);
  CHECK(back.specs == c.specs);
  CHECK(*back.prob_floor == 1e-10);
  for (const auto& key : ConfigKeys()) {
    if (key != "out" && key != "workers" && key != "prob_floor" && key != "prompts_file" &&
        key != "heldout_file") {
      CHECK_MESSAGE(map.count(key) == 1, key);
    }
  }
}

TEST_CASE("eval: writes reports, sidecars and summaries") {
  const std::string dir = Scratch("eval");
  const auto made = Run({"oracle", "make", "--builtin", "tiny", "--out", dir + "/o.model"});
  REQUIRE_MESSAGE(made.code == 0, made.err);
  auto args = SmallEval(dir);
  args[4] = dir + "/o.model";
  const auto r = Run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"exposure_greedy.csv", "exposure_greedy.json", "exposure_temp_t1p2.csv",
                        "exposure_temp_t1p2.json", "quality.csv", "summary.csv"}) {
    CHECK_MESSAGE(fs::exists(dir + "/" + f), f);
  }
  std::ifstream csv(dir + "/exposure_greedy.csv");
  const auto rows = ReadExposureCsv(csv);
  REQUIRE(rows.size() == 6);
  // Student = oracle: everything is exactly zero and ratios are undefined.
  for (const auto& row : rows) {
    CHECK(row.regret_le_l == 0.0);
    CHECK(row.eps_le_l == 0.0);
    CHECK(row.bound_hi == 0.0);
    CHECK_FALSE(row.acc_err.has_value());
  }
  const auto sidecar = nlohmann::json::parse(ReadFile(dir + "/exposure_greedy.json"));
  CHECK(sidecar.at("spec") == "greedy");
  CHECK(sidecar.at("config").at("horizon") == "6");
  CHECK(sidecar.at("seeds").at("master") == 1);
  CHECK(sidecar.at("models").at("oracle").at("id") == "tiny-oracle");
  CHECK(sidecar.contains("perplexity_identity"));
  CHECK(sidecar.contains("bound"));
  std::ifstream q(dir + "/quality.csv");
  CHECK(ReadQualityCsv(q).size() == 2);
  std::ifstream s(dir + "/summary.csv");
  const auto summary = ReadSummaryCsv(s);
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].bound_position == "at_lower");

  // The tiny student differs from its oracle.
  REQUIRE(Run(SmallEval(dir + "/pair")).code == 0);
  std::ifstream pair_csv(dir + "/pair/exposure_greedy.csv");
  const auto pair_rows = ReadExposureCsv(pair_csv);
  for (const auto& row : pair_rows) {
    CHECK(row.regret_le_l > 0.0);
    CHECK(row.bound_lo <= row.regret_le_l + 1e-12);
    CHECK(row.regret_le_l <= row.bound_hi + 1e-12);
  }
}

TEST_CASE("eval: config file, --set and flags, flags win") {
  const std::string dir = Scratch("precedence");
  {
    std::ofstream cfg(dir + "/run.cfg");
    cfg << "oracle = builtin:tiny\nstudent = builtin:tiny\nhorizon = 9\nprompts = 20\n"
           "heldout = 20\nbootstrap = 10\nspecs = greedy\nseed = 3\n";
  }
  const auto r = Run({"eval", "--config", dir + "/run.cfg", "--set", "horizon=7", "--set",
                      "seed=4", "--seed", "5", "--out", dir + "/out"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto sidecar = nlohmann::json::parse(ReadFile(dir + "/out/exposure_greedy.json"));
  CHECK(sidecar.at("config").at("horizon") == "7");
  CHECK(sidecar.at("config").at("seed") == "5");
}

TEST_CASE("eval: usage errors exit with code 2 and name the grammar") {
  const std::string dir = Scratch("usage");
  auto args = SmallEval(dir);
  args[14] = "beem:k=5";
  const auto r = Run(args);
  CHECK(r.code == 2);
  CHECK(Contains(r.err, "greedy | beam:k="));
  const auto missing = Run({"eval", "--out", dir});
  CHECK(missing.code == 2);
  CHECK(Contains(missing.err, "oracle"));
  CHECK(Contains(missing.err, "student"));
  CHECK(Run({"frobnicate"}).code != 0);
  const auto bad_model = Run({"eval", "--oracle", dir + "/nope.model", "--student", "builtin:tiny",
                              "--out", dir});
  CHECK(bad_model.code == 1);
  CHECK(Contains(bad_model.err, "nope.model"));
}

TEST_CASE("eval: replay and worker count give identical bytes") {
  const std::string dir = Scratch("replay");
  REQUIRE(Run(SmallEval(dir + "/a", "temp:t=1,topp:p=0.9")).code == 0);
  auto many = SmallEval(dir + "/b", "temp:t=1,topp:p=0.9");
  many.insert(many.end(), {"--workers", "3"});
  REQUIRE(Run(many).code == 0);
  const auto r = Run({"eval", "--replay", dir + "/a/exposure_temp_t1.json", "--out", dir + "/c"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"exposure_temp_t1.csv", "exposure_topp_p0p9.csv", "quality.csv",
                        "summary.csv"}) {
    const std::string a = ReadFile(dir + "/a/" + f);
    CHECK(!a.empty());
    CHECK(a == ReadFile(dir + "/b/" + f));
    CHECK(a == ReadFile(dir + "/c/" + f));
  }
}

TEST_CASE("report: merges eval directories") {
  const std::string dir = Scratch("report");
  REQUIRE(Run(SmallEval(dir + "/a")).code == 0);
  auto trap = SmallEval(dir + "/b");
  trap[2] = "builtin:trap";
  trap[4] = "builtin:trap";
  REQUIRE(Run(trap).code == 0);
  const auto r = Run({"report", "--in", dir + "/a", "--in", dir + "/b", "--out", dir + "/r"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string table = ReadFile(dir + "/r/table1.csv");
  CHECK(table.rfind("model,spec,pct_ex_acc_err,pct_ex_acc_err_stderr,seq_rep_4,rep128,wrep128,uniq,", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 4);
  CHECK(Contains(table, "trap-student,greedy,"));
  const std::string curves = ReadFile(dir + "/r/curves_long.csv");
  CHECK(curves.rfind("model,spec,l,metric,value,stderr\n", 0) == 0);
  CHECK(Contains(curves, ",pct_ex_acc_err,"));
  CHECK(Run({"report", "--in", dir + "/missing", "--out", dir + "/r2"}).code == 1);
}

TEST_CASE("oracle make, corpus sample and train chain together") {
  const std::string dir = Scratch("pipeline");
  auto r = Run({"oracle", "make", "--vocab", "6", "--order", "2", "--seed", "3", "--out",
                dir + "/o.model"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  r = Run({"corpus", "sample", "--model", dir + "/o.model", "-n", "200", "--max-len", "15",
           "--out", dir + "/train.txt", "--split", "0.75", "--heldout-out", dir + "/held.txt"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto oracle = LoadModelSource(dir + "/o.model", "oracle");
  CHECK(ReadIdsFile(dir + "/train.txt", oracle.model->vocab()).sequences.size() == 150);
  CHECK(ReadIdsFile(dir + "/held.txt", oracle.model->vocab()).sequences.size() == 50);
  r = Run({"train", "--corpus", dir + "/train.txt", "--vocab-from", dir + "/o.model", "--order",
           "1", "--lambda", "0.5", "--out", dir + "/s.model"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto student = LoadModelSource(dir + "/s.model", "student");
  CHECK(student.model->markov_order() == std::optional<std::size_t>(1));
  CHECK(!student.hash.empty());
  r = Run({"eval", "--oracle", dir + "/o.model", "--student", dir + "/s.model", "--horizon", "8",
           "--prompts", "30", "--heldout-file", dir + "/held.txt", "--bootstrap", "10", "--specs",
           "greedy", "--out", dir + "/eval"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir + "/eval/exposure_greedy.csv"));

  // Text corpora train with their own vocabulary.
  {
    std::ofstream t(dir + "/doc.txt");
    t << "the cat sat on the mat";
  }
  r = Run({"train", "--corpus", dir + "/doc.txt", "--tokenizer", "whitespace", "--out",
           dir + "/w.model"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(LoadModelSource(dir + "/w.model", "student").model->vocab().find("mat").has_value());
}

TEST_CASE("model sources") {
  CHECK(LoadModelSource("builtin:trap", "oracle").id == "trap-oracle");
  CHECK(LoadModelSource("builtin:trap", "student").id == "trap-student");
  CHECK_THROWS(LoadModelSource("builtin:nope", "oracle"));
  const auto bridged = LoadModelSource(
      std::string("bridge:stdio:") + REGRETMETER_FAKE_BRIDGE + " tiny ok", "student");
  CHECK(bridged.id == "bridge:tiny-oracle");
  CHECK(bridged.hash.empty());
}

TEST_CASE("bridge probe: pass and fail") {
  std::ostringstream log;
  BridgeProbeOptions ok;
  ok.address = std::string("stdio:") + REGRETMETER_FAKE_BRIDGE + " tiny ok";
  ok.contexts = 30;
  CHECK(CmdBridgeProbe(ok, log));
  BridgeProbeOptions bad = ok;
  bad.address = std::string("stdio:") + REGRETMETER_FAKE_BRIDGE + " tiny unnormalized";
  std::ostringstream bad_log;
  CHECK_FALSE(CmdBridgeProbe(bad, bad_log));
  CHECK(Contains(bad_log.str(), "not normalized"));
}

}  // TEST_SUITE
