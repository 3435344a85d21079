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
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "regretmeter/language_model.hpp"

namespace regretmeter::cli {

// A model resolved from a source string, with what reports record about it.
struct LoadedModel {
  std::shared_ptr<const LanguageModel> model;
  std::string id;
  std::string hash;  // serialized-form hash; "" for bridge models
};

struct BridgeSettings {
  std::size_t timeout_ms = 30000;
  std::size_t max_batch = 64;
};

// builtin:<pair> | bridge[:<addr>] | <model file>. `role` picks the oracle
// or student of a builtin pair.
LoadedModel LoadModelSource(const std::string& source, const std::string& role,
                            const BridgeSettings& bridge = {});

struct OracleMakeOptions {
  std::string builtin;       // pair name; empty for a random oracle
  std::string role = "oracle";
  std::size_t vocab = 8;
  std::size_t order = 1;
  double alpha = 0.5;
  double eos_prob = 0.05;
  std::uint64_t seed = 1;
  std::string out;
};
void CmdOracleMake(const OracleMakeOptions& opts, std::ostream& log);

struct CorpusSampleOptions {
  std::string model;
  std::size_t sequences = 1000;
  std::size_t max_len = 65;
  std::uint64_t seed = 1;
  std::string out;
  // When set, a seeded split writes train to `out` and held-out here.
  double train_frac = 0.0;
  std::string heldout_out;
};
void CmdCorpusSample(const CorpusSampleOptions& opts, std::ostream& log);

struct TrainOptions {
  std::vector<std::string> corpus;
  std::string tokenizer = "ids";
  // Vocabulary source for ids corpora: a model source string.
  std::string vocab_from;
  std::size_t order = 1;
  double lambda = 0.1;
  std::string out;
};
void CmdTrain(const TrainOptions& opts, std::ostream& log);

// Writes, under config.out: exposure_<slug>.csv and .json per decoder spec,
// quality.csv and summary.csv. Returns the paths written.
std::vector<std::string> CmdEval(const RunConfig& config, std::ostream& log);
// Re-runs the evaluation recorded in an exposure sidecar.
std::vector<std::string> CmdEvalReplay(const std::string& sidecar, const std::string& out,
                                       std::size_t workers, std::ostream& log);

// Merges eval directories into table1.csv and curves_long.csv under `out`.
std::vector<std::string> CmdReport(const std::vector<std::string>& inputs,
                                   const std::string& out, std::ostream& log);

struct BridgeProbeOptions {
  std::string address;
  std::size_t timeout_ms = 30000;
  std::size_t contexts = 100;
  std::size_t max_len = 16;
  std::uint64_t seed = 1;
};
// Handshake plus a conformance pass; returns false if a check failed.
bool CmdBridgeProbe(const BridgeProbeOptions& opts, std::ostream& log);

// Full command line. Returns the process exit code.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace regretmeter::cli
