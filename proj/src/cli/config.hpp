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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regretmeter/decoding.hpp"
#include "regretmeter/errors.hpp"

namespace regretmeter::cli {

using ConfigMap = std::map<std::string, std::string>;

// Invalid run configuration; what() lists every problem, one per line.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Flat "key = value" file; '#' starts a comment. Throws ParseError on a
// line without '=' or a repeated key.
ConfigMap ReadConfigFile(const std::string& path);
ConfigMap ParseConfigText(const std::string& text);

// Everything an eval run depends on. `out` and `workers` do not affect
// results and are left out of the serialized form.
struct RunConfig {
  std::uint64_t seed = 1;
  // builtin:<pair> | bridge[:<addr>] | <model file>
  std::string oracle;
  // builtin:<pair> | bridge[:<addr>] | ngram | <model file>
  std::string student;
  std::size_t student_order = 1;
  double lambda = 0.1;
  std::size_t train_sequences = 2000;
  std::vector<DecoderSpec> specs = DefaultDecoderGrid();
  std::size_t horizon = 64;
  std::size_t prompts = 2000;
  std::size_t prompt_len = 0;
  std::size_t heldout = 2000;
  std::string prompts_file;
  std::string heldout_file;
  std::size_t chunk_len = 512;
  std::size_t bootstrap = 1000;
  std::optional<double> prob_floor;
  std::size_t window = 128;
  bool include_prompt = true;
  std::size_t bridge_timeout_ms = 30000;
  std::size_t bridge_batch = 64;

  std::string out;
  std::size_t workers = 1;
};

// Keys accepted in config files and --set overrides.
const std::vector<std::string>& ConfigKeys();

// Validates and converts; collects every problem before throwing.
RunConfig ParseRunConfig(const ConfigMap& map);
// Normalized key/value form of everything that affects results.
ConfigMap ToConfigMap(const RunConfig& config);

}  // namespace regretmeter::cli
