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

#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "regretmeter/model_io.hpp"

namespace regretmeter::cli {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string JoinProblems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) out += "\n  " + p;
  return out;
}

// Collects conversion errors instead of stopping at the first one.
class Reader {
 public:
  explicit Reader(const ConfigMap& map) : map_(map) {}

  template <typename T>
  void Count(const char* key, T& dst, std::size_t min = 0) {
    const auto it = map_.find(key);
    if (it == map_.end()) return;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      problems.push_back(std::string(key) + ": expected a non-negative integer, got '" + s + "'");
    } else if (v < min) {
      problems.push_back(std::string(key) + ": must be >= " + std::to_string(min));
    } else {
      dst = static_cast<T>(v);
    }
  }

  void Real(const char* key, double& dst) {
    const auto it = map_.find(key);
    if (it == map_.end()) return;
    const auto& s = it->second;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), dst);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      problems.push_back(std::string(key) + ": expected a number, got '" + s + "'");
    }
  }

  void Bool(const char* key, bool& dst) {
    const auto it = map_.find(key);
    if (it == map_.end()) return;
    if (it->second == "true" || it->second == "1") {
      dst = true;
    } else if (it->second == "false" || it->second == "0") {
      dst = false;
    } else {
      problems.push_back(std::string(key) + ": expected true or false, got '" + it->second + "'");
    }
  }

  void String(const char* key, std::string& dst) {
    const auto it = map_.find(key);
    if (it != map_.end()) dst = it->second;
  }

  std::vector<std::string> problems;

 private:
  const ConfigMap& map_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error(JoinProblems(problems)), problems_(std::move(problems)) {}

ConfigMap ParseConfigText(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = Trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (!map.emplace(key, Trim(line.substr(eq + 1))).second) {
      throw ParseError("duplicate key '" + key + "'", line_no);
    }
  }
  return map;
}

ConfigMap ReadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return ParseConfigText(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys{
      "seed",       "oracle",       "student",      "student_order",     "lambda",
      "train_sequences", "specs",   "horizon",      "prompts",           "prompt_len",
      "heldout",    "prompts_file", "heldout_file", "chunk_len",         "bootstrap",
      "prob_floor", "window",       "include_prompt", "bridge_timeout_ms", "bridge_batch",
      "out",        "workers"};
  return keys;
}

RunConfig ParseRunConfig(const ConfigMap& map) {
  RunConfig c;
  Reader r(map);
  for (const auto& [key, value] : map) {
    const auto& keys = ConfigKeys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      r.problems.push_back("unknown key '" + key + "'");
    }
  }
  r.Count("seed", c.seed);
  r.String("oracle", c.oracle);
  r.String("student", c.student);
  r.Count("student_order", c.student_order);
  r.Real("lambda", c.lambda);
  r.Count("train_sequences", c.train_sequences, 1);
  if (const auto it = map.find("specs"); it != map.end()) {
    try {
      c.specs = ParseDecoderSpecList(it->second);
      if (c.specs.empty()) r.problems.push_back("specs: empty list");
    } catch (const std::exception& e) {
      r.problems.push_back(std::string("specs: ") + e.what());
    }
  }
  r.Count("horizon", c.horizon, 1);
  r.Count("prompts", c.prompts, 1);
  r.Count("prompt_len", c.prompt_len);
  r.Count("heldout", c.heldout, 1);
  r.String("prompts_file", c.prompts_file);
  r.String("heldout_file", c.heldout_file);
  r.Count("chunk_len", c.chunk_len, 2);
  r.Count("bootstrap", c.bootstrap);
  if (map.count("prob_floor")) {
    double floor = 0.0;
    r.Real("prob_floor", floor);
    if (!(floor > 0.0 && floor < 1.0)) {
      r.problems.push_back("prob_floor: must be in (0, 1)");
    }
    c.prob_floor = floor;
  }
  r.Count("window", c.window);
  r.Bool("include_prompt", c.include_prompt);
  r.Count("bridge_timeout_ms", c.bridge_timeout_ms, 1);
  r.Count("bridge_batch", c.bridge_batch, 1);
  r.String("out", c.out);
  r.Count("workers", c.workers, 1);

  if (c.oracle.empty()) r.problems.push_back("oracle: required");
  if (c.student.empty()) r.problems.push_back("student: required");
  if (!(c.lambda >= 0.0)) r.problems.push_back("lambda: must be >= 0");
  if (!c.prompts_file.empty() && c.prompt_len == 0) {
    r.problems.push_back("prompt_len: must be > 0 when prompts_file is set");
  }
  if (!c.prompts_file.empty() && c.prompt_len >= c.chunk_len) {
    r.problems.push_back("prompt_len: must be < chunk_len");
  }
  if (!r.problems.empty()) throw ConfigError(r.problems);
  return c;
}

ConfigMap ToConfigMap(const RunConfig& c) {
  ConfigMap m;
  std::string specs;
  for (const auto& s : c.specs) specs += (specs.empty() ? "" : ",") + ToString(s);
  m["seed"] = std::to_string(c.seed);
  m["oracle"] = c.oracle;
  m["student"] = c.student;
  m["student_order"] = std::to_string(c.student_order);
  m["lambda"] = FormatShortest(c.lambda);
  m["train_sequences"] = std::to_string(c.train_sequences);
  m["specs"] = specs;
  m["horizon"] = std::to_string(c.horizon);
  m["prompts"] = std::to_string(c.prompts);
  m["prompt_len"] = std::to_string(c.prompt_len);
  m["heldout"] = std::to_string(c.heldout);
  if (!c.prompts_file.empty()) m["prompts_file"] = c.prompts_file;
  if (!c.heldout_file.empty()) m["heldout_file"] = c.heldout_file;
  m["chunk_len"] = std::to_string(c.chunk_len);
  m["bootstrap"] = std::to_string(c.bootstrap);
  if (c.prob_floor) m["prob_floor"] = FormatShortest(*c.prob_floor);
  m["window"] = std::to_string(c.window);
  m["include_prompt"] = c.include_prompt ? "true" : "false";
  m["bridge_timeout_ms"] = std::to_string(c.bridge_timeout_ms);
  m["bridge_batch"] = std::to_string(c.bridge_batch);
  return m;
}

}  // namespace regretmeter::cli
