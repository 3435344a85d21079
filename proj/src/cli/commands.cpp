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

#include "commands.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "regretmeter/bridge_client.hpp"
#include "regretmeter/corpus_io.hpp"
#include "regretmeter/fixtures.hpp"
#include "regretmeter/likelihood.hpp"
#include "regretmeter/metrics.hpp"
#include "regretmeter/model_io.hpp"
#include "regretmeter/ngram_student.hpp"
#include "regretmeter/report_io.hpp"
#include "regretmeter/rng.hpp"
#include "regretmeter/textqual.hpp"

namespace regretmeter::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

// Substream indices under the master seed.
enum SeedStream : std::uint64_t {
  kTrainStream = 1,
  kHeldoutStream = 2,
  kPromptStream = 3,
  kBootstrapStream = 4,
  kRolloutStream = 5,
};

std::uint64_t RolloutSeed(std::uint64_t master, const DecoderSpec& spec) {
  return DeriveSeed(DeriveSeed(master, kRolloutStream), Fnv1a(ToString(spec)));
}

void WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << contents;
  if (!out) throw Error("write failed: " + path.string());
}

std::ifstream OpenInput(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

LoadedModel FromTabular(TabularModel model) {
  auto holder = std::make_shared<const TabularModel>(std::move(model));
  LoadedModel out;
  out.model = std::shared_ptr<const LanguageModel>(holder, &AsLanguageModel(*holder));
  out.id = out.model->model_id();
  out.hash = ModelHash(*holder);
  return out;
}

ojson Optional(const std::optional<double>& x) { return x ? ojson(*x) : ojson(nullptr); }

struct PromptBatch {
  std::vector<Context> prompts;
  std::vector<std::vector<TokenId>> golds;
};

// Prompts are the first prompt_len tokens of oracle samples whose prompt
// part holds no eos; golds are the remainder.
PromptBatch SamplePrompts(const LanguageModel& oracle, const RunConfig& c, std::size_t max_len) {
  const Corpus src = SampleCorpus(oracle, c.prompts, max_len, DeriveSeed(c.seed, kPromptStream));
  const TokenId eos = oracle.vocab().eos();
  PromptBatch batch;
  for (const auto& seq : src.sequences) {
    const std::size_t plen = 1 + c.prompt_len;
    if (seq.size() < plen) continue;
    if (std::find(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(plen), eos) !=
        seq.begin() + static_cast<std::ptrdiff_t>(plen)) {
      continue;
    }
    batch.prompts.emplace_back(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(plen));
    batch.golds.emplace_back(seq.begin() + static_cast<std::ptrdiff_t>(plen), seq.end());
  }
  return batch;
}

}  // namespace

LoadedModel LoadModelSource(const std::string& source, const std::string& role,
                            const BridgeSettings& bridge) {
  if (source.rfind("builtin:", 0) == 0) {
    ModelPair pair = BuiltinPair(source.substr(8));
    if (role == "oracle") return FromTabular(std::move(pair.oracle));
    if (role == "student") return FromTabular(std::move(pair.student));
    throw std::invalid_argument("role must be oracle or student, got '" + role + "'");
  }
  if (source == "bridge" || source.rfind("bridge:", 0) == 0) {
    BridgeOptions opts;
    opts.address = ResolveBridgeAddress(source.size() > 7 ? source.substr(7) : "");
    opts.timeout = std::chrono::milliseconds(bridge.timeout_ms);
    opts.max_batch = bridge.max_batch;
    auto model = std::make_shared<BridgeModel>(std::make_shared<BridgeClient>(opts));
    LoadedModel out;
    out.id = model->model_id();
    out.model = std::move(model);
    return out;
  }
  return FromTabular(LoadModel(source));
}

void CmdOracleMake(const OracleMakeOptions& o, std::ostream& log) {
  if (o.out.empty()) throw std::invalid_argument("--out is required");
  TabularModel model = o.builtin.empty()
                           ? TabularModel(RandomMarkovOracle(o.vocab, o.order, o.alpha,
                                                             o.eos_prob, o.seed))
                           : [&]() -> TabularModel {
                               ModelPair pair = BuiltinPair(o.builtin);
                               if (o.role == "oracle") return std::move(pair.oracle);
                               if (o.role == "student") return std::move(pair.student);
                               throw std::invalid_argument("--role must be oracle or student");
                             }();
  SaveModel(o.out, model);
  log << "wrote " << o.out << " (" << AsLanguageModel(model).model_id() << ", hash "
      << ModelHash(model) << ")\n";
}

void CmdCorpusSample(const CorpusSampleOptions& o, std::ostream& log) {
  if (o.out.empty()) throw std::invalid_argument("--out is required");
  if (o.max_len < 1) throw std::invalid_argument("--max-len must be >= 1");
  const LoadedModel m = LoadModelSource(o.model, "oracle");
  const Corpus corpus = SampleCorpus(*m.model, o.sequences, o.max_len, o.seed);
  if (o.train_frac > 0.0) {
    if (o.heldout_out.empty()) throw std::invalid_argument("--split needs --heldout-out");
    auto [train, heldout] = Split(corpus, o.train_frac, DeriveSeed(o.seed, 1));
    WriteIdsFile(o.out, train, m.model->vocab());
    WriteIdsFile(o.heldout_out, heldout, m.model->vocab());
    log << "wrote " << o.out << " (" << train.sequences.size() << " sequences) and "
        << o.heldout_out << " (" << heldout.sequences.size() << " sequences)\n";
    return;
  }
  WriteIdsFile(o.out, corpus, m.model->vocab());
  log << "wrote " << o.out << " (" << corpus.sequences.size() << " sequences, "
      << corpus.token_count() << " tokens)\n";
}

void CmdTrain(const TrainOptions& o, std::ostream& log) {
  if (o.out.empty()) throw std::invalid_argument("--out is required");
  if (o.corpus.empty()) throw std::invalid_argument("--corpus is required");
  const TokenizerMode mode = ParseTokenizerMode(o.tokenizer);
  std::optional<Vocab> vocab;
  Corpus corpus;
  if (mode == TokenizerMode::kIds) {
    if (o.vocab_from.empty()) throw std::invalid_argument("ids corpora need --vocab-from");
    vocab = LoadModelSource(o.vocab_from, "oracle").model->vocab();
    for (const auto& path : o.corpus) {
      Corpus part = ReadIdsFile(path, *vocab);
      corpus.sequences.insert(corpus.sequences.end(), part.sequences.begin(), part.sequences.end());
    }
  } else {
    std::vector<std::string> texts;
    for (const auto& path : o.corpus) {
      std::ifstream in = OpenInput(path);
      std::stringstream ss;
      ss << in.rdbuf();
      texts.push_back(ss.str());
    }
    vocab = BuildVocab(texts, mode);
    for (const auto& path : o.corpus) {
      Corpus part = ReadTokens(path, *vocab, TokenizerSpec{mode, true});
      corpus.sequences.insert(corpus.sequences.end(), part.sequences.begin(), part.sequences.end());
    }
  }
  NGramStudent student = TrainNGram(*vocab, corpus, o.order, o.lambda);
  const TabularModel model(std::move(student));
  SaveModel(o.out, model);
  log << "wrote " << o.out << " (order " << o.order << ", lambda " << FormatShortest(o.lambda)
      << ", " << corpus.token_count() << " training tokens, hash " << ModelHash(model) << ")\n";
}

std::vector<std::string> CmdEval(const RunConfig& c, std::ostream& log) {
  if (c.out.empty()) throw ConfigError({"out: required"});
  fs::create_directories(c.out);
  const BridgeSettings bridge{c.bridge_timeout_ms, c.bridge_batch};
  const LoadedModel oracle = LoadModelSource(c.oracle, "oracle", bridge);
  const Vocab& vocab = oracle.model->vocab();
  const std::size_t max_len = 1 + c.prompt_len + c.horizon;

  LoadedModel student;
  if (c.student == "ngram") {
    const Corpus train = SampleCorpus(*oracle.model, c.train_sequences, max_len,
                                      DeriveSeed(c.seed, kTrainStream));
    student = FromTabular(TrainNGram(vocab, train, c.student_order, c.lambda));
  } else {
    student = LoadModelSource(c.student, "student", bridge);
  }
  if (!CompatibleVocabs(vocab, student.model->vocab())) {
    throw Error("oracle and student vocabularies are incompatible (V " +
                std::to_string(vocab.size()) + " vs " +
                std::to_string(student.model->vocab().size()) + ")");
  }

  const Corpus heldout = c.heldout_file.empty()
                             ? SampleCorpus(*oracle.model, c.heldout, max_len,
                                            DeriveSeed(c.seed, kHeldoutStream))
                             : ReadIdsFile(c.heldout_file, vocab);
  PromptBatch prompts;
  if (!c.prompts_file.empty()) {
    PromptSet set = ChunkAndPrompt(ReadIdsFile(c.prompts_file, vocab), vocab, c.chunk_len,
                                   c.prompt_len, c.prompts);
    prompts.prompts = std::move(set.prompts);
    prompts.golds = std::move(set.golds);
  } else {
    prompts = SamplePrompts(*oracle.model, c, max_len);
  }
  if (prompts.prompts.empty()) throw Error("no usable prompts");

  const LossOptions loss{c.prob_floor};
  const BootstrapOptions bootstrap{c.bootstrap, DeriveSeed(c.seed, kBootstrapStream)};
  EpsOptions eps_opts;
  eps_opts.first_position = c.prompt_len;
  eps_opts.workers = c.workers;
  eps_opts.loss = loss;
  log << "eval: " << student.id << " vs " << oracle.id << ", " << prompts.prompts.size()
      << " prompts, " << heldout.sequences.size() << " held-out sequences\n";
  const PerStepErrorSeries eps = EstimateEps(*oracle.model, *student.model, heldout, c.horizon,
                                             eps_opts);
  const NllResult nll_student = CorpusNll(*student.model, heldout);
  const NllResult nll_oracle = CorpusNll(*oracle.model, heldout);
  const PerplexityIdentity identity =
      CheckPerplexityIdentity(*oracle.model, *student.model, heldout, bootstrap, loss);

  QualityOptions qopts = QualityOptions::For(vocab);
  qopts.window = c.window;
  qopts.include_prompt = c.include_prompt;

  const ConfigMap config_map = ToConfigMap(c);
  std::vector<std::string> written;
  std::vector<QualityRow> quality_rows;
  std::vector<SummaryRow> summary_rows;
  for (const DecoderSpec& spec : c.specs) {
    const std::string name = ToString(spec);
    const std::string slug = Slug(spec);
    const std::uint64_t rollout_seed = RolloutSeed(c.seed, spec);
    const auto rollouts = GenerateRollouts(*student.model, *oracle.model, prompts.prompts, spec,
                                           c.horizon, rollout_seed, c.workers, loss);
    const RegretCurve curve = RegretFromRollouts(rollouts, c.horizon, bootstrap);
    const auto rows = BuildExposureRows(eps, curve, bootstrap);
    if (rows.empty()) throw Error("no steps to report for " + name);
    const std::size_t L = rows.size();
    const BoundDiagnostic bound = DiagnoseBounds(eps.eps_t, curve.regret_le_l, L);

    std::vector<Completion> completions(rollouts.size());
    for (std::size_t i = 0; i < rollouts.size(); ++i) {
      completions[i] = {rollouts[i].prompt, rollouts[i].continuation, prompts.golds[i]};
    }
    const QualityReport q = ComputeQuality(completions, qopts);

    const std::string csv_name = "exposure_" + slug + ".csv";
    const std::string json_name = "exposure_" + slug + ".json";
    std::ostringstream csv;
    WriteExposureCsv(csv, rows);
    WriteFile(fs::path(c.out) / csv_name, csv.str());

    ojson meta;
    meta["format"] = "regretmeter-exposure";
    meta["version"] = 1;
    meta["spec"] = name;
    meta["csv"] = csv_name;
    meta["config"] = ojson::object();
    for (const auto& [k, v] : config_map) meta["config"][k] = v;
    meta["seeds"] = {{"master", c.seed},
                     {"heldout", DeriveSeed(c.seed, kHeldoutStream)},
                     {"prompts", DeriveSeed(c.seed, kPromptStream)},
                     {"train", DeriveSeed(c.seed, kTrainStream)},
                     {"bootstrap", bootstrap.seed},
                     {"rollouts", rollout_seed}};
    meta["models"] = {{"oracle", {{"id", oracle.id}, {"hash", oracle.hash}}},
                      {"student", {{"id", student.id}, {"hash", student.hash}}}};
    meta["samples"] = {{"prompts", prompts.prompts.size()},
                       {"heldout_sequences", heldout.sequences.size()},
                       {"heldout_tokens", heldout.token_count()},
                       {"bootstrap_resamples", bootstrap.resamples}};
    meta["horizon"] = c.horizon;
    meta["length"] = L;
    meta["entropy_rate"] = {{"student", nll_student.entropy_rate()},
                            {"oracle", nll_oracle.entropy_rate()},
                            {"student_perplexity", nll_student.perplexity()}};
    meta["perplexity_identity"] = {{"mean_eps", identity.mean_eps},
                                   {"residual", identity.residual},
                                   {"stderr", identity.stderr},
                                   {"tokens", identity.tokens}};
    meta["bound"] = {{"l", L},
                     {"lo", bound.lo},
                     {"hi", bound.hi},
                     {"regret", bound.regret},
                     {"position", ToString(bound.position)}};
    meta["quality"] = {{"rep128", Optional(q.rep)},
                       {"wrep128", Optional(q.wrep)},
                       {"seq_rep_4", Optional(q.seq_rep_4)},
                       {"uniq", q.uniq}};
    WriteFile(fs::path(c.out) / json_name, meta.dump(2) + "\n");
    written.push_back((fs::path(c.out) / csv_name).string());
    written.push_back((fs::path(c.out) / json_name).string());

    const ExposureRow& last = rows.back();
    quality_rows.push_back({student.id, name, last.pct_ex_acc_err, q.seq_rep_4, q.rep, q.wrep,
                            q.uniq});
    summary_rows.push_back({student.id, name, L, nll_student.entropy_rate(),
                            nll_student.perplexity(), last.eps_le_l, last.regret_le_l,
                            last.regret_le_l / static_cast<double>(L), last.acc_err,
                            last.pct_ex_acc_err, last.pct_ex_acc_err_stderr,
                            ToString(bound.position)});
    log << "  " << name << ": R_<=" << L << " = " << FormatShortest(last.regret_le_l)
        << ", %ExAccErr = " << FormatOptional(last.pct_ex_acc_err) << "\n";
  }
  std::ostringstream quality, summary;
  WriteQualityCsv(quality, quality_rows);
  WriteSummaryCsv(summary, summary_rows);
  WriteFile(fs::path(c.out) / "quality.csv", quality.str());
  WriteFile(fs::path(c.out) / "summary.csv", summary.str());
  written.push_back((fs::path(c.out) / "quality.csv").string());
  written.push_back((fs::path(c.out) / "summary.csv").string());
  return written;
}

std::vector<std::string> CmdEvalReplay(const std::string& sidecar, const std::string& out,
                                       std::size_t workers, std::ostream& log) {
  std::ifstream in = OpenInput(sidecar);
  ojson meta;
  try {
    meta = ojson::parse(in);
  } catch (const ojson::exception& e) {
    throw ParseError(sidecar + ": " + e.what());
  }
  if (!meta.contains("config") || !meta["config"].is_object()) {
    throw ParseError(sidecar + ": missing config object");
  }
  ConfigMap map;
  for (const auto& [k, v] : meta["config"].items()) map[k] = v.get<std::string>();
  RunConfig c = ParseRunConfig(map);
  c.out = out.empty() ? fs::path(sidecar).parent_path().string() : out;
  if (c.out.empty()) c.out = ".";
  c.workers = workers;
  return CmdEval(c, log);
}

std::vector<std::string> CmdReport(const std::vector<std::string>& inputs, const std::string& out,
                                   std::ostream& log) {
  if (inputs.empty()) throw std::invalid_argument("report needs at least one input directory");
  if (out.empty()) throw std::invalid_argument("--out is required");
  fs::create_directories(out);
  std::ostringstream table, curves;
  table << "model,spec,pct_ex_acc_err,pct_ex_acc_err_stderr,seq_rep_4,rep128,wrep128,uniq,"
           "horizon,entropy_rate,perplexity,eps,regret_per_l,acc_err\n";
  curves << "model,spec,l,metric,value,stderr\n";
  std::size_t n_rows = 0;
  for (const auto& dir : inputs) {
    std::ifstream qin = OpenInput(fs::path(dir) / "quality.csv");
    std::ifstream sin = OpenInput(fs::path(dir) / "summary.csv");
    const auto quality = ReadQualityCsv(qin);
    const auto summary = ReadSummaryCsv(sin);
    for (const auto& s : summary) {
      const auto q = std::find_if(quality.begin(), quality.end(), [&](const QualityRow& r) {
        return r.model == s.model && r.spec == s.spec;
      });
      if (q == quality.end()) {
        throw ParseError(dir + ": quality.csv has no row for " + s.model + " / " + s.spec);
      }
      table << CsvEscape(s.model) << ',' << CsvEscape(s.spec) << ','
            << FormatOptional(q->pct_ex_acc_err) << ',' << FormatOptional(s.pct_ex_acc_err_stderr)
            << ',' << FormatOptional(q->seq_rep_4) << ',' << FormatOptional(q->rep128) << ','
            << FormatOptional(q->wrep128) << ',' << q->uniq << ',' << s.horizon << ','
            << FormatShortest(s.entropy_rate) << ',' << FormatShortest(s.perplexity) << ','
            << FormatShortest(s.eps) << ',' << FormatShortest(s.regret_per_l) << ','
            << FormatOptional(s.acc_err) << '\n';
      ++n_rows;

      const fs::path csv_path =
          fs::path(dir) / ("exposure_" + Slug(ParseDecoderSpec(s.spec)) + ".csv");
      std::ifstream ein = OpenInput(csv_path);
      const auto rows = ReadExposureCsv(ein);
      const std::string key = CsvEscape(s.model) + ',' + CsvEscape(s.spec) + ',';
      for (const auto& r : rows) {
        const std::string l = std::to_string(r.l);
        auto emit = [&](const char* metric, const std::optional<double>& v,
                        const std::optional<double>& se) {
          curves << key << l << ',' << metric << ',' << FormatOptional(v) << ','
                 << FormatOptional(se) << '\n';
        };
        emit("eps_le_l", r.eps_le_l, r.eps_stderr);
        emit("R_le_l", r.regret_le_l, r.stderr);
        emit("acc_err", r.acc_err, r.acc_err_stderr);
        emit("pct_ex_acc_err", r.pct_ex_acc_err, r.pct_ex_acc_err_stderr);
        emit("bound_lo", r.bound_lo, std::nullopt);
        emit("bound_hi", r.bound_hi, std::nullopt);
      }
    }
  }
  const fs::path table_path = fs::path(out) / "table1.csv";
  const fs::path curves_path = fs::path(out) / "curves_long.csv";
  WriteFile(table_path, table.str());
  WriteFile(curves_path, curves.str());
  log << "wrote " << table_path.string() << " (" << n_rows << " rows) and "
      << curves_path.string() << "\n";
  return {table_path.string(), curves_path.string()};
}

bool CmdBridgeProbe(const BridgeProbeOptions& o, std::ostream& log) {
  BridgeOptions opts;
  opts.address = ResolveBridgeAddress(o.address);
  opts.timeout = std::chrono::milliseconds(o.timeout_ms);
  BridgeClient client(opts);
  const BridgeInfo& info = client.info();
  log << "handshake: model=" << info.model << " V=" << info.vocab_size << " bos=" << info.bos
      << " eos=" << info.eos << "\n";

  RngStream rng(o.seed);
  std::vector<Context> ctxs(o.contexts);
  for (auto& ctx : ctxs) {
    ctx.push_back(info.bos);
    const std::size_t len = rng.Below(std::max<std::size_t>(o.max_len, 1));
    while (ctx.size() <= len) {
      const auto w = static_cast<TokenId>(rng.Below(info.vocab_size));
      if (w != info.bos && w != info.eos) ctx.push_back(w);
    }
  }
  bool ok = true;
  std::vector<Dist> first;
  try {
    first = client.NextDists(ctxs);
    log << "dists: " << first.size() << " responses, all length " << info.vocab_size
        << " and normalized\n";
  } catch (const BridgeError& e) {
    log << "dists: FAILED: " << e.what() << "\n";
    return false;
  }
  // A fresh connection bypasses the client cache.
  BridgeClient again(opts);
  const auto second = again.NextDists(ctxs);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < ctxs.size(); ++i) differ += !(first[i] == second[i]);
  if (differ == 0) {
    log << "determinism: repeat responses identical\n";
  } else {
    log << "determinism: " << differ << " of " << ctxs.size() << " responses differ\n";
    ok = false;
  }
  return ok;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exposure-bias regret toolkit", "regretmeter"};
  app.require_subcommand(1);

  auto* oracle = app.add_subcommand("oracle", "Build oracle models");
  oracle->require_subcommand(1);
  OracleMakeOptions om;
  auto* make = oracle->add_subcommand("make", "Write a builtin or random Markov oracle");
  make->add_option("--builtin", om.builtin, "Builtin pair: context-free, tiny, trap");
  make->add_option("--role", om.role, "oracle or student (builtin pairs)");
  make->add_option("--vocab", om.vocab, "Vocabulary size (random oracle)");
  make->add_option("--order", om.order, "Markov order (random oracle)");
  make->add_option("--alpha", om.alpha, "Dirichlet concentration (random oracle)");
  make->add_option("--eos-prob", om.eos_prob, "Per-row eos probability (random oracle)");
  make->add_option("--seed", om.seed, "Seed (random oracle)");
  make->add_option("--out", om.out, "Output model file")->required();

  auto* corpus = app.add_subcommand("corpus", "Corpus utilities");
  corpus->require_subcommand(1);
  CorpusSampleOptions cs;
  auto* sample = corpus->add_subcommand("sample", "Sample a corpus from a model");
  sample->add_option("--model", cs.model, "Model source (builtin:<pair> or file)")->required();
  sample->add_option("--sequences,-n", cs.sequences, "Number of sequences");
  sample->add_option("--max-len", cs.max_len, "Maximum tokens per sequence, bos included");
  sample->add_option("--seed", cs.seed, "Seed");
  sample->add_option("--out", cs.out, "Output ids file")->required();
  sample->add_option("--split,--train-frac", cs.train_frac, "Train fraction for a seeded split");
  sample->add_option("--heldout-out", cs.heldout_out, "Held-out ids file when splitting");

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Train an n-gram student with additive smoothing");
  train->add_option("--corpus", tr.corpus, "Corpus files")->required();
  train->add_option("--tokenizer", tr.tokenizer, "ids, char or whitespace");
  train->add_option("--vocab-from", tr.vocab_from, "Model source providing the vocabulary");
  train->add_option("--order", tr.order, "Markov order");
  train->add_option("--lambda", tr.lambda, "Additive smoothing");
  train->add_option("--out", tr.out, "Output model file")->required();

  auto* eval = app.add_subcommand("eval", "Estimate eps, regret and quality per decoder");
  std::string config_path, replay;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  eval->add_option("--config", config_path, "key = value config file");
  eval->add_option("--set", sets, "key=value override (repeatable)");
  eval->add_option("--replay", replay, "Regenerate outputs from an exposure sidecar");
  for (const auto& key : ConfigKeys()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    flag_options[key] = eval->add_option(flag, flag_values[key], "Config key " + key);
  }

  auto* report = app.add_subcommand("report", "Merge eval outputs into table and curve CSVs");
  std::vector<std::string> report_inputs;
  std::string report_out;
  report->add_option("--in", report_inputs, "Eval output directories")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  auto* bridge = app.add_subcommand("bridge", "Bridge server utilities");
  bridge->require_subcommand(1);
  BridgeProbeOptions bp;
  auto* probe = bridge->add_subcommand("probe", "Handshake and conformance check");
  probe->add_option("--addr,--address", bp.address, "host:port or stdio:<command>");
  probe->add_option("--timeout-ms", bp.timeout_ms, "Reply timeout");
  probe->add_option("--contexts", bp.contexts, "Random contexts to query");
  probe->add_option("--max-len", bp.max_len, "Maximum context length");
  probe->add_option("--seed", bp.seed, "Seed for random contexts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (make->parsed()) {
      CmdOracleMake(om, out);
    } else if (sample->parsed()) {
      CmdCorpusSample(cs, out);
    } else if (train->parsed()) {
      CmdTrain(tr, out);
    } else if (eval->parsed()) {
      std::size_t workers = 1;
      if (!replay.empty()) {
        if (flag_options["workers"]->count() > 0) {
          workers = ParseRunConfig({{"oracle", "-"}, {"student", "-"},
                                    {"workers", flag_values["workers"]}})
                        .workers;
        }
        for (const auto& f : CmdEvalReplay(replay, flag_values["out"], workers, err)) {
          out << f << "\n";
        }
        return 0;
      }
      ConfigMap map = config_path.empty() ? ConfigMap{} : ReadConfigFile(config_path);
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError({"--set " + s + ": expected key=value"});
        map[s.substr(0, eq)] = s.substr(eq + 1);
      }
      for (const auto& [key, opt] : flag_options) {
        if (opt->count() > 0) map[key] = flag_values[key];
      }
      for (const auto& f : CmdEval(ParseRunConfig(map), err)) out << f << "\n";
    } else if (report->parsed()) {
      CmdReport(report_inputs, report_out, out);
    } else if (probe->parsed()) {
      return CmdBridgeProbe(bp, out) ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace regretmeter::cli
