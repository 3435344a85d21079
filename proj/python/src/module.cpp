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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "regretmeter/errors.hpp"
#include "regretmeter/exact_enum.hpp"
#include "regretmeter/fixtures.hpp"
#include "regretmeter/likelihood.hpp"
#include "regretmeter/metrics.hpp"
#include "regretmeter/ngram_student.hpp"
#include "regretmeter/textqual.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace regretmeter;

namespace {

// Python-side handle; every model is shared and immutable.
struct Model {
  std::shared_ptr<const LanguageModel> impl;

  const LanguageModel& get() const { return *impl; }
};

Model Wrap(std::shared_ptr<const LanguageModel> m) { return Model{std::move(m)}; }

LossOptions Loss(std::optional<double> prob_floor) {
  LossOptions l;
  l.prob_floor = prob_floor;
  return l;
}

Corpus ToCorpus(std::vector<std::vector<TokenId>> seqs) { return Corpus{std::move(seqs)}; }

py::dict EpsDict(const PerStepErrorSeries& e) {
  return py::dict("eps_t"_a = e.eps_t, "counts_t"_a = e.counts_t, "stderr_t"_a = e.stderr_t);
}

py::dict RegretDict(const RegretCurve& c) {
  return py::dict("regret_le_l"_a = c.regret_le_l, "counts_t"_a = c.counts_t,
                  "stderr_le_l"_a = c.stderr_le_l);
}

py::dict ExactDict(const ExactLoss& e) {
  return py::dict("per_step"_a = e.per_step, "cumulative"_a = e.Cumulative(),
                  "active_mass"_a = e.active_mass, "pruned_mass"_a = e.pruned_mass);
}

}  // namespace

PYBIND11_MODULE(_regretmeter, m) {
  m.doc() = "Exposure-bias and regret measurement for autoregressive models";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<InfiniteLossError>(m, "InfiniteLossError", error.ptr());
  py::register_exception<BridgeError>(m, "BridgeError", error.ptr());
  py::register_exception<cli::ConfigError>(m, "ConfigError", error.ptr());

  py::class_<Model>(m, "Model")
      .def_property_readonly("model_id", [](const Model& s) { return s.get().model_id(); })
      .def_property_readonly("tokens", [](const Model& s) { return s.get().vocab().tokens(); })
      .def_property_readonly("bos", [](const Model& s) { return s.get().vocab().bos(); })
      .def_property_readonly("eos", [](const Model& s) { return s.get().vocab().eos(); })
      .def_property_readonly("markov_order",
                             [](const Model& s) { return s.get().markov_order(); })
      .def(
          "next_dist",
          [](const Model& s, const Context& ctx) { return s.get().NextDist(ctx).probs(); },
          "context"_a, "Next-token probabilities after `context` (which starts with bos).")
      .def("__repr__", [](const Model& s) { return "<regretmeter.Model " + s.get().model_id() + ">"; });

  m.def(
      "load_model",
      [](const std::string& source, const std::string& role, std::size_t timeout_ms) {
        cli::BridgeSettings bridge;
        bridge.timeout_ms = timeout_ms;
        return Wrap(cli::LoadModelSource(source, role, bridge).model);
      },
      "source"_a, "role"_a = "oracle", "bridge_timeout_ms"_a = 30000,
      "Load builtin:<pair>, bridge[:<addr>] or a model file.");

  m.def(
      "builtin_pair",
      [](const std::string& name) {
        auto pair = BuiltinPair(name);
        return py::make_tuple(Wrap(std::make_shared<MarkovOracle>(std::move(pair.oracle))),
                              Wrap(std::make_shared<MarkovOracle>(std::move(pair.student))));
      },
      "name"_a, "(oracle, student) for context-free, tiny or trap.");

  m.def(
      "train_ngram",
      [](const Model& vocab_from, std::vector<std::vector<TokenId>> corpus, std::size_t order,
         double lambda) {
        return Wrap(std::make_shared<NGramStudent>(
            TrainNGram(vocab_from.get().vocab(), ToCorpus(std::move(corpus)), order, lambda)));
      },
      "vocab_from"_a, "corpus"_a, "order"_a = 1, "lam"_a = 0.1);

  m.def(
      "sample_corpus",
      [](const Model& model, std::size_t n, std::size_t max_len, std::uint64_t seed) {
        return SampleCorpus(model.get(), n, max_len, seed).sequences;
      },
      "model"_a, "n"_a, "max_len"_a, "seed"_a = 1);

  m.def(
      "kl_divergence",
      [](const std::vector<double>& p, const std::vector<double>& q,
         std::optional<double> prob_floor) {
        return KlDivergence(Dist::FromProbs(p), Dist::FromProbs(q), Loss(prob_floor));
      },
      "p"_a, "q"_a, "prob_floor"_a = py::none(), "KL(p || q) in nats.");

  m.def("normalize_spec", [](const std::string& s) { return ToString(ParseDecoderSpec(s)); },
        "spec"_a);
  m.def("decoder_grid", [] {
    std::vector<std::string> out;
    for (const auto& s : DefaultDecoderGrid()) out.push_back(ToString(s));
    return out;
  });

  m.def(
      "estimate_eps",
      [](const Model& oracle, const Model& model, std::vector<std::vector<TokenId>> heldout,
         std::size_t horizon, std::size_t first_position, std::size_t workers,
         std::optional<double> prob_floor) {
        EpsOptions o;
        o.first_position = first_position;
        o.workers = workers;
        o.loss = Loss(prob_floor);
        PerStepErrorSeries e;
        {
          py::gil_scoped_release release;
          e = EstimateEps(oracle.get(), model.get(), ToCorpus(std::move(heldout)), horizon, o);
        }
        return EpsDict(e);
      },
      "oracle"_a, "model"_a, "heldout"_a, "horizon"_a, "first_position"_a = 0,
      "workers"_a = 1, "prob_floor"_a = py::none());

  m.def(
      "estimate_regret",
      [](const Model& oracle, const Model& model, const std::string& spec,
         const std::vector<Context>& prompts, std::size_t horizon, std::uint64_t seed,
         std::size_t workers, std::size_t resamples, std::optional<double> prob_floor) {
        RegretOptions o;
        o.workers = workers;
        o.bootstrap.resamples = resamples;
        o.loss = Loss(prob_floor);
        const DecoderSpec parsed = ParseDecoderSpec(spec);
        RegretCurve c;
        {
          py::gil_scoped_release release;
          c = EstimateRegret(oracle.get(), model.get(), parsed, prompts, horizon, seed, o);
        }
        return RegretDict(c);
      },
      "oracle"_a, "model"_a, "spec"_a, "prompts"_a, "horizon"_a, "seed"_a = 1,
      "workers"_a = 1, "resamples"_a = 1000, "prob_floor"_a = py::none());

  m.def(
      "exact_regret",
      [](const Model& oracle, const Model& model, const std::string& spec, const Context& prompt,
         std::size_t horizon) {
        const DecoderSpec parsed = ParseDecoderSpec(spec);
        if (oracle.get().markov_order() && model.get().markov_order()) {
          return ExactDict(MarkovExactRegret(oracle.get(), model.get(), parsed, prompt, horizon));
        }
        return ExactDict(ExactRegret(oracle.get(), model.get(), parsed, prompt, horizon));
      },
      "oracle"_a, "model"_a, "spec"_a, "prompt"_a, "horizon"_a);

  m.def(
      "exact_eps",
      [](const Model& oracle, const Model& model, std::size_t horizon) {
        if (oracle.get().markov_order() && model.get().markov_order()) {
          return ExactDict(MarkovExactEps(oracle.get(), model.get(), horizon));
        }
        return ExactDict(ExactEps(oracle.get(), model.get(), horizon));
      },
      "oracle"_a, "model"_a, "horizon"_a);

  m.def("acc_err", [](const std::vector<double>& regret, const std::vector<double>& eps) {
    return AccErr(regret, eps);
  }, "regret_le_l"_a, "eps_t"_a);
  m.def("excess_acc_err", [](const std::vector<double>& regret, const std::vector<double>& eps) {
    return ExcessAccErr(regret, eps);
  }, "regret_le_l"_a, "eps_t"_a, "Percent excess accumulated error per l.");

  m.def(
      "perplexity_identity",
      [](const Model& oracle, const Model& model, std::vector<std::vector<TokenId>> heldout,
         std::size_t resamples) {
        BootstrapOptions b;
        b.resamples = resamples;
        const auto r = CheckPerplexityIdentity(oracle.get(), model.get(),
                                               ToCorpus(std::move(heldout)), b);
        return py::dict("entropy_model"_a = r.entropy_model,
                        "entropy_oracle"_a = r.entropy_oracle, "mean_eps"_a = r.mean_eps,
                        "residual"_a = r.residual, "stderr"_a = r.stderr, "tokens"_a = r.tokens);
      },
      "oracle"_a, "model"_a, "heldout"_a, "resamples"_a = 1000);

  m.def(
      "quality",
      [](const std::vector<std::tuple<std::vector<TokenId>, std::vector<TokenId>,
                                      std::vector<TokenId>>>& batch,
         std::size_t window, bool include_prompt, std::optional<TokenId> bos,
         std::optional<TokenId> eos) {
        std::vector<Completion> completions;
        for (const auto& [prompt, cont, gold] : batch) completions.push_back({prompt, cont, gold});
        QualityOptions o;
        o.window = window;
        o.include_prompt = include_prompt;
        o.bos = bos;
        o.eos = eos;
        const auto q = ComputeQuality(completions, o);
        return py::dict("rep"_a = q.rep, "wrep"_a = q.wrep, "seq_rep_4"_a = q.seq_rep_4,
                        "uniq"_a = q.uniq);
      },
      "batch"_a, "window"_a = 128, "include_prompt"_a = true, "bos"_a = py::none(),
      "eos"_a = py::none(), "batch: (prompt, continuation, gold) id lists.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "regretmeter");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      "args"_a, "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
