# Copyright 2026 The regretmeter Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Exposure-bias and regret measurement for autoregressive models."""

from ._regretmeter import (
    BridgeError,
    ConfigError,
    Error,
    InfiniteLossError,
    Model,
    ParseError,
    acc_err,
    builtin_pair,
    decoder_grid,
    estimate_eps,
    estimate_regret,
    exact_eps,
    exact_regret,
    excess_acc_err,
    kl_divergence,
    load_model,
    normalize_spec,
    perplexity_identity,
    quality,
    run_cli,
    sample_corpus,
    train_ngram,
)

__all__ = [
    "BridgeError",
    "ConfigError",
    "Error",
    "InfiniteLossError",
    "Model",
    "ParseError",
    "acc_err",
    "builtin_pair",
    "decoder_grid",
    "estimate_eps",
    "estimate_regret",
    "exact_eps",
    "exact_regret",
    "excess_acc_err",
    "kl_divergence",
    "load_model",
    "normalize_spec",
    "perplexity_identity",
    "quality",
    "run_cli",
    "sample_corpus",
    "train_ngram",
]
