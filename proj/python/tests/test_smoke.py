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

import math

import pytest

import regretmeter as rm


def test_builtin_pair_and_kl():
    oracle, student = rm.builtin_pair("context-free")
    assert oracle.tokens == ["<bos>", "<eos>", "a", "b"]
    p = oracle.next_dist([oracle.bos])
    q = student.next_dist([student.bos])
    assert p == pytest.approx([0.0, 0.0, 0.5, 0.5])
    assert rm.kl_divergence(p, q) == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(2 / 3))


def test_context_free_regret_is_linear():
    oracle, student = rm.builtin_pair("context-free")
    kl = rm.kl_divergence(oracle.next_dist([0]), student.next_dist([0]))
    curve = rm.estimate_regret(oracle, student, "temp:t=1", [[0]] * 50, 20, seed=3, resamples=20)
    assert len(curve["regret_le_l"]) == 20
    for l, r in enumerate(curve["regret_le_l"], start=1):
        assert r == pytest.approx(l * kl, abs=1e-12)
    eps = rm.estimate_eps(oracle, student, rm.sample_corpus(oracle, 50, 21, seed=4), 20)
    pct = rm.excess_acc_err(curve["regret_le_l"], eps["eps_t"])
    assert max(abs(x) for x in pct) < 1e-9


def test_monte_carlo_matches_exact_on_tiny_pair():
    oracle, student = rm.builtin_pair("tiny")
    exact = rm.exact_regret(oracle, student, "temp:t=1", [0], 5)
    mc = rm.estimate_regret(oracle, student, "temp:t=1", [[0]] * 2000, 5, seed=7, resamples=200)
    for got, want, se in zip(mc["regret_le_l"], exact["cumulative"], mc["stderr_le_l"]):
        assert abs(got - want) <= 4 * se + 1e-12


def test_workers_do_not_change_results():
    oracle, student = rm.builtin_pair("trap")
    prompts = [[0]] * 100
    a = rm.estimate_regret(oracle, student, "topk:k=3", prompts, 16, seed=5, workers=1, resamples=10)
    b = rm.estimate_regret(oracle, student, "topk:k=3", prompts, 16, seed=5, workers=4, resamples=10)
    assert a == b


def test_trained_student_and_perplexity_identity():
    oracle, _ = rm.builtin_pair("tiny")
    train = rm.sample_corpus(oracle, 300, 20, seed=1)
    student = rm.train_ngram(oracle, train, order=1, lam=0.5)
    assert student.markov_order == 1
    heldout = rm.sample_corpus(oracle, 500, 20, seed=2)
    r = rm.perplexity_identity(oracle, student, heldout, resamples=100)
    assert r["residual"] <= 4 * r["stderr"] + 1e-12
    assert r["tokens"] == sum(len(s) - 1 for s in heldout)


def test_quality_values():
    q = rm.quality([([], [5] * 10, [])])
    assert q["seq_rep_4"] == pytest.approx(1 - 1 / 7)
    assert rm.quality([([], [7, 8, 7], [])])["rep"] == pytest.approx(1 / 3)
    assert rm.quality([([], [2, 3], []), ([], [3, 4], [])])["uniq"] == 3


def test_spec_grammar_and_errors():
    assert rm.normalize_spec("temp:t=1.20") == "temp:t=1.2"
    assert "greedy" in rm.decoder_grid()
    with pytest.raises(ValueError, match=r"greedy \| beam:k="):
        rm.normalize_spec("beem:k=5")
    with pytest.raises(ValueError, match="unknown builtin"):
        rm.load_model("builtin:nope")


def test_run_cli_eval(tmp_path):
    out = tmp_path / "eval"
    code, stdout, stderr = rm.run_cli([
        "eval", "--oracle", "builtin:tiny", "--student", "builtin:tiny", "--horizon", "5",
        "--prompts", "20", "--heldout", "20", "--bootstrap", "10", "--specs", "greedy",
        "--out", str(out),
    ])
    assert code == 0, stderr
    assert (out / "exposure_greedy.csv").exists()
    code, _, stderr = rm.run_cli(["eval", "--out", str(out)])
    assert code == 2
    assert "oracle" in stderr


def test_model_file_round_trip(tmp_path):
    path = tmp_path / "o.model"
    code, _, stderr = rm.run_cli(["oracle", "make", "--builtin", "trap", "--out", str(path)])
    assert code == 0, stderr
    loaded = rm.load_model(str(path))
    oracle, _ = rm.builtin_pair("trap")
    assert loaded.model_id == oracle.model_id
    assert loaded.next_dist([0, 3]) == oracle.next_dist([0, 3])
