# Copyright 2026 The hiddenfleet Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
import pathlib

import pytest

import hiddenfleet as hf

SOURCE = pathlib.Path(os.environ.get("HIDDENFLEET_SOURCE_DIR", pathlib.Path(__file__).parents[2]))


def test_board_and_layouts():
    b = hf.Board(1, 3, [2])
    assert b.horizon == 3
    assert sorted(sorted(s[0]) for s in hf.layouts(b)) == [[0, 1], [1, 2]]
    assert len(hf.layouts(hf.Board(3, 3, [3, 2]))) == 36
    with pytest.raises(hf.HiddenfleetError) as e:
        hf.Board(2, 2, [5])
    assert e.value.kind == "InvalidArgument"


def test_minimax_one_by_three():
    s = hf.solve_minimax(hf.Board(1, 3, [2]))
    assert s["value"] == pytest.approx(2.5, abs=1e-9)
    assert s["duality_gap"] <= 1e-9
    assert sum(s["mu"]) == pytest.approx(1.0)
    assert s["rho"] == pytest.approx([0.5, 0.5])


def test_not_converged_carries_best_iterate():
    with pytest.raises(hf.HiddenfleetError) as e:
        hf.solve_minimax(hf.Board(3, 3, [2]), max_iters=1)
    assert e.value.kind == "NotConverged"
    assert e.value.best["upper"] >= e.value.best["lower"]


def test_best_response_matches_hand_value():
    r = hf.attacker_best_response(hf.Board(1, 3, [2]), [0.9, 0.1])
    assert r["value"] == pytest.approx(2.1)


def test_evaluate_is_seeded():
    b = hf.Board(5, 5, [3, 2])
    a = hf.evaluate(b, "probmap", "EDGE", n=30, seed=4)
    assert a == hf.evaluate(b, "probmap", "EDGE", n=30, seed=4)
    assert len(a["lengths"]) == 30
    assert a["mean"] == pytest.approx(sum(a["lengths"]) / 30)
    assert hf.evaluate(b, "random", n=30, seed=4)["mean"] > a["mean"]


def test_estimators_and_radius():
    x = list(range(1, 21))
    assert hf.empirical_p95(x) == 19
    assert hf.empirical_cvar10(x) == 19.5
    assert hf.discounted_return(100, 0.99) == pytest.approx(-(1 - 0.99**100) / 0.01, abs=1e-12)
    r = hf.hoeffding_radius([(50, 1.0), (100, 1.0)], 100, 0.05)
    want = 100 * (math.sqrt(math.log(80) / 100) + math.sqrt(math.log(80) / 200))
    assert r == pytest.approx(want, rel=1e-12)
    assert r == pytest.approx(35.7, abs=0.1)


def test_marginal_demo():
    d = hf.marginal_demo()
    assert (d["loss_plus"], d["loss_minus"]) == (0.0, 1.0)
    assert d["marginals_plus"] == d["marginals_minus"] == [0.5, 0.5]


def test_shift_metrics_uniform_anchor():
    m = hf.shift_metrics(hf.Board(4, 4, [2]), "UNIFORM", n_samples=100)
    assert m["centroid_dist_mean"] == 0.0
    assert 0.0 <= m["marginal_entropy"] <= math.log(2)


def test_cli_roundtrip(tmp_path):
    code, out, err = hf.run_cli(
        ["solve-minimax", "-c", str(SOURCE / "configs" / "solve_1x3.json"), "-o", str(tmp_path)]
    )
    assert code == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["results"]["value"] == pytest.approx(2.5)
    assert hf.run_cli(["bogus"])[0] == 1
