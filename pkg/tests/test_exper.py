import json

import numpy as np
import pytest

from gli.errors import NoTruthAvailable, UnknownScenario, ValidationError
from gli.estim import FitConfig
from gli.exper import (ExperimentConfig, RECIPES, SCENARIOS, named_recipe, run_rmse, run_scenario,
                       scenario_truth, svg_loglog, trial_seed, truth_values)
from gli.infom import QuadratureSpec
from oracles import chain1_entropies

SMALL = dict(ns=(32, 64), trials=2, truth_m=256)


def test_config_validation():
    with pytest.raises(NoTruthAvailable):
        ExperimentConfig("xor_synergy")
    with pytest.raises(ValidationError):
        ExperimentConfig("chain1", trials=0)
    with pytest.raises(ValidationError):
        ExperimentConfig("chain1", ns=(8, 64))
    assert ExperimentConfig("chain1", full_scale=True).trials == 300
    assert ExperimentConfig("mi_scenario1").measures == ("mi",)
    assert ExperimentConfig("chain1", threads=4).digest() == ExperimentConfig("chain1", threads=1).digest()


def test_trial_seeds_distinct_and_stable():
    seeds = {trial_seed(0, n, t) for n in (64, 128) for t in range(50)}
    assert len(seeds) == 100
    assert trial_seed(3, 64, 1) == trial_seed(3, 64, 1)


def test_rmse_deterministic_and_outputs(tmp_path):
    cfg = ExperimentConfig("chain1", seed=5, trials=1, ns=(32, 64), truth_m=256)
    a, b = run_rmse(cfg), run_rmse(cfg)
    for m in ("tc", "ii", "dtc"):
        assert np.array_equal(a[m].rmse, b[m].rmse) and np.array_equal(a[m].estimates, b[m].estimates)
        assert np.all(a[m].rmse >= 0) and a[m].estimates.shape == (2, 1)
    out = tmp_path / "o"
    run_rmse(ExperimentConfig(**{**cfg.__dict__, "out_dir": str(out), "threads": 2}))
    csv = (out / "chain1_tc.csv").read_text().splitlines()
    assert csv[0] == "n,rmse,stderr" and csv[1].startswith("32,")
    assert float(csv[1].split(",")[1]) == pytest.approx(a["tc"].rmse[0], rel=1e-11)
    assert (out / "chain1_tc.svg").read_text().startswith("<svg")
    rep = json.loads((out / "chain1_rmse.json").read_text())
    assert rep["config_hash"] == cfg.digest() and set(rep["curves"]) == {"tc", "ii", "dtc"}


def test_threads_do_not_change_results():
    base = dict(name="mi_scenario1", seed=1, **SMALL)
    a = run_rmse(ExperimentConfig(**base, threads=1))["mi"]
    b = run_rmse(ExperimentConfig(**base, threads=3))["mi"]
    assert np.array_equal(a.estimates, b.estimates)


def test_truth_values_match_oracle(tmp_path):
    t = truth_values("chain1", 512, cache_dir=tmp_path)
    H = chain1_entropies(512)
    assert t["tc"] == pytest.approx(H[(0,)] + H[(1,)] + H[(2,)] - H[(0, 1, 2)], abs=1e-9)
    assert list(tmp_path.glob("truth_chain1_*.json"))
    assert truth_values("chain1", 512, cache_dir=tmp_path) == t


def test_svg_has_slope():
    curve = run_rmse(ExperimentConfig("mi_scenario2", seed=0, **SMALL))["mi"]
    svg = svg_loglog(curve)
    assert "slope" in svg and svg.count("<circle") == 2


def test_named_recipes_sample():
    for name in RECIPES:
        r = named_recipe(name, 24, 0)
        g, xi = r.sample()
        assert g.n == 24 and g.d == r.d


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        run_scenario("nope", 0, 64)
    with pytest.raises(UnknownScenario):
        named_recipe("nope", 64, 0)


def test_run_scenario_small_deterministic():
    fit = FitConfig(max_sweeps=1, seed=2)
    a = run_scenario("xor_synergy", 2, 128, fit)
    b = run_scenario("xor_synergy", 2, 128, fit)
    assert a == b
    e = a["estimate"]
    assert e["ii_lo"] - 1e-6 <= e["ii"] <= e["ii_hi"] + 1e-6
    assert set(a["pairwise_mi_normalized"]) == {"0,1", "0,2", "1,2"}


def test_appendix_report_fields():
    rep = run_scenario("appendix_case2", 0, 128, FitConfig(max_sweeps=1))
    assert 0 <= rep["von_neumann"]["normalized"] <= 1
    assert len(rep["mi_matrix"]["eigenvalues"]) == 3


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenario_truth_bounds(name):
    t = scenario_truth(name, 128)
    assert t["ii_lo"] - 1e-9 <= t["ii"] <= t["ii_hi"] + 1e-9
    assert 0 <= t["tc_normalized"] <= 1
