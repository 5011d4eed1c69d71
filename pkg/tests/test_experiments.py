import json
import math

import numpy as np
import pytest

from quantspec import InvalidInputError
from quantspec.experiments import (ExperimentConfig, block_size_rule, population_quantile, run_coverage,
                                   run_experiment, run_mise, run_size_power)

LAM = 2 * math.pi * 0.22


def test_block_size_rule():
    assert [block_size_rule(n) for n in (100, 200, 300, 400, 600)] == [5, 8, 10, 10, 12]


def test_config_validation():
    with pytest.raises(InvalidInputError):
        ExperimentConfig(experiment="tables")
    with pytest.raises(InvalidInputError):
        ExperimentConfig(replications=0)
    with pytest.raises(InvalidInputError):
        ExperimentConfig(lambdas=[0.0])
    with pytest.raises(InvalidInputError):
        ExperimentConfig.from_dict({"experiment": "coverage", "replicates": 10})


def test_population_quantile():
    from scipy import stats
    cfg = ExperimentConfig(process="iid", dist="chi2_3")
    assert population_quantile(cfg, 0.5) == pytest.approx(stats.chi2.median(3))
    assert population_quantile(ExperimentConfig(process="sv"), 0.5) == 0.0
    with pytest.raises(InvalidInputError):
        population_quantile(ExperimentConfig(process="qar"), 0.5)


class TestCoverage:
    def test_cells_and_se(self):
        cfg = ExperimentConfig(n=[600], taus=[0.5], classical=True, ks=[4], lambdas=[LAM], replications=150, seed=0)
        res = run_coverage(cfg)
        assert len(res.cells) == 2
        for c in res.cells:
            assert 0 <= c.estimate <= 1
            assert c.mc_se == pytest.approx(math.sqrt(c.estimate * (1 - c.estimate) / 150))
        assert res.find(estimator="quantile", tau=0.5).replications == 150

    def test_cauchy_classical_not_applicable(self):
        cfg = ExperimentConfig(n=[600], taus=[0.5], classical=True, contamination_p=0.15,
                               contamination_noise="cauchy", replications=20)
        res = run_coverage(cfg)
        cell = res.find(estimator="classical")
        assert cell.note == "not-applicable" and math.isnan(cell.estimate)
        assert 0 <= res.find(estimator="quantile").estimate <= 1

    def test_boundary(self):
        from quantspec import BoundaryError
        with pytest.raises(BoundaryError):
            run_coverage(ExperimentConfig(n=[50], lambdas=[0.1], ks=[4], replications=5))


class TestReproducibility:
    def test_worker_count(self):
        cfg1 = ExperimentConfig(experiment="size_power", process="qar", n=[100], taus=[0.1, 0.9],
                                test="bootstrap", replications=250, seed=3, workers=1)
        cfg2 = ExperimentConfig(**{**cfg1.__dict__, "workers": 2})
        a, b = run_size_power(cfg1), run_size_power(cfg2)
        assert a.cells == b.cells
        assert a.to_csv() == b.to_csv()

    def test_same_config_same_result(self):
        cfg = ExperimentConfig(n=[300], replications=120, seed=5)
        assert run_coverage(cfg).cells == run_coverage(cfg).cells


@pytest.fixture(scope="module")
def result():
    cfg = ExperimentConfig(experiment="mise", n=[300, 900], taus=[0.5], classical=True,
                           bandwidth_cs=[5, 9, 13, 17, 21], replications=200, seed=1)
    return run_mise(cfg)


class TestMise:
    def test_nonnegative(self, result):
        assert all(c.estimate >= 0 for c in result.cells)

    @pytest.mark.parametrize("estimator", ["classical", "quantile"])
    def test_minimizer_near_13(self, result, estimator):
        cells = [c for c in result.cells if c.n == 300 and c.estimator == estimator]
        best = min(cells, key=lambda c: c.estimate).c
        assert best in (9.0, 13.0, 17.0)

    @pytest.mark.parametrize("estimator", ["classical", "quantile"])
    def test_decreases_with_n(self, result, estimator):
        best = {n: min(c.estimate for c in result.cells if c.n == n and c.estimator == estimator)
                for n in (300, 900)}
        assert best[900] < best[300]


class TestSizePower:
    def test_rows_per_n_tau(self):
        cfg = ExperimentConfig(experiment="size_power", process="iid", dist="chi2_3", n=[100, 200],
                               taus=[0.1, 0.5, 0.9], test="monte_carlo", replications=100,
                               null_replications=999, seed=1)
        res = run_experiment(cfg)
        assert sorted((c.n, c.tau) for c in res.cells) == [(n, t) for n in (100, 200) for t in (0.1, 0.5, 0.9)]
        text = res.to_csv()
        assert text.splitlines()[0].split(",")[:4] == ["experiment", "process", "estimator", "n"]
        assert len(text.splitlines()) == 7
        doc = json.loads(res.to_json())
        assert set(doc) == {"config", "cells", "runtime"}

    def test_full_bootstrap_mode(self):
        cfg = ExperimentConfig(experiment="size_power", process="ar2", n=[100], taus=[0.5], test="bootstrap",
                               warp_speed=False, replications=10, bootstrap_replications=99, seed=2)
        cell = run_size_power(cfg).cells[0]
        assert cell.b_n == 5 and cell.estimate >= 0.8

    def test_pointwise_mode(self):
        cfg = ExperimentConfig(experiment="size_power", process="ar2", n=[600], taus=[0.5], test="pointwise",
                               ks=[4], lambdas=[LAM], replications=50, seed=2)
        assert run_size_power(cfg).cells[0].estimate > 0.9
