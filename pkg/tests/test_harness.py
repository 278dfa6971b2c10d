import dataclasses
import math
import random

import numpy as np
import pytest

from robscatter import ConfigError, DiscreteMeasure, ExperimentConfig, run_equivalence_diagnostics
from robscatter.harness import (AGGREGATE_COLUMNS, TRIAL_COLUMNS, TrialResult, aggregate,
                                aggregate_csv, diagnostics_csv, run_trial, run_trials, trials_csv)

SMALL = ExperimentConfig(N_grid=(8, 12), trials=3, seed=42)


def test_trial_csv_is_reproducible():
    cfg = dataclasses.replace(SMALL, trials=1)
    assert trials_csv(run_trials(cfg)) == trials_csv(run_trials(cfg))


def test_header_layout():
    results = run_trials(SMALL)
    assert trials_csv(results).splitlines()[0].split(",") == TRIAL_COLUMNS
    assert aggregate_csv(aggregate(results)).splitlines()[0].split(",") == AGGREGATE_COLUMNS


def test_seed_additivity():
    whole = run_trials(dataclasses.replace(SMALL, trials=4))
    first = run_trials(dataclasses.replace(SMALL, trials=2))
    second = run_trials(dataclasses.replace(SMALL, trials=2, trial_offset=2))
    assert sorted(first + second, key=lambda r: (r.N, r.trial)) == whole


def test_parallel_matches_serial():
    serial = run_trials(SMALL)
    parallel = run_trials(dataclasses.replace(SMALL, workers=2))
    assert trials_csv(serial) == trials_csv(parallel)


def test_aggregate_is_order_independent():
    results = run_trials(dataclasses.replace(SMALL, trials=6))
    shuffled = results[:]
    random.Random(0).shuffle(shuffled)
    assert aggregate(results) == aggregate(shuffled)


def test_aggregate_values():
    rows = [TrialResult(N=5, trial=t, converged=True, mse_spectral=x) for t, x in enumerate([1.0, 2.0, 3.0])]
    (p,) = aggregate(rows)
    assert p.mse == pytest.approx(2.0)
    assert p.stderr == pytest.approx(math.sqrt(1.0 / 3))
    assert p.ok and p.trials_ok == 3


def test_failed_trials_are_recorded():
    cfg = dataclasses.replace(SMALL, max_iter=2)
    results = run_trials(cfg)
    assert all(not r.converged and r.error for r in results)
    points = aggregate(results)
    assert all(not p.ok and p.trials_ok == 0 and math.isnan(p.mse) for p in points)
    line = trials_csv(results).splitlines()[1]
    assert line.endswith(",,,,0,false")


def test_failure_policy_threshold():
    ok = [TrialResult(N=5, trial=t, converged=True, mse_spectral=1.0) for t in range(19)]
    bad = [TrialResult(N=5, trial=19, converged=False)]
    assert aggregate(ok + bad)[0].ok
    assert not aggregate(ok[:18] + bad * 2)[0].ok


def test_every_emitted_number_is_finite():
    for r in run_trials(SMALL):
        assert r.converged
        for x in (r.mse_spectral, r.mse_frobenius, r.q_delta_gap):
            assert math.isfinite(x) and x >= 0


def test_full_rank_signal_is_near_sample_covariance():
    cfg = ExperimentConfig(N_grid=(30,), trials=2, ratio_K=1.0, seed=3)
    r = run_trial(cfg, 30, 0)
    assert r.converged and r.mse_spectral < 0.5


def test_diagnostics_rows():
    rows = run_equivalence_diagnostics(SMALL)
    assert len(rows) == 6
    assert all(r["delta_ref"] == pytest.approx(1.5) for r in rows)
    assert all(r["spectral_gap"] ** 2 == pytest.approx(t.mse_spectral)
               for r, t in zip(rows, run_trials(SMALL)))
    assert diagnostics_csv(rows).count("\n") == 7


def test_empty_grid():
    cfg = dataclasses.replace(SMALL, N_grid=())
    assert run_trials(cfg) == [] and aggregate([]) == []
    assert run_equivalence_diagnostics(cfg) == []


@pytest.mark.parametrize("change", [
    {"ratio_n": 1.0}, {"ratio_n": 1.4}, {"ratio_K": 0.0}, {"ratio_K": 1.5}, {"trials": 0},
    {"N_grid": (0,)}, {"alpha": 0.0}, {"tol": 0.0},
    {"nu": DiscreteMeasure([0.5, 2.0], [0.5, 0.5])},
])
def test_config_validation(change):
    with pytest.raises(ConfigError):
        dataclasses.replace(SMALL, **change)


def test_config_round_trip():
    cfg = dataclasses.replace(SMALL, nu=DiscreteMeasure([0.5, 1.5], [0.5, 0.5]))
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"bogus": 1})


def test_dims():
    assert SMALL.dims(20) == (20, 60, 10)
    assert SMALL.weight(20).c == pytest.approx(1 / 3)
