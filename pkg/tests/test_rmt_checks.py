import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robscatter import ModelWarning, calibration
from robscatter.rmt_checks import (CSV_COLUMNS, CheckReport, check_concentration,
                                   check_deterministic_equivalent, check_gaussian_equivalence,
                                   check_smallest_eigenvalue, check_trace_lemma, gamma_tail_bound,
                                   reports_csv, wilson_interval)


def test_report_pass_flag():
    assert CheckReport("x", 1, 2, 3, 0, 0.5, 0.5).passed
    assert not CheckReport("x", 1, 2, 3, 0, 0.6, 0.5).passed


def test_reports_csv_layout():
    text = reports_csv([CheckReport("x", 1, 2, 3, 4, 0.25, 0.5)])
    header, row = text.splitlines()
    assert header.split(",") == CSV_COLUMNS
    assert row == "x,1,2,3,4,0.25,0.5,true"


# trace lemma

def test_trace_lemma_zero_matrix():
    assert check_trace_lemma(20, 60, 2, 0, matrix="zero").statistic == 0.0


def test_trace_lemma_identity_fixture():
    passes = [check_trace_lemma(100, 300, 1, s, matrix="identity", threshold=0.35).passed
              for s in range(20)]
    assert sum(passes) >= 19


def test_trace_lemma_default_threshold():
    r = check_trace_lemma(50, 150, 1, 0, kappa=2.0)
    assert r.threshold == pytest.approx(calibration.TRACE_LEMMA_CONSTANT * 2.0 / math.sqrt(50))
    assert r.passed


def test_trace_lemma_decreases_with_dimension():
    wins = sum(check_trace_lemma(400, 1200, 1, s).statistic < check_trace_lemma(100, 300, 1, s).statistic
               for s in range(10))
    assert wins >= 9


def test_trace_lemma_unknown_matrix():
    with pytest.raises(ValueError):
        check_trace_lemma(20, 60, 1, 0, matrix="dense")


def test_trace_lemma_warns_below_calibrated_range():
    with pytest.warns(ModelWarning):
        check_trace_lemma(10, 30, 1, 0)


# smallest eigenvalue

def test_smallest_eigenvalue_noise_only():
    r = check_smallest_eigenvalue(50, 150, 1, 0, signal=False)
    floor = (1 - math.sqrt(1 / 3)) ** 2 * 0.5
    assert r.extras["min_lambda_loo"] > floor
    assert r.passed


def test_smallest_eigenvalue_interlacing():
    for s in range(3):
        r = check_smallest_eigenvalue(30, 90, 1, s)
        assert r.extras["min_lambda_full"] >= r.extras["min_lambda_loo"]
        assert r.extras["max_norm"] <= calibration.K_MAX


def test_smallest_eigenvalue_near_square_flags():
    with pytest.warns(ModelWarning):
        r = check_smallest_eigenvalue(10, 11, 1, 0, signal=False)
    assert isinstance(r.passed, bool)


# concentration

def test_concentration_trivial_point():
    assert gamma_tail_bound([1.0], 0.0) >= 1.0
    assert check_concentration([1.0], [0.0], 1000, 0).passed


def test_concentration_far_tail():
    r = check_concentration(np.full(100, 0.01), [2.0], 100_000, 0)
    assert r.extras["grid"][0]["tail"] == 0.0
    assert r.passed


def test_concentration_detects_a_false_bound():
    # C = 1e-6 makes the claimed bound wrong near the mean
    r = check_concentration(np.full(10, 0.1), [1.0], 10_000, 0, C=1e-6)
    assert not r.passed


def test_concentration_rejects_empty():
    with pytest.raises(ValueError):
        check_concentration([], [1.0], 10, 0)


@given(st.integers(0, 200), st.integers(1, 200))
def test_wilson_interval_contains_estimate(k, m):
    k = min(k, m)
    lo, hi = wilson_interval(k, m, 3.0)
    assert 0.0 <= lo <= k / m <= hi <= 1.0


# gaussian equivalence

def test_gaussian_equivalence_without_normalisation():
    r = check_gaussian_equivalence(20, 60, 2, 0, normalize=False)
    assert r.statistic == 0.0


def test_gaussian_equivalence_bound_holds():
    r = check_gaussian_equivalence(50, 150, 3, 1)
    assert all(g <= b + 1e-12 for g, b in zip(r.extras["gaps"], r.extras["bounds"]))


def test_gaussian_equivalence_trend():
    wins = sum(check_gaussian_equivalence(200, 600, 3, s).statistic
               < check_gaussian_equivalence(50, 150, 3, s).statistic for s in range(5))
    assert wins >= 4


# deterministic equivalent

def test_deterministic_equivalent_passes():
    r = check_deterministic_equivalent(50, 150, 1, 0)
    assert r.passed


def test_reproducible_by_seed():
    a = check_gaussian_equivalence(20, 60, 2, 5)
    b = check_gaussian_equivalence(20, 60, 2, 5)
    assert a == b and a.statistic == b.statistic
