import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_obs, random_psd
from robscatter import (ConvergenceError, ValidationError, WeightFamily, assemble_S_hat,
                        extract_q, generate_observations, point_mass, solve_maronna)
from robscatter.errors import NumericalError
from robscatter.estimator import (assemble_S_corollary, maronna_rhs, quadratic_forms,
                                  spectral_norm)


def grid_root(f, lo, hi, levels=6, points=10_001):
    """Minimise |f| on successively refined uniform grids."""
    for _ in range(levels):
        z = np.linspace(lo, hi, points)
        k = int(np.argmin(np.abs(f(z))))
        step = z[1] - z[0]
        lo, hi = max(z[k] - step, 1e-12), z[k] + step
    return 0.5 * (lo + hi)


def scalar_oracle(y, w):
    """Root of z = (1/n) sum u(y_i^2 / z) y_i^2 by grid search over z in (0, 10].

    The equation is divided by z so that the trivial limit z -> 0 is not a minimiser.
    """
    y2 = np.abs(np.asarray(y)) ** 2
    f = lambda z: 1.0 - np.mean(w.phi(y2[None, :] / z[:, None]), axis=1)
    return grid_root(f, 1e-6, 10.0)


# scalar case

def test_scalar_two_sample_fixture():
    w = WeightFamily(alpha=0.5, c=0.5)
    res = solve_maronna(np.array([[1.0, 1.0]]), w)
    oracle = scalar_oracle([1.0, 1.0], w)
    assert oracle == pytest.approx(1.0, abs=1e-6)
    assert abs(res.C_hat[0, 0].real - oracle) <= 1e-6
    # explicit leave-one-out scalars: C_(i) = C - u(d_i) y_i^2 / n
    C = res.C_hat[0, 0].real
    loo = C - w.u(1.0 / C) / 2
    np.testing.assert_allclose(res.q, 1.0 / loo, atol=1e-8)
    np.testing.assert_allclose(res.q, 2.0, atol=1e-8)


@given(st.lists(st.floats(0.1, 3.0), min_size=3, max_size=8), st.floats(0.2, 2.0))
def test_scalar_random_samples(y, alpha):
    n = len(y)
    w = WeightFamily(alpha=alpha, c=1.0 / n) if (1 + alpha) / n < 1 else None
    if w is None:
        return
    res = solve_maronna(np.array([y]), w, tol=1e-12, max_iter=5000)
    assert res.C_hat[0, 0].real == pytest.approx(scalar_oracle(y, w), rel=1e-6)


# fixed-point structure

@pytest.fixture(scope="module")
def instance():
    obs = make_obs(20, 60, 10, 123)
    w = WeightFamily(alpha=0.5, c=obs.c)
    return obs, w, solve_maronna(obs, w)


def test_residual_and_iterations(instance):
    obs, w, res = instance
    assert res.residual <= 1e-9
    assert res.iterations <= 200
    Z = res.C_hat
    assert spectral_norm(maronna_rhs(obs, w, Z) - Z) / spectral_norm(Z) <= 1e-9


def test_rewriting_identity(instance):
    obs, w, res = instance
    S = assemble_S_hat(obs, w, res.q)
    assert spectral_norm(S - res.C_hat) / spectral_norm(res.C_hat) <= 1e-8


def test_positive_definite(instance):
    _, _, res = instance
    assert np.linalg.eigvalsh(res.C_hat)[0] > 0


def test_history(instance):
    _, _, res = instance
    assert len(res.history) == res.iterations + 1
    lines = res.history_csv().splitlines()
    assert lines[0] == "iter,residual" and len(lines) == res.iterations + 2


def test_identity_start_and_scaled_start(instance):
    obs, w, _ = instance
    a = solve_maronna(obs, w, tol=1e-11)
    b = solve_maronna(obs, w, tol=1e-11, init=2 * np.eye(20))
    assert spectral_norm(a.C_hat - b.C_hat) <= 10 * 1e-11 * spectral_norm(a.C_hat) * 10


def test_random_initialisations_agree(instance):
    obs, w, _ = instance
    rng = np.random.default_rng(0)
    sols = [solve_maronna(obs, w, tol=1e-11, init=random_psd(rng, 20) + 0.1 * np.eye(20)).C_hat
            for _ in range(5)]
    for S in sols[1:]:
        assert spectral_norm(S - sols[0]) <= 1e-8


def test_q_paths_agree():
    for seed in range(3):
        obs = make_obs(10, 40, 5, 40 + seed)
        w = WeightFamily(alpha=0.5, c=obs.c)
        res = solve_maronna(obs, w, tol=1e-12)
        direct = extract_q(obs, res, w, method="direct")
        np.testing.assert_allclose(extract_q(obs, res, w), direct, rtol=1e-8)
        np.testing.assert_allclose(extract_q(obs, res), res.q)


def test_extract_q_arguments(instance):
    obs, w, res = instance
    with pytest.raises(ValueError):
        extract_q(obs, res, w, method="bogus")
    with pytest.raises(ValueError):
        extract_q(obs, res, method="direct")


def test_q_concentrates_with_dimension():
    spread = {}
    for N in (20, 80):
        obs = generate_observations(np.eye(N), point_mass(1.0), 3 * N, 7)
        w = WeightFamily(alpha=0.5, c=obs.c)
        q = solve_maronna(obs, w).q
        spread[N] = q.max() - q.min()
    assert spread[80] < spread[20]


def test_non_convergence_raises(instance):
    obs, w, _ = instance
    with pytest.raises(ConvergenceError) as info:
        solve_maronna(obs, w, max_iter=3)
    assert info.value.iterations == 3


def test_bad_tolerance(instance):
    obs, w, _ = instance
    with pytest.raises(ValidationError):
        solve_maronna(obs, w, tol=0.0)


def test_singular_iterate():
    Y = np.ones((2, 5))
    with pytest.raises(NumericalError):
        quadratic_forms(Y, np.diag([1.0, 1e-17]))
    with pytest.raises(NumericalError):
        quadratic_forms(Y, -np.eye(2))


# assembly

def test_unit_weights_give_sample_covariance(instance):
    obs, w3, _ = instance
    w = WeightFamily(alpha=0.5, c=1 / 3)
    S = assemble_S_hat(obs, w, np.full(obs.n, 1.5))
    np.testing.assert_allclose(S, obs.sample_covariance(), atol=1e-12)
    assert np.max(np.abs(S - S.conj().T)) <= 1e-12


def test_small_delta_weights_approach_u0(instance):
    obs, _, _ = instance
    w = WeightFamily(alpha=0.5, c=1 / 3)
    S = assemble_S_hat(obs, w, np.full(obs.n, 1e-12))
    np.testing.assert_allclose(S, 3.0 * obs.sample_covariance(), rtol=1e-9)


def test_corollary_assembly(instance):
    obs, _, _ = instance
    w = WeightFamily(alpha=0.5, c=1 / 3)
    S1 = assemble_S_corollary(obs, w, 0.75, 0.75)
    np.testing.assert_allclose(S1, obs.sample_covariance(), atol=1e-12)
    S2 = assemble_S_hat(obs, w, 0.75 + obs.tau * 0.75)
    np.testing.assert_array_equal(S1, S2)
    # larger gamma, smaller weights
    S3 = assemble_S_corollary(obs, w, 0.75, 1.5)
    assert np.linalg.eigvalsh(S1 - S3)[0] >= -1e-12
    with pytest.raises(ValidationError):
        assemble_S_corollary(obs, w, 0.0, 1.0)
    with pytest.raises(ValidationError):
        assemble_S_hat(obs, w, np.zeros(obs.n))


def test_spectral_norm_examples():
    assert spectral_norm(np.diag([1.0, -3.0, 2.0])) == pytest.approx(3.0)
    assert spectral_norm(np.eye(7)) == pytest.approx(1.0)
    a = np.array([1.0, 2j, -1.0])
    assert spectral_norm(np.outer(a, a.conj())) == pytest.approx(np.linalg.norm(a) ** 2)
    with pytest.raises(ValidationError):
        spectral_norm(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(st.integers(1, 8), st.integers(0, 2**31))
def test_spectral_norm_matches_svd(N, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    H = X + X.conj().T
    assert spectral_norm(H) == pytest.approx(np.linalg.norm(H, 2), rel=1e-10)
