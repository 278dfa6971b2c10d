import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robscatter import DiscreteMeasure, ModelWarning, ValidationError, empirical, point_mass
from robscatter.errors import DomainError
from robscatter.measures import check_mass_condition, integrate, sample_tau, spectral_measure


def test_integrate_examples():
    assert integrate(point_mass(1.0), lambda t: t) == 1.0
    assert integrate(DiscreteMeasure([0.5, 1.5], [0.5, 0.5]), lambda t: t) == 1.0
    mu = DiscreteMeasure([1.0, 2.0, 3.0], [1 / 3, 1 / 3, 1 / 3])
    assert integrate(mu, lambda t: t**2) == pytest.approx(14 / 3, rel=1e-15)


def test_integrate_scalar_integrand():
    assert integrate(DiscreteMeasure([0.5, 1.5], [0.25, 0.75]), lambda t: 2.0) == 2.0


def test_integrate_rejects_non_finite():
    with pytest.raises(DomainError), np.errstate(divide="ignore"):
        integrate(DiscreteMeasure([0.0, 1.0], [0.5, 0.5]), lambda t: 1.0 / t)


@pytest.mark.parametrize("atoms, weights", [
    ([1.0], [0.9]),
    ([-1.0, 1.0], [0.5, 0.5]),
    ([1.0, 2.0], [1.0, 0.0]),
    ([np.inf], [1.0]),
    ([], []),
    ([1.0, 2.0], [1.0]),
])
def test_invalid_measures(atoms, weights):
    with pytest.raises(ValidationError):
        DiscreteMeasure(atoms, weights)


def test_measure_is_read_only():
    mu = DiscreteMeasure([0.5, 1.5], [0.5, 0.5])
    with pytest.raises(ValueError):
        mu.atoms[0] = 2.0


def test_json_round_trip():
    mu = DiscreteMeasure([0.25, 1.0, 3.0], [0.2, 0.5, 0.3])
    assert DiscreteMeasure.from_json(mu.to_json()) == mu
    assert hash(DiscreteMeasure.from_dict(mu.to_dict())) == hash(mu)


def test_from_dict_malformed():
    with pytest.raises(ValidationError):
        DiscreteMeasure.from_dict({"atoms": [1.0]})


def test_empirical_merges_duplicates():
    mu = empirical([1.0, 2.0, 1.0, 1.0])
    np.testing.assert_array_equal(mu.atoms, [1.0, 2.0])
    np.testing.assert_allclose(mu.weights, [0.75, 0.25])


def test_sample_tau_examples():
    np.testing.assert_array_equal(sample_tau(point_mass(1.0), 5, 0), np.ones(5))
    two = DiscreteMeasure([0.5, 1.5], [0.5, 0.5])
    draws = sample_tau(two, 10_000, 3)
    assert abs(draws.mean() - 1.0) < 0.05
    np.testing.assert_array_equal(draws, sample_tau(two, 10_000, 3))


def test_sample_tau_requires_unit_mean():
    with pytest.raises(ValidationError):
        sample_tau(point_mass(2.0), 5, 0)


def test_disjoint_seeds_are_uncorrelated():
    two = DiscreteMeasure([0.5, 1.5], [0.5, 0.5])
    a = sample_tau(two, 10_000, 11)
    b = sample_tau(two, 10_000, 12)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_spectral_measure_examples():
    mu = spectral_measure(np.eye(3))
    np.testing.assert_array_equal(mu.atoms, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(mu.weights, [1 / 3] * 3)
    np.testing.assert_array_equal(spectral_measure(np.diag([0.0, 2.0])).atoms, [0.0, 2.0])


def test_spectral_measure_matches_svd():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    mu = spectral_measure(A @ A.conj().T)
    s = np.linalg.svd(A, compute_uv=False)
    expected = np.sort(np.concatenate([s**2, np.zeros(2)]))
    np.testing.assert_allclose(mu.atoms, expected, atol=1e-8)


def test_spectral_measure_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        spectral_measure(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_mass_condition_warns():
    nu = DiscreteMeasure([0.01, 1.99], [0.5, 0.5])
    with pytest.warns(ModelWarning):
        assert not check_mass_condition(nu, m=0.1, eps=0.2, phi_inf=1.5)
    assert check_mass_condition(point_mass(1.0), m=0.1, eps=0.2, phi_inf=1.5)


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_spectral_measure_mean_is_normalised_trace(N, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    B = X @ X.conj().T
    assert spectral_measure(B).mean == pytest.approx(np.trace(B).real / N, rel=1e-9)


@given(st.lists(st.floats(0.0, 100.0), min_size=1, max_size=30))
def test_empirical_mean_matches_sample_mean(samples):
    mu = empirical(samples)
    assert mu.mean == pytest.approx(np.mean(samples), rel=1e-12, abs=1e-12)
    assert mu.weights.sum() == pytest.approx(1.0, abs=1e-12)
