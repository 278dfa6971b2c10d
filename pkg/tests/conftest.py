import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from robscatter import WeightFamily, generate_mixing, generate_observations, point_mass

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def w3():
    """alpha = 0.5 with c = 1/3, the reference setting."""
    return WeightFamily(alpha=0.5, c=1 / 3)


def make_obs(N, n, K, seed, nu=None):
    A = generate_mixing(N, K, seed)
    return generate_observations(A, point_mass(1.0) if nu is None else nu, n, seed + 1)


def random_psd(rng, N, rank=None):
    rank = N if rank is None else rank
    X = (rng.standard_normal((N, rank)) + 1j * rng.standard_normal((N, rank))) / np.sqrt(2 * rank)
    return X @ X.conj().T
