"""Observation model ``y_i = A s_i + sqrt(tau_i) w_i``.

``s_i`` is standard circular complex Gaussian in dimension ``K`` and ``w_i`` is
uniform on the complex sphere of radius ``sqrt(N)``. Columns are generated
from per-column seeds so any single column can be regenerated in isolation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _seeding
from .errors import ConfigError, ModelWarning, ValidationError
from .measures import DiscreteMeasure, sample_tau

__all__ = [
    "ObservationSet",
    "complex_gaussian",
    "unit_sphere_noise",
    "generate_mixing",
    "draw_components",
    "generate_observations",
]

B_REL_TOL = 1e-10
MIN_TRACE = 1e-3
MAX_NORM = 1e3


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Circular complex Gaussian with ``E|z|^2 = 1``."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def unit_sphere_noise(rng: np.random.Generator, N: int) -> np.ndarray:
    """A vector uniform on the complex sphere of radius ``sqrt(N)``."""
    g = complex_gaussian(rng, N)
    return np.sqrt(N) * g / np.linalg.norm(g)


def _to_pairs(M):
    M = np.asarray(M)
    return np.stack([M.real, M.imag], axis=-1).tolist()


def _from_pairs(data):
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1] != 2:
        raise ValidationError("complex arrays are encoded as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Observations ``Y`` (``N x n``) with the scales and mixing matrix behind them."""

    Y: np.ndarray
    tau: np.ndarray
    A: np.ndarray
    B: np.ndarray | None = None

    def __post_init__(self):
        Y = np.atleast_2d(np.asarray(self.Y, dtype=complex))
        tau = np.atleast_1d(np.asarray(self.tau, dtype=float))
        A = np.asarray(self.A, dtype=complex)
        if A.ndim == 1:
            A = A[:, None]
        N, n = Y.shape
        if A.shape[0] != N or A.shape[1] < 1:
            raise ValidationError(f"A must be {N} x K with K >= 1, got {A.shape}")
        if tau.shape != (n,) or np.any(tau < 0):
            raise ValidationError("tau must hold n non-negative scales")
        B_ref = A @ A.conj().T
        if self.B is None:
            B = B_ref
        else:
            B = np.asarray(self.B, dtype=complex)
            err = np.linalg.norm(B - B_ref)
            if err > B_REL_TOL * max(1.0, np.linalg.norm(B_ref)):
                raise ValidationError("B does not equal A A^*")
        for name, arr in (("Y", Y), ("tau", tau), ("A", A), ("B", B)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def N(self) -> int:
        return self.Y.shape[0]

    @property
    def n(self) -> int:
        return self.Y.shape[1]

    @property
    def K(self) -> int:
        return self.A.shape[1]

    @property
    def c(self) -> float:
        return self.N / self.n

    def sample_covariance(self) -> np.ndarray:
        return self.Y @ self.Y.conj().T / self.n

    def to_dict(self):
        return {
            "Y": _to_pairs(self.Y),
            "tau": self.tau.tolist(),
            "A": _to_pairs(self.A),
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(Y=_from_pairs(d["Y"]), tau=d["tau"], A=_from_pairs(d["A"]))
        except KeyError as exc:
            raise ValidationError(f"observation set is missing field {exc}") from exc


def validate_signal(B) -> None:
    """Warn when ``B`` is outside the bounded-norm, non-vanishing-trace regime."""
    N = B.shape[0]
    tr = float(np.real(np.trace(B))) / N
    norm = float(np.max(np.abs(np.linalg.eigvalsh(B)), initial=0.0))
    if tr < MIN_TRACE:
        warnings.warn(f"tr(B)/N = {tr:.3g} is below {MIN_TRACE}", ModelWarning, stacklevel=3)
    if norm > MAX_NORM:
        warnings.warn(f"||B|| = {norm:.3g} exceeds {MAX_NORM}", ModelWarning, stacklevel=3)


def generate_mixing(N: int, K: int, seed: int) -> np.ndarray:
    """``N x K`` matrix of i.i.d. circular complex Gaussians with variance ``1/K``."""
    if N < 1 or K < 1:
        raise ConfigError("N and K must be at least 1")
    rng = _seeding.rng(seed, _seeding.STREAM_MIXING)
    return complex_gaussian(rng, (N, K)) / np.sqrt(K)


def draw_components(seed: int, N: int, K: int, n: int):
    """Signal vectors ``S`` (``K x n``) and noise directions ``W`` (``N x n``).

    Column ``i`` depends only on ``(seed, i)``.
    """
    S = np.empty((K, n), dtype=complex)
    W = np.empty((N, n), dtype=complex)
    for i in range(n):
        S[:, i] = complex_gaussian(_seeding.rng(seed, _seeding.STREAM_SIGNAL, i), K)
        W[:, i] = unit_sphere_noise(_seeding.rng(seed, _seeding.STREAM_NOISE, i), N)
    return S, W


def generate_observations(A, nu: DiscreteMeasure, n: int, seed: int) -> ObservationSet:
    """Draw ``n`` observations ``y_i = A s_i + sqrt(tau_i) w_i``."""
    A = np.asarray(A, dtype=complex)
    if A.ndim == 1:
        A = A[:, None]
    N, K = A.shape
    if n <= N:
        raise ConfigError(f"need n > N for c < 1, got N={N}, n={n}")
    tau = sample_tau(nu, n, _seeding.derive_seed(seed, _seeding.STREAM_TAU))
    S, W = draw_components(seed, N, K, n)
    Y = A @ S + np.sqrt(tau) * W
    obs = ObservationSet(Y=Y, tau=tau, A=A)
    validate_signal(obs.B)
    return obs
