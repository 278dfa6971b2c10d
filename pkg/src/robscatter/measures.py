"""Finite discrete probability measures.

Used for the scale distribution ``nu`` of the noise, its empirical version
``nu_n`` and the eigenvalue distribution of ``B_N``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelWarning, ValidationError

__all__ = [
    "DiscreteMeasure",
    "point_mass",
    "empirical",
    "integrate",
    "sample_tau",
    "spectral_measure",
    "check_mass_condition",
]

WEIGHT_SUM_TOL = 1e-12
NORMALIZATION_TOL = 1e-6
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability measure ``sum_k weights[k] * delta(atoms[k])``."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_1d(np.asarray(self.atoms, dtype=float)).copy()
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float)).copy()
        if atoms.ndim != 1 or atoms.shape != weights.shape or atoms.size == 0:
            raise ValidationError("atoms and weights must be non-empty 1-d arrays of equal length")
        if not np.all(np.isfinite(atoms)) or np.any(atoms < 0):
            raise ValidationError("atoms must be finite and non-negative")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise ValidationError("weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights sum to {weights.sum()!r}, expected 1")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return np.array_equal(self.atoms, other.atoms) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.atoms.tobytes(), self.weights.tobytes()))

    def __len__(self):
        return self.atoms.size

    @property
    def mean(self) -> float:
        return float(self.weights @ self.atoms)

    def integrate(self, f) -> float:
        return integrate(self, f)

    def mass_below(self, m: float) -> float:
        """``mu([0, m))``."""
        return float(self.weights[self.atoms < m].sum())

    def to_dict(self):
        return {"atoms": self.atoms.tolist(), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d["atoms"], d["weights"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed measure object: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        return cls.from_dict(json.loads(text))


def point_mass(x: float) -> DiscreteMeasure:
    return DiscreteMeasure([x], [1.0])


def empirical(samples) -> DiscreteMeasure:
    """Empirical measure of ``samples``; repeated values are merged into one atom."""
    samples = np.asarray(samples, dtype=float).ravel()
    atoms, counts = np.unique(samples, return_counts=True)
    weights = counts / counts.sum()
    # renormalise so rounding cannot break the sum-to-one invariant
    weights = weights / weights.sum()
    return DiscreteMeasure(atoms, weights)


def integrate(mu: DiscreteMeasure, f) -> float:
    """Return ``sum_k mu.weights[k] * f(mu.atoms[k])``.

    ``f`` is called once on the whole atom array; a scalar return value is
    broadcast, so ``lambda t: 1.0`` is accepted.
    """
    vals = np.broadcast_to(np.asarray(f(mu.atoms), dtype=float), mu.atoms.shape)
    if not np.all(np.isfinite(vals)):
        raise DomainError("integrand is not finite on every atom")
    return float(mu.weights @ vals)


def sample_tau(mu: DiscreteMeasure, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` i.i.d. scales from ``mu``, which must have unit mean."""
    if abs(mu.mean - 1.0) > NORMALIZATION_TOL:
        raise ValidationError(f"scale measure must have unit mean, got {mu.mean:.8g}")
    if n < 1:
        raise ValidationError("n must be at least 1")
    rng = np.random.default_rng(seed)
    idx = rng.choice(mu.atoms.size, size=n, p=mu.weights)
    return mu.atoms[idx]


def spectral_measure(B) -> DiscreteMeasure:
    """Empirical eigenvalue distribution of the Hermitian PSD matrix ``B``."""
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError("B must be square")
    if np.max(np.abs(B - B.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValidationError("B is not Hermitian")
    lam = np.linalg.eigvalsh(B)
    scale = max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    if lam[0] < -1e-10 * scale:
        raise ValidationError(f"B is not positive semi-definite (eigenvalue {lam[0]:.3g})")
    lam = np.clip(lam, 0.0, None)
    N = lam.size
    return DiscreteMeasure(lam, np.full(N, 1.0 / N))


def check_mass_condition(nu: DiscreteMeasure, m: float, eps: float, phi_inf: float) -> bool:
    """Check ``nu([0, m)) < eps < 1 - 1/phi_inf``; warn and return False otherwise."""
    ok = nu.mass_below(m) < eps < 1.0 - 1.0 / phi_inf
    if not ok:
        warnings.warn(
            f"scale measure puts mass {nu.mass_below(m):.3g} below m={m}; need < eps={eps} "
            f"< {1.0 - 1.0 / phi_inf:.3g}",
            ModelWarning,
            stacklevel=2,
        )
    return ok
