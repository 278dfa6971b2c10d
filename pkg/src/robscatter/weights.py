"""Weight function ``u`` of the Maronna estimator and its derived functions.

For a weight ``u`` and aspect ratio ``c = N/n`` the estimator theory works
with

* ``phi(x) = x u(x)``, increasing with limit ``phi_inf``,
* ``g(x) = x / (1 - c phi(x))``, an increasing bijection of ``[0, inf)``,
* ``v = u o g^{-1}``, non-increasing,
* ``psi(x) = x v(x)``, increasing with limit ``psi_inf = phi_inf / (1 - c phi_inf)``.

All evaluators accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError, ConvergenceError, DomainError

__all__ = [
    "FAMILIES",
    "WeightFamily",
    "eval_u",
    "eval_phi",
    "eval_g",
    "eval_g_inv",
    "eval_v",
    "eval_psi",
]

BISECT_RTOL = 1e-12
BISECT_MAX_ITER = 200


class _Family(NamedTuple):
    u: Callable[[np.ndarray, float], np.ndarray]
    phi: Callable[[np.ndarray, float], np.ndarray]
    phi_inf: Callable[[float], float]
    # optional closed forms; None means fall back to bisection
    g_inv: Callable[[np.ndarray, float, float], np.ndarray] | None
    phi_inv: Callable[[np.ndarray, float], np.ndarray] | None


def _shifted_inverse_g_inv(y, alpha, c):
    # positive root of x^2 + b x - alpha y = 0 with b = alpha - y (1 - c (1 + alpha))
    b = alpha - y * (1.0 - c * (1.0 + alpha))
    disc = np.sqrt(b * b + 4.0 * alpha * y)
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = 2.0 * alpha * y / (b + disc)
    return np.where(b > 0, stable, 0.5 * (disc - b))


FAMILIES: dict[str, _Family] = {
    # u(t) = (1 + alpha) / (t + alpha)
    "shifted_inverse": _Family(
        u=lambda x, a: (1.0 + a) / (x + a),
        phi=lambda x, a: (1.0 + a) * x / (x + a),
        phi_inf=lambda a: 1.0 + a,
        g_inv=_shifted_inverse_g_inv,
        phi_inv=lambda y, a: a * y / (1.0 + a - y),
    ),
}


def _as_nonneg(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be non-negative, got {x!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _bisect_increasing(f, y, upper_limit=np.inf):
    """Solve ``f(x) = y`` for an increasing ``f`` with ``f(0) = 0``, elementwise.

    The bracket starts at ``[0, max(1, y)]`` and is expanded geometrically;
    ``upper_limit`` caps it for functions defined on a bounded interval.
    """
    y = np.asarray(y, dtype=float)
    lo = np.zeros_like(y)
    hi = np.maximum(1.0, y)
    hi = np.minimum(hi, upper_limit)
    for _ in range(BISECT_MAX_ITER):
        short = f(hi) < y
        if not np.any(short):
            break
        hi = np.where(short, np.minimum(2.0 * hi, upper_limit), hi)
    else:
        raise ConvergenceError("bracket expansion failed in inverse evaluation",
                               iterations=BISECT_MAX_ITER)
    for it in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        below = fm < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        resid = np.abs(f(0.5 * (lo + hi)) - y)
        if np.all((resid <= BISECT_RTOL * (1.0 + y)) | (hi - lo <= 4 * np.finfo(float).eps * hi)):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class WeightFamily:
    """A weight function ``u`` together with the aspect ratio ``c = N/n``.

    Construction fails with :class:`ConfigError` unless ``c * phi_inf < 1``.
    """

    alpha: float
    c: float
    kind: str = "shifted_inverse"

    def __post_init__(self):
        if self.kind not in FAMILIES:
            raise ConfigError(f"unknown weight family {self.kind!r}; known: {sorted(FAMILIES)}")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if not 0.0 < self.c < 1.0:
            raise ConfigError(f"aspect ratio c must lie in (0, 1), got {self.c}")
        if not self.phi_inf > 1.0:
            raise ConfigError("phi_inf must exceed 1")
        if self.c * self.phi_inf >= 1.0:
            raise ConfigError(
                f"c * phi_inf = {self.c * self.phi_inf:.6g} >= 1: the estimator is not defined"
            )

    @property
    def _family(self) -> _Family:
        return FAMILIES[self.kind]

    @property
    def phi_inf(self) -> float:
        return float(self._family.phi_inf(self.alpha))

    @property
    def psi_inf(self) -> float:
        return self.phi_inf / (1.0 - self.c * self.phi_inf)

    def with_c(self, c: float) -> "WeightFamily":
        return WeightFamily(alpha=self.alpha, c=c, kind=self.kind)

    def u(self, x):
        x = _as_nonneg(x)
        return _out(self._family.u(x, self.alpha))

    def phi(self, x):
        x = _as_nonneg(x)
        return _out(self._family.phi(x, self.alpha))

    def phi_inv(self, y):
        """Inverse of ``phi`` on ``[0, phi_inf)``."""
        y = _as_nonneg(y, "y")
        if np.any(y >= self.phi_inf):
            raise DomainError(f"phi_inv is defined on [0, {self.phi_inf}), got {y!r}")
        fam = self._family
        if fam.phi_inv is not None:
            return _out(fam.phi_inv(y, self.alpha))
        return _out(_bisect_increasing(lambda t: fam.phi(t, self.alpha), y))

    def g(self, x):
        x = _as_nonneg(x)
        return _out(x / (1.0 - self.c * self._family.phi(x, self.alpha)))

    def g_inv(self, y, method="auto"):
        """Inverse of ``g``.

        ``method`` is ``"closed"`` (family closed form), ``"bisect"`` or
        ``"auto"`` (closed form when available).
        """
        y = _as_nonneg(y, "y")
        fam = self._family
        if method not in ("auto", "closed", "bisect"):
            raise ValueError(f"unknown method {method!r}")
        if method != "bisect" and fam.g_inv is not None:
            return _out(fam.g_inv(y, self.alpha, self.c))
        if method == "closed":
            raise ValueError(f"family {self.kind!r} has no closed-form inverse")
        g = lambda t: t / (1.0 - self.c * fam.phi(t, self.alpha))
        return _out(_bisect_increasing(g, y))

    def v(self, x):
        return _out(self._family.u(np.asarray(self.g_inv(x)), self.alpha))

    def psi(self, x):
        x = _as_nonneg(x)
        return _out(x * np.asarray(self.v(x)))

    def psi_ratio(self, x):
        """``psi(x) / (1 + c psi(x))``, which equals ``phi(g^{-1}(x))``."""
        p = np.asarray(self.psi(x))
        return _out(p / (1.0 + self.c * p))

    def delta_weight(self, x):
        """``v(x) / (1 + c psi(x))``, the per-sample weight in the deterministic equivalents."""
        x = _as_nonneg(x)
        vx = np.asarray(self.v(x))
        return _out(vx / (1.0 + self.c * x * vx))


def eval_u(w: WeightFamily, x):
    return w.u(x)


def eval_phi(w: WeightFamily, x):
    return w.phi(x)


def eval_g(w: WeightFamily, x):
    return w.g(x)


def eval_g_inv(w: WeightFamily, y):
    return w.g_inv(y)


def eval_v(w: WeightFamily, x):
    return w.v(x)


def eval_psi(w: WeightFamily, x):
    return w.psi(x)
