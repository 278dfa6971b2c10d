"""Maronna M-estimator of scatter and the weighted empirical equivalents.

The estimator is the fixed point of

    Z = (1/n) sum_i u((1/N) y_i^* Z^{-1} y_i) y_i y_i^*

reached by plain Picard iteration from ``Z = I``.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .datagen import ObservationSet
from .errors import ConvergenceError, NumericalError, ValidationError
from .weights import WeightFamily

__all__ = [
    "ScatterResult",
    "solve_maronna",
    "maronna_rhs",
    "quadratic_forms",
    "extract_q",
    "assemble_weighted",
    "assemble_S_hat",
    "assemble_S_corollary",
    "spectral_norm",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 500
MAX_CONDITION = 1e14


@dataclass(frozen=True, eq=False)
class ScatterResult:
    C_hat: np.ndarray
    q: np.ndarray
    iterations: int
    residual: float
    history: tuple = field(default=(), repr=False)

    def history_csv(self) -> str:
        """Residual trace as CSV rows ``iter,residual``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iter", "residual"])
        for t, r in enumerate(self.history):
            writer.writerow([t, repr(float(r))])
        return buf.getvalue()


def _data(obs):
    if isinstance(obs, ObservationSet):
        return obs.Y
    Y = np.atleast_2d(np.asarray(obs, dtype=complex))
    return Y


def _hermitize(M):
    return 0.5 * (M + M.conj().T)


def quadratic_forms(Y, Z):
    """``(1/N) y_i^* Z^{-1} y_i`` for every column, from one Cholesky factorisation."""
    N = Y.shape[0]
    try:
        L = np.linalg.cholesky(Z)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("scatter iterate is not positive definite") from exc
    d = np.abs(np.diagonal(L))
    # (max/min of diag L)^2 is a lower bound on cond(Z)
    if d.min() == 0.0 or (d.max() / d.min()) ** 2 > MAX_CONDITION:
        raise NumericalError("scatter iterate is numerically singular")
    X = scipy.linalg.solve_triangular(L, Y, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", X.conj(), X).real / N


def assemble_weighted(Y, weights):
    """``(1/n) sum_i weights[i] y_i y_i^*``."""
    n = Y.shape[1]
    return _hermitize((Y * weights) @ Y.conj().T / n)


def maronna_rhs(obs, w: WeightFamily, Z):
    """Right-hand side of the fixed-point equation evaluated at ``Z``."""
    Y = _data(obs)
    return assemble_weighted(Y, w.u(quadratic_forms(Y, Z)))


def spectral_norm(M) -> float:
    """Largest absolute eigenvalue of a Hermitian matrix."""
    M = np.asarray(M)
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-8 * scale:
        raise ValidationError("spectral_norm expects a Hermitian matrix")
    lam = np.linalg.eigvalsh(_hermitize(M))
    return float(max(abs(lam[0]), abs(lam[-1])))


def _change_lower_bound(Z, Z_next):
    """Cheap lower bound on ``||Z_next - Z|| / ||Z||`` (spectral norms).

    Uses ``||D||_2 >= ||D||_F / sqrt(N)`` and ``||Z||_2 <= ||Z||_F``, so
    eigenvalue computations only happen once the iterates are close.
    """
    N = Z.shape[0]
    return np.linalg.norm(Z_next - Z) / np.sqrt(N) / np.linalg.norm(Z)


def solve_maronna(obs, w: WeightFamily, tol: float = DEFAULT_TOL,
                  max_iter: int = DEFAULT_MAX_ITER, init=None) -> ScatterResult:
    """Solve the Maronna fixed-point equation.

    Parameters
    ----------
    obs : ObservationSet or array of shape (N, n)
        Observations as columns.
    w : WeightFamily
        Weight function; its ``c`` should equal ``N/n``.
    tol : float
        Bound on the relative spectral-norm defect ``||Z - RHS(Z)|| / ||Z||``.
    max_iter : int
        Maximum number of right-hand-side evaluations.
    init : array, optional
        Positive definite starting point, identity by default.

    Returns
    -------
    ScatterResult
        The returned ``C_hat`` is the last iterate whose defect was certified
        to be at most ``tol``.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive")
    Y = _data(obs)
    N, n = Y.shape
    if abs(w.c - N / n) > 1e-12:
        log.warning("weight family has c=%.6g but data has N/n=%.6g", w.c, N / n)
    Z = np.eye(N, dtype=complex) if init is None else _hermitize(np.asarray(init, dtype=complex))
    history = []
    resid = np.inf
    for t in range(max_iter):
        Z_next = maronna_rhs(Y, w, Z)
        lower = _change_lower_bound(Z, Z_next)
        if lower <= tol:
            resid = spectral_norm(Z_next - Z) / spectral_norm(Z)
        else:
            resid = lower
        history.append(resid)
        if resid <= tol:
            d = quadratic_forms(Y, Z)
            log.debug("maronna converged in %d iterations, residual %.3e", t, resid)
            return ScatterResult(C_hat=Z, q=w.g(d), iterations=t, residual=float(resid),
                                 history=tuple(history))
        Z = Z_next
    raise ConvergenceError(
        f"Maronna iteration did not reach tol={tol:g} in {max_iter} iterations",
        residual=resid, iterations=max_iter)


def extract_q(obs, result: ScatterResult, w: WeightFamily | None = None, method: str = "identity"):
    """Leave-one-out quadratic forms ``q_i = (1/N) y_i^* C_(i)^{-1} y_i``.

    ``method="identity"`` uses ``q_i = g((1/N) y_i^* C^{-1} y_i)``;
    ``method="direct"`` forms every leave-one-out matrix
    ``C_(i) = C - (1/n) u(d_i) y_i y_i^*`` explicitly (``O(n N^3)``, for checks).
    """
    Y = _data(obs)
    N, n = Y.shape
    if method == "identity":
        if w is None:
            return result.q.copy()
        return np.asarray(w.g(quadratic_forms(Y, result.C_hat)))
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    if w is None:
        raise ValueError("direct extraction needs the weight family")
    C = result.C_hat
    d = quadratic_forms(Y, C)
    ud = np.atleast_1d(w.u(d))
    q = np.empty(n)
    for i in range(n):
        y = Y[:, i]
        C_i = C - ud[i] / n * np.outer(y, y.conj())
        q[i] = np.real(y.conj() @ np.linalg.solve(C_i, y)) / N
    return q


def assemble_S_hat(obs, w: WeightFamily, delta):
    """``(1/n) sum_i v(delta_i) y_i y_i^*``."""
    delta = np.asarray(delta, dtype=float)
    if np.any(delta <= 0):
        raise ValidationError("delta must be strictly positive")
    return assemble_weighted(_data(obs), np.asarray(w.v(delta)))


def assemble_S_corollary(obs: ObservationSet, w: WeightFamily, chi: float, gamma: float):
    """``(1/n) sum_i v(chi + tau_i gamma) y_i y_i^*``."""
    if not (chi > 0 and gamma > 0):
        raise ValidationError("chi and gamma must be positive")
    return assemble_S_hat(obs, w, chi + obs.tau * gamma)
