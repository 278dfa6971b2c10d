"""Deterministic equivalents of the Maronna estimator.

Every matrix that appears in these fixed points is a combination of ``B`` and
the identity, so all of them are diagonal in the eigenbasis of ``B``. The
n-dimensional solvers diagonalise ``B`` once and then iterate on eigenvalues
only. :func:`solve_chi_gamma_hat` deliberately works with dense matrix
inverses instead, so that it can serve as an independent cross-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, ValidationError
from .measures import DiscreteMeasure, empirical, integrate
from .weights import WeightFamily

__all__ = [
    "EquivalentResult",
    "delta_map",
    "solve_delta_system",
    "solve_chi_gamma_hat",
    "solve_chi_gamma_infinity",
    "eta_function",
    "solve_eta",
    "solve_e_weighted",
    "solve_e_system",
    "degenerate_delta",
]

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class EquivalentResult:
    delta: np.ndarray
    chi_hat: float
    gamma_hat: float
    T: np.ndarray
    iterations: int
    residual: float


def _eig_psd(B):
    B = np.asarray(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError("B must be square")
    if np.max(np.abs(B - B.conj().T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(B))):
        raise ValidationError("B must be Hermitian")
    lam, U = np.linalg.eigh(B)
    return np.clip(lam, 0.0, None), U


def _check_tau(tau):
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0) or not np.all(np.isfinite(tau)):
        raise ValidationError("scales tau must be finite and non-negative")
    return tau


def _delta_step(lam, tau, w, x):
    """One application of the delta map in the eigenbasis; returns (chi, gamma, m)."""
    wt = np.asarray(w.delta_weight(x))
    # eigenvalues of (1/n) sum_j wt_j (B + tau_j I)
    m = wt.mean() * lam + (wt * tau).mean()
    return np.mean(lam / m), np.mean(1.0 / m), m


def delta_map(B, tau, w: WeightFamily, x):
    """``h_j(x) = (1/N) tr (B + tau_j I) ((1/n) sum_i v(x_i)(B + tau_i I)/(1 + c psi(x_i)))^{-1}``."""
    lam, _ = _eig_psd(B)
    tau = _check_tau(tau)
    x = np.asarray(x, dtype=float)
    if x.shape != tau.shape:
        raise ValidationError("x and tau must have the same length")
    chi, gamma, _ = _delta_step(lam, tau, w, x)
    return chi + tau * gamma


def solve_delta_system(B, tau, w: WeightFamily, tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER, init=None) -> EquivalentResult:
    """Solve the n-dimensional delta system by Picard iteration.

    The returned ``delta`` satisfies ``max_j |delta_j - h_j(delta)| / delta_j <= tol``.
    ``T`` is the resolvent evaluated at ``delta``, and ``chi_hat = tr(B T)/N``,
    ``gamma_hat = tr(T)/N``.
    """
    lam, U = _eig_psd(B)
    tau = _check_tau(tau)
    if np.all(lam == 0) and np.all(tau == 0):
        raise ValidationError("B = 0 together with tau = 0 has no positive solution")
    x = np.ones_like(tau) if init is None else np.asarray(init, dtype=float).copy()
    resid = np.inf
    for t in range(max_iter):
        chi, gamma, m = _delta_step(lam, tau, w, x)
        x_next = chi + tau * gamma
        with np.errstate(divide="ignore", invalid="ignore"):
            resid = float(np.max(np.abs(x_next - x) / x))
        if resid <= tol:
            T = (U / m) @ U.conj().T
            log.debug("delta system converged in %d iterations", t)
            return EquivalentResult(delta=x, chi_hat=float(chi), gamma_hat=float(gamma),
                                    T=0.5 * (T + T.conj().T), iterations=t, residual=resid)
        x = x_next
    raise ConvergenceError(f"delta system did not converge in {max_iter} iterations",
                           residual=resid, iterations=max_iter)


def solve_chi_gamma_hat(B, tau_measure, w: WeightFamily, tol: float = DEFAULT_TOL,
                        max_iter: int = DEFAULT_MAX_ITER):
    """Two-variable reduction of the delta system, with dense matrix inverses.

    ``tau_measure`` is the empirical scale measure (a list of scales is
    converted). Returns ``(chi_hat, gamma_hat)``.
    """
    if not isinstance(tau_measure, DiscreteMeasure):
        tau_measure = empirical(_check_tau(tau_measure))
    B = np.asarray(B, dtype=complex)
    N = B.shape[0]
    I = np.eye(N)
    t, p = tau_measure.atoms, tau_measure.weights
    x1, x2 = 1.0, 1.0
    resid = np.inf
    for it in range(max_iter):
        wt = np.asarray(w.delta_weight(x1 + t * x2))
        M = (p * wt).sum() * B + (p * wt * t).sum() * I
        Minv = np.linalg.inv(M)
        y1 = float(np.real(np.trace(B @ Minv))) / N
        y2 = float(np.real(np.trace(Minv))) / N
        resid = max(abs(y1 - x1) / max(y1, np.finfo(float).tiny), abs(y2 - x2) / y2)
        if resid <= tol:
            return x1, x2
        x1, x2 = y1, y2
    raise ConvergenceError(f"(chi, gamma) reduction did not converge in {max_iter} iterations",
                           residual=resid, iterations=max_iter)


def _chi_gamma_map(FB, nu, w, x1, x2):
    y, py = FB.atoms, FB.weights
    t, pt = nu.atoms, nu.weights
    wt = np.asarray(w.delta_weight(x1 + t * x2))
    inner = (pt * wt) @ (y[None, :] + t[:, None])  # one value per atom of FB
    return float(py @ (y / inner)), float(py @ (1.0 / inner))


def solve_chi_gamma_infinity(FB: DiscreteMeasure, nu: DiscreteMeasure, w: WeightFamily,
                             tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Limit pair ``(chi, gamma)`` defined through the measures ``F^B`` and ``nu``.

    The map ``(x1, x2) -> (h1, h2)`` is a standard interference function, so
    Picard iteration converges from any positive start.
    """
    if FB.mean <= 0 and nu.atoms.max() == 0:
        raise ValidationError("degenerate measures: no positive solution")
    x1, x2 = 1.0, 1.0
    resid = np.inf
    for it in range(max_iter):
        y1, y2 = _chi_gamma_map(FB, nu, w, x1, x2)
        resid = max(abs(y1 - x1) / max(y1, np.finfo(float).tiny), abs(y2 - x2) / y2)
        if resid <= tol:
            return x1, x2
        x1, x2 = y1, y2
    raise ConvergenceError(f"(chi, gamma) limit system did not converge in {max_iter} iterations",
                           residual=resid, iterations=max_iter)


def chi_gamma_residual(FB, nu, w, x1, x2):
    """Residual vector ``h(x) - x`` of the limit system."""
    y1, y2 = _chi_gamma_map(FB, nu, w, x1, x2)
    return y1 - x1, y2 - x2


def eta_function(FB: DiscreteMeasure, nu: DiscreteMeasure, f, x):
    """``int F^B(dy) / int (y + t)/(t + x) f(t) nu(dt)``; increasing in ``x``."""
    y, py = FB.atoms, FB.weights
    t, pt = nu.atoms, nu.weights
    ft = np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)
    x = np.asarray(x, dtype=float)
    # shape (..., len(t), len(y))
    ratio = (y[None, :] + t[:, None]) / (t[:, None] + x[..., None, None])
    inner = np.einsum("t,...ty->...y", pt * ft, ratio)
    return np.einsum("y,...y->...", py, 1.0 / inner)


def _check_f(nu, f):
    ft = np.broadcast_to(np.asarray(f(nu.atoms), dtype=float), nu.atoms.shape)
    if np.any(ft <= 0) or not np.all(np.isfinite(ft)):
        raise ValidationError("f must be positive and finite on the atoms of nu")
    total = integrate(nu, f)
    if abs(total - 1.0) > 1e-8:
        raise ValidationError(f"f must integrate to 1 against nu, got {total:.10g}")


def solve_eta(FB: DiscreteMeasure, nu: DiscreteMeasure, f, tol: float = DEFAULT_TOL) -> float:
    """Unique positive root of ``eta_function(FB, nu, f, x) = 1``.

    The root lies in ``(0, tr(B)/N]``; the search bracket is
    ``[1e-14 mean(FB), max atom of FB]``.
    """
    _check_f(nu, f)
    mean = FB.mean
    if mean <= 0:
        raise ValidationError("F^B must have positive mean")
    lo, hi = 1e-14 * mean, float(FB.atoms.max())
    h = lambda x: float(eta_function(FB, nu, f, x)) - 1.0
    h_lo, h_hi = h(lo), h(hi)
    if h_hi == 0.0:
        return hi
    if h_lo >= 0 or h_hi < 0:
        raise ConvergenceError(
            f"eta bracket [{lo:.3g}, {hi:.3g}] does not contain a root "
            f"(h-1 = {h_lo:.3g}, {h_hi:.3g})")
    eta = brentq(h, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(h(eta)) > tol:
        raise ConvergenceError("eta root does not meet tolerance", residual=abs(h(eta)))
    return float(eta)


def solve_e_weighted(B, tau, a, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Solve ``e_k = (a_k/n) tr (B + tau_k I) ((1/n) sum_i a_i (B + tau_i I)/(1 + e_i))^{-1}``."""
    lam, _ = _eig_psd(B)
    tau = _check_tau(tau)
    a = np.broadcast_to(np.asarray(a, dtype=float), tau.shape)
    if np.any(a <= 0):
        raise ValidationError("weights a must be positive")
    N, n = lam.size, tau.size
    e = np.zeros(n)
    resid = np.inf
    for it in range(max_iter):
        r = a / (1.0 + e)
        m = r.mean() * lam + (r * tau).mean()
        e_next = a * (N / n) * (np.mean(lam / m) + tau * np.mean(1.0 / m))
        resid = float(np.max(np.abs(e_next - e) / e_next))
        if resid <= tol:
            return e
        e = e_next
    raise ConvergenceError(f"e system did not converge in {max_iter} iterations",
                           residual=resid, iterations=max_iter)


def solve_e_system(B, tau, f, eta: float, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER):
    """Quadratic-form equivalents ``e_1..e_n`` for weight ``f`` and root ``eta``."""
    if not eta > 0:
        raise ValidationError("eta must be positive")
    tau = _check_tau(tau)
    ft = np.broadcast_to(np.asarray(f(tau), dtype=float), tau.shape)
    return solve_e_weighted(B, tau, ft / (tau + eta), tol=tol, max_iter=max_iter)


def degenerate_delta(w: WeightFamily) -> float:
    """Common value of every ``delta_i`` when ``B = bI`` and all scales are equal.

    The system collapses to ``psi(delta) = 1/(1 - c)``, i.e.
    ``delta = g(phi^{-1}(1))``.
    """
    return float(w.g(w.phi_inv(1.0)))
