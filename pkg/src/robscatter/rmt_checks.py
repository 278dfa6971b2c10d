"""Finite-size statistical checks of the random-matrix lemmas behind the equivalents.

Each check returns a :class:`CheckReport` whose ``passed`` flag is exactly
``statistic <= threshold``. Thresholds that are not analytic come from
:mod:`robscatter.calibration`.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _seeding, calibration
from .datagen import complex_gaussian, generate_mixing
from .equivalents import solve_e_weighted
from .errors import ModelWarning
from .measures import DiscreteMeasure, point_mass

__all__ = [
    "CheckReport",
    "CSV_COLUMNS",
    "reports_csv",
    "wilson_interval",
    "gamma_tail_bound",
    "check_trace_lemma",
    "check_smallest_eigenvalue",
    "check_concentration",
    "check_gaussian_equivalence",
    "check_deterministic_equivalent",
]

CSV_COLUMNS = ["name", "N", "n", "trials", "seed", "statistic", "threshold", "passed"]


@dataclass(frozen=True)
class CheckReport:
    name: str
    N: int
    n: int
    trials: int
    seed: int
    statistic: float
    threshold: float
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def passed(self) -> bool:
        return bool(self.statistic <= self.threshold)

    def row(self) -> dict:
        return {"name": self.name, "N": self.N, "n": self.n, "trials": self.trials,
                "seed": self.seed, "statistic": self.statistic, "threshold": self.threshold,
                "passed": self.passed}


def reports_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        row = r.row()
        row["passed"] = "true" if row["passed"] else "false"
        row["statistic"] = repr(float(row["statistic"]))
        row["threshold"] = repr(float(row["threshold"]))
        writer.writerow([row[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def _composite(rng, N, K, n, normalize=True):
    """Signal part ``S`` (K x n), raw Gaussian ``G`` and noise ``W`` (N x n)."""
    S = complex_gaussian(rng, (K, n))
    G = complex_gaussian(rng, (N, n))
    W = np.sqrt(N) * G / np.linalg.norm(G, axis=0) if normalize else G
    return S, G, W


def check_trace_lemma(N: int, n: int, trials: int, seed: int, kappa: float = 1.0,
                      K: int | None = None, matrix: str = "random",
                      threshold: float | None = None) -> CheckReport:
    """``max_j |(1/N) z_j^* A z_j - (1/N) tr A|`` for ``z_j = [s_j; w_j]``.

    ``A`` has spectral norm ``kappa`` and is drawn independently of the
    ``z_j``: ``"random"`` (rotated Hermitian), ``"identity"`` or ``"zero"``.
    The statistic is the largest deviation over all trials.
    """
    if N < 20:
        warnings.warn("trace-lemma check is calibrated for N >= 20", ModelWarning, stacklevel=2)
    K = N // 2 if K is None else K
    dim = K + N
    rng = _seeding.rng(seed, _seeding.STREAM_CHECK, 1, N, n)
    worst = 0.0
    for _ in range(trials):
        if matrix == "random":
            H = complex_gaussian(rng, (dim, dim))
            H = 0.5 * (H + H.conj().T)
            A = kappa * H / np.max(np.abs(np.linalg.eigvalsh(H)))
        elif matrix == "identity":
            A = kappa * np.eye(dim)
        elif matrix == "zero":
            A = np.zeros((dim, dim))
        else:
            raise ValueError(f"unknown matrix kind {matrix!r}")
        S, _, W = _composite(rng, N, K, n)
        Z = np.vstack([S, W])
        quad = np.einsum("ij,ij->j", Z.conj(), A @ Z).real / N
        dev = np.abs(quad - np.trace(A).real / N)
        worst = max(worst, float(dev.max()))
    if threshold is None:
        threshold = calibration.TRACE_LEMMA_CONSTANT * kappa / math.sqrt(N)
    return CheckReport("trace_lemma", N, n, trials, seed, worst, threshold,
                       extras={"kappa": kappa, "matrix": matrix})


def check_smallest_eigenvalue(N: int, n: int, trials: int, seed: int, eps0: float = 0.05,
                              K: int | None = None, signal: bool = True,
                              scales: DiscreteMeasure | None = None) -> CheckReport:
    """Smallest eigenvalue of the leave-one-out matrices ``Sigma_j``.

    ``Sigma = (1/n) sum_i R_i z_i z_i^* R_i^*`` with ``R_i = [A, sqrt(tau_i) I]``
    (``A = 0`` when ``signal`` is false). The statistic is
    ``1 / min_j lambda_1(Sigma_j)`` over all trials, compared with ``1/eps0``.
    Extras record ``min lambda_1(Sigma)`` and ``max ||Sigma||``.
    """
    if n < 2 * N:
        warnings.warn(f"n={n} < 2N={2 * N}: outside the calibrated regime", ModelWarning,
                      stacklevel=2)
    K = N // 2 if K is None else K
    scales = point_mass(1.0) if scales is None else scales
    rng = _seeding.rng(seed, _seeding.STREAM_CHECK, 2, N, n)
    min_loo = np.inf
    min_full = np.inf
    max_norm = 0.0
    for _ in range(trials):
        tau = rng.choice(scales.atoms, size=n, p=scales.weights)
        S, _, W = _composite(rng, N, K, n)
        Y = np.sqrt(tau) * W
        if signal:
            A = generate_mixing(N, K, int(rng.integers(2**62)))
            Y = Y + A @ S
        Sigma = Y @ Y.conj().T / n
        lam = np.linalg.eigvalsh(Sigma)
        min_full = min(min_full, lam[0])
        max_norm = max(max_norm, lam[-1])
        for j in range(n):
            y = Y[:, j]
            Sj = Sigma - np.outer(y, y.conj()) / n
            lj = scipy.linalg.eigh(Sj, eigvals_only=True, subset_by_index=[0, 0])[0]
            min_loo = min(min_loo, lj)
    stat = 1.0 / min_loo if min_loo > 0 else math.inf
    return CheckReport("smallest_eigenvalue", N, n, trials, seed, stat, 1.0 / eps0,
                       extras={"min_lambda_loo": float(min_loo), "min_lambda_full": float(min_full),
                               "max_norm": float(max_norm), "K_max": calibration.K_MAX})


def wilson_interval(k: int, m: int, z: float):
    """Wilson score interval for ``k`` successes out of ``m``."""
    p = k / m
    denom = 1.0 + z * z / m
    centre = (p + z * z / (2 * m)) / denom
    half = z * math.sqrt(p * (1 - p) / m + z * z / (4 * m * m)) / denom
    # the limits are exactly 0 and 1 at the ends; avoid rounding just inside
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == m else min(1.0, centre + half)
    return lo, hi


def gamma_tail_bound(alphas, t, C=math.exp(0.5)):
    """``C exp(-min(t^2 / (4 sum a^2), t / (4 max a)))``."""
    alphas = np.asarray(alphas, dtype=float)
    expo = min(t * t / (4.0 * np.sum(alphas**2)), t / (4.0 * alphas.max()))
    return C * math.exp(-expo)


def check_concentration(alphas, t_grid, trials: int, seed: int, C: float = math.exp(0.5),
                        z: float = 3.0, chunk: int = 10_000) -> CheckReport:
    """Monte Carlo test of the tail bound for ``sum_i alpha_i gamma_i``, ``gamma_i ~ Exp(1)``.

    At each ``t`` the lower Wilson limit (``z`` standard errors) of the
    empirical tail is compared with :func:`gamma_tail_bound`. The statistic is
    the largest excess ``lower - bound``; the check passes when it is ``<= 0``.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0 or np.any(alphas <= 0):
        raise ValueError("alphas must be a non-empty list of positive numbers")
    t_grid = np.asarray(t_grid, dtype=float)
    rng = _seeding.rng(seed, _seeding.STREAM_CHECK, 3, alphas.size)
    exceed = np.zeros(t_grid.size, dtype=np.int64)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        sums = rng.standard_exponential((m, alphas.size)) @ alphas
        exceed += (sums[:, None] > t_grid[None, :]).sum(axis=0)
        done += m
    excess = []
    detail = []
    for k, t in zip(exceed, t_grid):
        lo, _ = wilson_interval(int(k), trials, z)
        bound = gamma_tail_bound(alphas, t, C)
        excess.append(lo - bound)
        detail.append({"t": float(t), "tail": int(k) / trials, "wilson_lower": lo, "bound": bound})
    return CheckReport("concentration", alphas.size, alphas.size, trials, seed,
                       float(max(excess)), 0.0, extras={"grid": detail})


def check_gaussian_equivalence(N: int, n: int, trials: int, seed: int, K: int | None = None,
                               normalize: bool = True, threshold: float | None = None,
                               scales: DiscreteMeasure | None = None) -> CheckReport:
    """``||Sigma - Sigma_tilde||`` between sphere-normalised and raw Gaussian noise.

    Both matrices use the same draws; only the noise normalisation differs.
    The statistic is the median over trials. Extras hold, per trial, the
    observed gap and the bound
    ``2 e sqrt(||Sigma_tilde|| ||X||) + e^2 ||X||`` with
    ``e = max_i |sqrt(N)/||g_i|| - 1|`` and ``X`` the raw noise covariance.
    """
    K = N // 2 if K is None else K
    scales = point_mass(1.0) if scales is None else scales
    rng = _seeding.rng(seed, _seeding.STREAM_CHECK, 4, N, n)
    gaps, bounds = [], []
    for _ in range(trials):
        tau = rng.choice(scales.atoms, size=n, p=scales.weights)
        S, G, W = _composite(rng, N, K, n, normalize=normalize)
        A = generate_mixing(N, K, int(rng.integers(2**62)))
        signal = A @ S
        Y = signal + np.sqrt(tau) * W
        Yt = signal + np.sqrt(tau) * G
        Sigma = Y @ Y.conj().T / n
        Sigma_t = Yt @ Yt.conj().T / n
        X = (np.sqrt(tau) * G) @ (np.sqrt(tau) * G).conj().T / n
        gap = np.linalg.norm(Sigma - Sigma_t, 2)
        if normalize:
            e = float(np.max(np.abs(np.sqrt(N) / np.linalg.norm(G, axis=0) - 1.0)))
        else:
            e = 0.0
        nt = np.linalg.norm(Sigma_t, 2)
        nx = np.linalg.norm(X, 2)
        gaps.append(float(gap))
        bounds.append(2 * e * math.sqrt(nt * nx) + e * e * nx)
    if threshold is None:
        threshold = calibration.GAUSSIAN_EQUIVALENCE_CONSTANT / math.sqrt(N)
    return CheckReport("gaussian_equivalence", N, n, trials, seed, float(np.median(gaps)),
                       threshold, extras={"gaps": gaps, "bounds": bounds})


def check_deterministic_equivalent(N: int, n: int, trials: int, seed: int, K: int | None = None,
                                   scales: DiscreteMeasure | None = None,
                                   threshold: float | None = None) -> CheckReport:
    """Leave-one-out resolvent traces against their deterministic equivalent.

    Compares ``(1/n) tr Sigma_j^{-1}`` with
    ``(1/n) tr ((1/n) sum_i (B + tau_i I)/(1 + e_i))^{-1}``, where ``e`` solves
    ``e_k = (1/n) tr (B + tau_k I)((1/n) sum_i (B + tau_i I)/(1 + e_i))^{-1}``.
    The statistic is the worst ``max_j`` deviation over trials.
    """
    K = N // 2 if K is None else K
    scales = point_mass(1.0) if scales is None else scales
    rng = _seeding.rng(seed, _seeding.STREAM_CHECK, 5, N, n)
    worst = 0.0
    for _ in range(trials):
        tau = rng.choice(scales.atoms, size=n, p=scales.weights)
        S, _, W = _composite(rng, N, K, n)
        A = generate_mixing(N, K, int(rng.integers(2**62)))
        B = A @ A.conj().T
        Y = A @ S + np.sqrt(tau) * W
        Sigma = Y @ Y.conj().T / n
        Sinv = np.linalg.inv(Sigma)
        # Sherman-Morrison: tr Sigma_j^{-1} = tr Sigma^{-1} + (y^* Sigma^{-2} y / n) / (1 - y^* Sigma^{-1} y / n)
        X = Sinv @ Y
        a = np.einsum("ij,ij->j", Y.conj(), X).real / n
        b = np.einsum("ij,ij->j", X.conj(), X).real / n
        loo = (np.trace(Sinv).real + b / (1.0 - a)) / n
        e = solve_e_weighted(B, tau, 1.0)
        lam, _ = np.linalg.eigh(B)
        r = 1.0 / (1.0 + e)
        m = r.mean() * lam + (r * tau).mean()
        det = np.sum(1.0 / m) / n
        worst = max(worst, float(np.max(np.abs(loo - det))))
    if threshold is None:
        threshold = calibration.DETERMINISTIC_EQUIVALENT_CONSTANT / math.sqrt(N)
    return CheckReport("deterministic_equivalent", N, n, trials, seed, worst, threshold)
