"""Monte Carlo comparison of the Maronna estimator with its deterministic equivalent.

Every trial ``(N, t)`` draws its own mixing matrix and observations from a
seed derived from ``(cfg.seed, N, t)``, so runs can be split, reordered or
parallelised without changing any number.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _seeding
from .datagen import generate_mixing, generate_observations
from .equivalents import degenerate_delta, solve_delta_system
from .errors import ConfigError, RobScatterError
from .estimator import assemble_S_hat, solve_maronna, spectral_norm
from .measures import DiscreteMeasure, point_mass
from .weights import WeightFamily

__all__ = [
    "ExperimentConfig",
    "TrialResult",
    "MsePoint",
    "run_trial",
    "run_trials",
    "aggregate",
    "run_mse_experiment",
    "run_equivalence_diagnostics",
    "diagnostic_rows",
    "TRIAL_COLUMNS",
    "AGGREGATE_COLUMNS",
    "DIAGNOSTIC_COLUMNS",
]

log = logging.getLogger(__name__)

MAX_FAIL_FRACTION = 0.05

TRIAL_COLUMNS = ["N", "trial", "mse_spectral", "mse_frobenius", "q_delta_gap", "iters", "converged"]
AGGREGATE_COLUMNS = ["N", "mse_mean", "mse_stderr", "trials_ok"]
DIAGNOSTIC_COLUMNS = ["N", "trial", "spectral_gap", "q_delta_gap", "iters", "delta_ref"]


@dataclass(frozen=True)
class ExperimentConfig:
    N_grid: tuple = (20, 40, 80, 160)
    ratio_n: float = 3.0
    ratio_K: float = 0.5
    alpha: float = 0.5
    nu: DiscreteMeasure = field(default_factory=lambda: point_mass(1.0))
    trials: int = 100
    seed: int = 0
    tol: float = 1e-9
    max_iter: int = 500
    delta_tol: float = 1e-10
    delta_max_iter: int = 10_000
    workers: int | None = 1
    trial_offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "N_grid", tuple(int(N) for N in self.N_grid))
        if not self.ratio_n > 1:
            raise ConfigError("ratio_n must exceed 1 so that c = N/n < 1")
        if not 0 < self.ratio_K <= 1:
            raise ConfigError("ratio_K must lie in (0, 1]")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if any(N < 1 for N in self.N_grid):
            raise ConfigError("every N must be positive")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if not self.tol > 0 or not self.delta_tol > 0:
            raise ConfigError("tolerances must be positive")
        # the shifted-inverse family has phi_inf = 1 + alpha
        if (1.0 + self.alpha) / self.ratio_n >= 1.0:
            raise ConfigError("c * (1 + alpha) must be < 1")
        if abs(self.nu.mean - 1.0) > 1e-6:
            raise ConfigError("the scale measure nu must have unit mean")

    def dims(self, N):
        n = int(round(self.ratio_n * N))
        K = max(1, int(round(self.ratio_K * N)))
        return N, n, K

    def weight(self, N) -> WeightFamily:
        _, n, _ = self.dims(N)
        return WeightFamily(alpha=self.alpha, c=N / n)

    def to_dict(self):
        d = asdict(self)
        d["N_grid"] = list(self.N_grid)
        d["nu"] = self.nu.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "nu" in d and not isinstance(d["nu"], DiscreteMeasure):
            d["nu"] = DiscreteMeasure.from_dict(d["nu"])
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigError(f"unknown experiment fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class TrialResult:
    N: int
    trial: int
    converged: bool
    mse_spectral: float = math.nan
    mse_frobenius: float = math.nan
    q_delta_gap: float = math.nan
    iters: int = 0
    error: str = ""

    @property
    def spectral_gap(self):
        return math.sqrt(self.mse_spectral)


@dataclass(frozen=True)
class MsePoint:
    N: int
    mse: float
    stderr: float
    mean_iters: float
    trials_ok: int
    trials: int

    @property
    def ok(self) -> bool:
        return self.trials - self.trials_ok <= MAX_FAIL_FRACTION * self.trials


def run_trial(cfg: ExperimentConfig, N: int, trial: int) -> TrialResult:
    """Run one trial: generate data, solve both fixed points, compare."""
    N, n, K = cfg.dims(N)
    w = cfg.weight(N)
    seed = _seeding.derive_seed(cfg.seed, _seeding.STREAM_TRIAL, N, trial)
    try:
        A = generate_mixing(N, K, _seeding.derive_seed(seed, _seeding.STREAM_MIXING))
        obs = generate_observations(A, cfg.nu, n, _seeding.derive_seed(seed, _seeding.STREAM_NOISE))
        est = solve_maronna(obs, w, tol=cfg.tol, max_iter=cfg.max_iter)
        eq = solve_delta_system(obs.B, obs.tau, w, tol=cfg.delta_tol, max_iter=cfg.delta_max_iter)
    except RobScatterError as exc:
        log.warning("trial N=%d t=%d failed: %s", N, trial, exc)
        return TrialResult(N=N, trial=trial, converged=False, error=str(exc))
    S = assemble_S_hat(obs, w, eq.delta)
    D = S - est.C_hat
    gap = spectral_norm(D)
    return TrialResult(
        N=N,
        trial=trial,
        converged=True,
        mse_spectral=gap**2,
        mse_frobenius=float(np.linalg.norm(D) ** 2),
        q_delta_gap=float(np.max(np.abs(est.q - eq.delta) / eq.delta)),
        iters=est.iterations,
    )


def _run_one(args):
    return run_trial(*args)


def run_trials(cfg: ExperimentConfig) -> list[TrialResult]:
    """All trials of the experiment, sorted by ``(N, trial)``."""
    jobs = [(cfg, N, t) for N in cfg.N_grid
            for t in range(cfg.trial_offset, cfg.trial_offset + cfg.trials)]
    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    if workers <= 1 or len(jobs) <= 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return sorted(results, key=lambda r: (r.N, r.trial))


def aggregate(results: list[TrialResult]) -> list[MsePoint]:
    """Average per ``N``; ``math.fsum`` keeps the result independent of trial order."""
    points = []
    for N in sorted({r.N for r in results}):
        rows = [r for r in results if r.N == N]
        ok = [r for r in rows if r.converged]
        k = len(ok)
        if k:
            mean = math.fsum(r.mse_spectral for r in ok) / k
            var = math.fsum((r.mse_spectral - mean) ** 2 for r in ok) / (k - 1) if k > 1 else 0.0
            stderr = math.sqrt(var / k)
            iters = math.fsum(r.iters for r in ok) / k
        else:
            mean = stderr = iters = math.nan
        points.append(MsePoint(N=N, mse=mean, stderr=stderr, mean_iters=iters,
                               trials_ok=k, trials=len(rows)))
    return points


def run_mse_experiment(cfg: ExperimentConfig) -> list[MsePoint]:
    """Estimate ``E ||S_hat - C_hat||^2`` (spectral norm) for each ``N`` in the grid."""
    return aggregate(run_trials(cfg))


def diagnostic_rows(cfg: ExperimentConfig, results: list[TrialResult]) -> list[dict]:
    """Diagnostic rows for the converged trials among ``results``."""
    rows = []
    for r in results:
        if not r.converged:
            continue
        rows.append({
            "N": r.N,
            "trial": r.trial,
            "spectral_gap": r.spectral_gap,
            "q_delta_gap": r.q_delta_gap,
            "iters": r.iters,
            "delta_ref": degenerate_delta(cfg.weight(r.N)),
        })
    return rows


def run_equivalence_diagnostics(cfg: ExperimentConfig) -> list[dict]:
    """Per-trial rows with the spectral gap and the ``max_i |q_i - delta_i| / delta_i`` gap.

    ``delta_ref`` is the common value all ``delta_i`` take in the degenerate
    model ``B = bI`` with constant scales, included as a reference line.
    """
    return diagnostic_rows(cfg, run_trials(cfg))


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "" if not math.isfinite(x) else repr(x)
    return str(x)


def rows_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def trials_csv(results: list[TrialResult]) -> str:
    return rows_to_csv(TRIAL_COLUMNS, [asdict(r) for r in results])


def aggregate_csv(points: list[MsePoint]) -> str:
    rows = [{"N": p.N, "mse_mean": p.mse, "mse_stderr": p.stderr, "trials_ok": p.trials_ok}
            for p in points]
    return rows_to_csv(AGGREGATE_COLUMNS, rows)


def diagnostics_csv(rows: list[dict]) -> str:
    return rows_to_csv(DIAGNOSTIC_COLUMNS, rows)
