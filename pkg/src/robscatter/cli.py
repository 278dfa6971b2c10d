"""Command-line front end.

    robscatter estimate    --config run.json --out-dir out/
    robscatter equivalents --config run.json --out-dir out/
    robscatter mse         --config run.json --out-dir out/
    robscatter diagnostics --config run.json --out-dir out/
    robscatter checks      --config run.json --out-dir out/
    robscatter --print-default-config

Exit codes: 0 on success, 2 when the config is missing or invalid (nothing is
written), 3 when solvers fail beyond the failed-trial policy.
"""

from __future__ import annotations

import argparse
import copy
import datetime
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__, _seeding, harness, rmt_checks
from .datagen import ObservationSet, _to_pairs, generate_mixing, generate_observations
from .equivalents import solve_delta_system
from .errors import ConfigError, ConvergenceError, RobScatterError
from .estimator import solve_maronna
from .harness import ExperimentConfig
from .measures import DiscreteMeasure
from .weights import WeightFamily

log = logging.getLogger("robscatter")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

SUBCOMMANDS = ("estimate", "equivalents", "mse", "diagnostics", "checks")

DEFAULT_CONFIG = {
    "seed": 0,
    "model": {
        "N": 20,
        "ratio_n": 3.0,
        "ratio_K": 0.5,
        "nu": {"atoms": [1.0], "weights": [1.0]},
        "observations": None,
    },
    "weight": {"kind": "shifted_inverse", "alpha": 0.5},
    "solver": {"tol": 1e-9, "max_iter": 500, "delta_tol": 1e-10, "delta_max_iter": 10_000},
    "experiment": {
        "N_grid": [20, 40, 80, 160],
        "trials": 100,
        "trial_offset": 0,
        "workers": None,
        "check_N": 100,
        "check_trials": 5,
        "concentration_size": 100,
        "concentration_trials": 100_000,
        "concentration_t": [1.5, 2.0, 3.0, 5.0],
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated view of a config document."""

    raw: dict
    experiment: ExperimentConfig
    weight_alpha: float
    weight_kind: str
    observations: ObservationSet | None


def _merge(defaults, user, path=""):
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(defaults[key], dict) and isinstance(value, dict):
            out[key] = _merge(defaults[key], value, path + key + ".")
        else:
            out[key] = value
    return out


def resolve_config(user: dict, seed_override: int | None = None) -> RunConfig:
    """Fill defaults, apply the seed override and run every validator."""
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")
    raw = _merge(DEFAULT_CONFIG, user)
    if seed_override is not None:
        raw["seed"] = seed_override
    if raw["experiment"]["workers"] is None:
        raw["experiment"]["workers"] = os.cpu_count() or 1
    model, weight, solver, exp = raw["model"], raw["weight"], raw["solver"], raw["experiment"]
    try:
        cfg = ExperimentConfig(
            N_grid=tuple(exp["N_grid"]),
            ratio_n=float(model["ratio_n"]),
            ratio_K=float(model["ratio_K"]),
            alpha=float(weight["alpha"]),
            nu=DiscreteMeasure.from_dict(model["nu"]),
            trials=int(exp["trials"]),
            seed=int(raw["seed"]),
            tol=float(solver["tol"]),
            max_iter=int(solver["max_iter"]),
            delta_tol=float(solver["delta_tol"]),
            delta_max_iter=int(solver["delta_max_iter"]),
            workers=int(exp["workers"]),
            trial_offset=int(exp["trial_offset"]),
        )
        # the weight family may differ from the default; validate it against the model's c
        WeightFamily(alpha=cfg.alpha, c=1.0 / cfg.ratio_n, kind=weight["kind"])
        obs = None
        if model["observations"] is not None:
            obs = ObservationSet.from_dict(model["observations"])
            WeightFamily(alpha=cfg.alpha, c=obs.c, kind=weight["kind"])
        elif int(model["N"]) < 1:
            raise ConfigError("model.N must be positive")
        if int(exp["check_N"]) < 20 or int(exp["check_trials"]) < 1:
            raise ConfigError("check_N must be >= 20 and check_trials >= 1")
        if int(exp["concentration_size"]) < 1 or int(exp["concentration_trials"]) < 1:
            raise ConfigError("concentration settings must be positive")
    except RobScatterError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return RunConfig(raw=raw, experiment=cfg, weight_alpha=cfg.alpha,
                     weight_kind=weight["kind"], observations=obs)


def load_config(path: str, seed_override: int | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return resolve_config(user, seed_override)


# output

def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _stamp() -> str:
    now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"# robscatter {__version__} generated {now}\n"


def write_csv(out_dir: str, name: str, body: str) -> str:
    path = os.path.join(out_dir, name)
    write_atomic(path, _stamp() + body)
    log.info("wrote %s", path)
    return path


def write_json(out_dir: str, name: str, obj) -> str:
    path = os.path.join(out_dir, name)
    write_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", path)
    return path


# subcommands

def _observations(run: RunConfig) -> ObservationSet:
    if run.observations is not None:
        return run.observations
    cfg = run.experiment
    N, n, K = cfg.dims(int(run.raw["model"]["N"]))
    seed = cfg.seed
    A = generate_mixing(N, K, _seeding.derive_seed(seed, _seeding.STREAM_MIXING))
    return generate_observations(A, cfg.nu, n, _seeding.derive_seed(seed, _seeding.STREAM_NOISE))


def _weight(run: RunConfig, obs: ObservationSet) -> WeightFamily:
    return WeightFamily(alpha=run.weight_alpha, c=obs.c, kind=run.weight_kind)


def cmd_estimate(run: RunConfig, out_dir: str) -> int:
    obs = _observations(run)
    w = _weight(run, obs)
    cfg = run.experiment
    res = solve_maronna(obs, w, tol=cfg.tol, max_iter=cfg.max_iter)
    write_json(out_dir, "scatter.json", {
        "C_hat": _to_pairs(res.C_hat),
        "q": res.q.tolist(),
        "iterations": res.iterations,
        "residual": res.residual,
    })
    write_csv(out_dir, "residuals.csv", res.history_csv())
    with np.printoptions(precision=12, suppress=True):
        print("C_hat =")
        print(res.C_hat if np.any(res.C_hat.imag) else res.C_hat.real)
        print("q =", np.asarray(res.q))
    print(f"iterations = {res.iterations}, residual = {res.residual:.3e}")
    return EXIT_OK


def cmd_equivalents(run: RunConfig, out_dir: str) -> int:
    obs = _observations(run)
    w = _weight(run, obs)
    cfg = run.experiment
    eq = solve_delta_system(obs.B, obs.tau, w, tol=cfg.delta_tol, max_iter=cfg.delta_max_iter)
    write_json(out_dir, "equivalents.json", {
        "delta": eq.delta.tolist(),
        "chi_hat": eq.chi_hat,
        "gamma_hat": eq.gamma_hat,
        "iterations": eq.iterations,
        "residual": eq.residual,
    })
    rows = [{"i": i, "tau": float(t), "delta": float(d)}
            for i, (t, d) in enumerate(zip(obs.tau, eq.delta))]
    write_csv(out_dir, "delta.csv", harness.rows_to_csv(["i", "tau", "delta"], rows))
    print(f"chi_hat = {eq.chi_hat:.12g}, gamma_hat = {eq.gamma_hat:.12g}")
    return EXIT_OK


def cmd_mse(run: RunConfig, out_dir: str) -> int:
    results = harness.run_trials(run.experiment)
    points = harness.aggregate(results)
    write_csv(out_dir, "trials.csv", harness.trials_csv(results))
    write_csv(out_dir, "aggregate.csv", harness.aggregate_csv(points))
    for p in points:
        print(f"N={p.N:5d}  mse={p.mse:.6g}  stderr={p.stderr:.3g}  ok={p.trials_ok}/{p.trials}")
    bad = [p.N for p in points if not p.ok]
    if bad:
        log.error("too many failed trials at N=%s", bad)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_diagnostics(run: RunConfig, out_dir: str) -> int:
    results = harness.run_trials(run.experiment)
    write_csv(out_dir, "diagnostics.csv", harness.diagnostics_csv(harness.diagnostic_rows(
        run.experiment, results)))
    bad = [p.N for p in harness.aggregate(results) if not p.ok]
    if bad:
        log.error("too many failed trials at N=%s", bad)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_checks(run: RunConfig, out_dir: str) -> int:
    exp = run.raw["experiment"]
    seed = run.experiment.seed
    N = int(exp["check_N"])
    n = int(round(run.experiment.ratio_n * N))
    trials = int(exp["check_trials"])
    size = int(exp["concentration_size"])
    alphas = np.full(size, 1.0 / size)
    reports = [
        rmt_checks.check_trace_lemma(N, n, trials, seed),
        rmt_checks.check_smallest_eigenvalue(N, n, trials, seed),
        rmt_checks.check_concentration(alphas, [float(t) for t in exp["concentration_t"]],
                                       int(exp["concentration_trials"]), seed),
        rmt_checks.check_gaussian_equivalence(N, n, trials, seed),
        rmt_checks.check_deterministic_equivalent(N, n, trials, seed),
    ]
    write_csv(out_dir, "checks.csv", rmt_checks.reports_csv(reports))
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.name:26s} {status}  statistic={r.statistic:.4g}  threshold={r.threshold:.4g}")
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate,
    "equivalents": cmd_equivalents,
    "mse": cmd_mse,
    "diagnostics": cmd_diagnostics,
    "checks": cmd_checks,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robscatter", description=__doc__.splitlines()[0])
    ap.add_argument("--print-default-config", action="store_true",
                    help="print the default config document and exit")
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="more logging (repeat for debug output)")
    sub = ap.add_subparsers(dest="command")
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out-dir", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("-v", "--verbose", action="count", default=0, dest="sub_verbose")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    verbosity = args.verbose + getattr(args, "sub_verbose", 0)
    level = logging.WARNING - 10 * min(verbosity, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    if args.print_default_config:
        print(json.dumps(DEFAULT_CONFIG, indent=2))
        return EXIT_OK
    if args.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_CONFIG

    try:
        run = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(f"robscatter: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out_dir, exist_ok=True)
    write_json(args.out_dir, "config.resolved.json", run.raw)
    try:
        return COMMANDS[args.command](run, args.out_dir)
    except ConvergenceError as exc:
        print(f"robscatter: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ConfigError as exc:
        print(f"robscatter: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RobScatterError as exc:
        print(f"robscatter: numerical failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
