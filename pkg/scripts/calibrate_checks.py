"""Calibration runs for the statistical checks.

Runs every check over many seeds and prints quantiles of the statistic, scaled
the way the thresholds in ``robscatter.calibration`` are parameterised.

    python scripts/calibrate_checks.py --seeds 200
"""

import argparse
import math

import numpy as np

from robscatter import rmt_checks


def quantiles(xs):
    qs = np.quantile(xs, [0.5, 0.9, 0.95, 0.99, 1.0])
    return " ".join(f"q{p}={q:.4g}" for p, q in zip((50, 90, 95, 99, 100), qs))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--offset", type=int, default=10_000, help="first calibration seed")
    args = ap.parse_args()
    seeds = range(args.offset, args.offset + args.seeds)

    for N, n in [(20, 60), (50, 150), (100, 300), (200, 600), (400, 1200)]:
        for matrix in ("identity", "random"):
            s = [rmt_checks.check_trace_lemma(N, n, 1, sd, matrix=matrix).statistic * math.sqrt(N)
                 for sd in seeds]
            print(f"trace_lemma N={N} A={matrix}: sqrt(N)*stat {quantiles(s)}")

    for N, n in [(50, 150), (100, 300)]:
        reps = [rmt_checks.check_smallest_eigenvalue(N, n, 1, sd) for sd in seeds[:50]]
        print(f"smallest_eigenvalue N={N}: min lambda_loo "
              f"{quantiles([r.extras['min_lambda_loo'] for r in reps])}")
        print(f"smallest_eigenvalue N={N}: max norm {quantiles([r.extras['max_norm'] for r in reps])}")

    for N in (50, 100, 200):
        s = [rmt_checks.check_gaussian_equivalence(N, 3 * N, 5, sd).statistic * math.sqrt(N)
             for sd in seeds[:100]]
        print(f"gaussian_equivalence N={N}: sqrt(N)*median {quantiles(s)}")

    for N in (50, 100, 200):
        s = [rmt_checks.check_deterministic_equivalent(N, 3 * N, 1, sd).statistic * math.sqrt(N)
             for sd in seeds[:100]]
        print(f"deterministic_equivalent N={N}: sqrt(N)*stat {quantiles(s)}")


if __name__ == "__main__":
    main()
