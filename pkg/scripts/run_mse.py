"""Mean squared spectral distance between the estimator and its equivalent, across N.

    python scripts/run_mse.py --trials 100 --out results/
    python scripts/run_mse.py --config scripts/configs/heavy_tail.json

Writes ``trials.csv`` and ``aggregate.csv`` and prints the log-log slope of
the MSE against N.
"""

import argparse
import dataclasses
import json
import logging
import os

import numpy as np

from robscatter import cli, harness


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=os.path.join(os.path.dirname(__file__), "configs", "baseline.json"))
    ap.add_argument("--trials", type=int, default=None, help="override the number of trials")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    run = cli.load_config(args.config, args.seed)
    cfg = run.experiment
    if args.trials is not None:
        cfg = dataclasses.replace(cfg, trials=args.trials)
    results = harness.run_trials(cfg)
    points = harness.aggregate(results)

    os.makedirs(args.out, exist_ok=True)
    cli.write_csv(args.out, "trials.csv", harness.trials_csv(results))
    cli.write_csv(args.out, "aggregate.csv", harness.aggregate_csv(points))
    cli.write_json(args.out, "config.resolved.json", dict(run.raw, experiment=dict(
        run.raw["experiment"], trials=cfg.trials)))

    for p in points:
        print(f"N={p.N:4d}  mse={p.mse:.5f} +- {p.stderr:.5f}  iters={p.mean_iters:.1f}  "
              f"ok={p.trials_ok}/{p.trials}")
    good = [p for p in points if p.trials_ok > 0]
    if len(good) >= 2:
        slope = np.polyfit(np.log([p.N for p in good]), np.log([p.mse for p in good]), 1)[0]
        print(f"log-log slope of mse against N: {slope:.2f}")
    print(json.dumps({"decreasing": all(b.mse < a.mse for a, b in zip(points, points[1:]))}))


if __name__ == "__main__":
    main()
