#!/usr/bin/env python3
"""Headline coherency-convergence run: 50 trajectories of 5000 weak
measurements on N=50 qubits from a fixed initial state, tracking the
coherency of the realized POVM element.

Afterwards, regenerate the band figure with:
    plot coherency --in <out>/trajectories.csv --out coherency.svg
"""

import argparse

from scspovm.runner import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/coherency_band")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--trajectories", type=int, default=50)
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--workers", type=int, default=2)
    args = ap.parse_args()

    config = ExperimentConfig(
        experiment="sequential", n_qubits=args.n,
        n_trajectories=args.trajectories, n_steps=args.steps, kappa_dt=1e-4,
        diagnostics_stride=10, initial_direction=(0.0, 0.0, 1.0),
        master_seed=args.seed, out=args.out, workers=args.workers)
    paths = run_experiment(config)
    print(f"wrote {paths['csv']} and {paths['summary']}")


if __name__ == "__main__":
    main()
