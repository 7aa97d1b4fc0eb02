#!/usr/bin/env python3
"""Infidelity-vs-N sweeps for both protocols at total time T = 1/kappa,
scored against the optimal pure-qubit tomography bound 1/(N+2).

Afterwards, regenerate the figure with:
    plot infidelity --in <out>_sequential/summary.json \
                    --in <out>_continuous/summary.json --out infidelity.svg
"""

import argparse

from scspovm.runner import ExperimentConfig, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/sweep")
    ap.add_argument("--grid", default="2,6,10,20,30,50")
    ap.add_argument("--continuous-grid", default="2,6,10")
    ap.add_argument("--trajectories", type=int, default=200)
    ap.add_argument("--continuous-trajectories", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2027)
    ap.add_argument("--workers", type=int, default=2)
    ap.add_argument("--skip-continuous", action="store_true")
    args = ap.parse_args()

    seq = ExperimentConfig(
        experiment="sweep", protocol="sequential",
        n_qubits_grid=tuple(int(x) for x in args.grid.split(",")),
        n_trajectories=args.trajectories, kappa_dt=1e-4, n_steps=10000,
        master_seed=args.seed, out=f"{args.out}_sequential",
        workers=args.workers)
    paths = run_experiment(seq)
    print(f"sequential sweep -> {paths['summary']}")

    if not args.skip_continuous:
        cont = ExperimentConfig(
            experiment="sweep", protocol="continuous",
            n_qubits_grid=tuple(int(x) for x in args.continuous_grid.split(",")),
            n_trajectories=args.continuous_trajectories,
            master_seed=args.seed + 1, out=f"{args.out}_continuous",
            workers=args.workers)
        paths = run_experiment(cont)
        print(f"continuous sweep -> {paths['summary']}")


if __name__ == "__main__":
    main()
