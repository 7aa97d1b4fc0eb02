"""Command-line front end for the experiment runner.

Subcommands map one-to-one onto experiments; a JSON config file supplies
defaults and explicit flags override it.  The effective config is echoed
into the output directory for provenance.  On failure a single
machine-readable JSON error line is printed to stderr and the exit code
is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .runner import EXPERIMENTS, ExperimentConfig, run_experiment


def _parse_vector(text: str):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return tuple(parts)


def _parse_grid(text: str):
    return tuple(int(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scspovm",
        description="Weak collective-spin measurement simulator: realize the "
                    "spin-coherent-state POVM and score tomography fidelity.")
    sub = parser.add_subparsers(dest="experiment", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="JSON file with ExperimentConfig fields")
    common.add_argument("--seed", type=int, default=None, dest="master_seed",
                        help="master seed for per-trajectory stream derivation")
    common.add_argument("--n", type=int, default=None, dest="n_qubits",
                        help="number of qubit copies")
    common.add_argument("--trajectories", type=int, default=None,
                        dest="n_trajectories")
    common.add_argument("--steps", type=int, default=None, dest="n_steps",
                        help="number of weak measurements per trajectory")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--stride", type=int, default=None,
                        dest="diagnostics_stride",
                        help="steps between diagnostic snapshots")

    p = sub.add_parser("sequential", parents=[common],
                       help="weak measurements along Haar-random directions")
    p.add_argument("--kappa-dt", type=float, default=None, dest="kappa_dt")
    p.add_argument("--initial", type=_parse_vector, default=None,
                   dest="initial_direction",
                   help="fixed initial Bloch direction 'x,y,z' (default Haar)")

    p = sub.add_parser("continuous", parents=[common],
                       help="continuous J_z measurement with random controls")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--total-time", type=float, default=None, dest="total_time")
    p.add_argument("--initial", type=_parse_vector, default=None,
                   dest="initial_direction")

    p = sub.add_parser("sweep", parents=[common],
                       help="infidelity vs N against the optimal bound")
    p.add_argument("--grid", type=_parse_grid, default=None, dest="n_qubits_grid")
    p.add_argument("--protocol", choices=["sequential", "continuous", "both"],
                   default=None)
    p.add_argument("--kappa-dt", type=float, default=None, dest="kappa_dt")

    p = sub.add_parser("krauspath", parents=[common],
                       help="operator-valued Wiener paths: alpha diffusion")
    p.add_argument("--paths", type=int, default=None, dest="n_paths")
    p.add_argument("--mode", choices=["third", "unit"], default=None,
                   dest="mu_variance_mode")
    p.add_argument("--delta-t", type=float, default=None, dest="delta_t")
    p.add_argument("--total-time", type=float, default=None, dest="total_time")

    p = sub.add_parser("validate", parents=[common],
                       help="quadrature check of the coherent-state resolution "
                            "of identity")
    p.add_argument("--grid", type=_parse_grid, default=None, dest="validate_grid")

    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config is not None:
        values.update(json.loads(Path(args.config).read_text()))
    for key, val in vars(args).items():
        if key == "config" or val is None:
            continue
        values[key] = val
    values["experiment"] = args.experiment
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        paths = run_experiment(config)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    print(json.dumps(paths))
    return 0


if __name__ == "__main__":
    sys.exit(main())
