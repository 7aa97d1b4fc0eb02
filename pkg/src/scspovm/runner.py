"""Experiment orchestration: reproducible parallel trajectory ensembles,
CSV/JSON persistence, and the sweep over qubit numbers.

Every trajectory gets its own RNG stream seeded by ``derive_seed(master,
index)``, so results are independent of worker count and scheduling; rows
are merged in index order and floats are written with 17 significant
digits, which makes rerun outputs byte-identical.  Workers are spawned
(not forked) with BLAS threading pinned to one thread per process.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing as mp
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import scs_resolution_check
from .continuous import ContinuousConfig, run_continuous
from .krauspath import PathConfig, run_single_path
from .seeding import derive_seed
from .sequential import SequentialConfig, run_sequential
from .spin import build_spin_system

EXPERIMENTS = ("sequential", "continuous", "sweep", "krauspath", "validate")

CSV_HEADER = ["trajectory_id", "seed", "config_hash", "t_kappa", "coherency",
              "alpha", "fit_residual", "n_hat_x", "n_hat_y", "n_hat_z", "fidelity"]

KRAUSPATH_CSV_HEADER = ["trajectory_id", "seed", "config_hash", "t_kappa", "alpha"]


@dataclass
class ExperimentConfig:
    """Flat, JSON-compatible description of one experiment run."""

    experiment: str
    n_qubits: int = 10
    n_trajectories: int = 1
    master_seed: int = 0
    out: str = "results/run"
    workers: int = 1
    # weak-measurement trajectory parameters
    kappa_dt: float = 1e-4
    n_steps: Optional[int] = None          # default: T = 1/kappa, i.e. 1/kappa_dt
    diagnostics_stride: Optional[int] = None
    initial_direction: Optional[tuple] = None
    # continuous-protocol parameters
    kappa: float = 1.0
    dt: Optional[float] = None
    total_time: Optional[float] = None
    rabi_over_kappa: float = 20.0 * np.pi
    control_dwell: Optional[float] = None
    # sweep parameters
    n_qubits_grid: tuple = (2, 6, 10, 20, 30, 50)
    protocol: str = "sequential"           # sequential | continuous | both
    # kraus-path parameters
    delta_t: float = 0.01
    mu_variance_mode: str = "third"
    n_paths: int = 2000
    # validate parameters
    validate_grid: tuple = (1, 2, 5, 10)
    validate_n_polar: int = 60
    validate_n_azimuth: int = 120

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(
                f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.protocol not in ("sequential", "continuous", "both"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.experiment == "sweep" and len(self.n_qubits_grid) == 0:
            raise ValueError("n_qubits_grid must be nonempty for sweep")
        if self.initial_direction is not None:
            self.initial_direction = tuple(float(x) for x in self.initial_direction)
        self.n_qubits_grid = tuple(int(n) for n in self.n_qubits_grid)
        self.validate_grid = tuple(int(n) for n in self.validate_grid)

    def config_hash(self) -> str:
        """Hash of the science-relevant fields (not out/workers)."""
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class SweepSummary:
    protocol: str
    n_qubits: int
    n_trajectories: int
    mean_infidelity: float
    stderr_infidelity: float
    mp_bound_infidelity: float
    mean_fidelity: float
    final_coherency_median: float


def _fmt(x) -> str:
    return f"{x:.17g}"


def default_steps(config: ExperimentConfig) -> int:
    """Sequential step count for total time T = 1/kappa."""
    if config.n_steps is not None:
        return config.n_steps
    return int(round(1.0 / config.kappa_dt))


def _sequential_task_config(config: ExperimentConfig, n_qubits: int,
                            stride: Optional[int]) -> dict:
    steps = default_steps(config)
    return {
        "n_qubits": n_qubits,
        "n_steps": steps,
        "kappa_dt": config.kappa_dt,
        "initial_direction": config.initial_direction,
        "diagnostics_stride": stride if stride is not None else
        (config.diagnostics_stride if config.diagnostics_stride is not None else 10),
    }


def _continuous_task_config(config: ExperimentConfig, n_qubits: int,
                            stride: Optional[int]) -> dict:
    return {
        "n_qubits": n_qubits,
        "kappa": config.kappa,
        "dt": config.dt,
        "total_time": config.total_time,
        "rabi_over_kappa": config.rabi_over_kappa,
        "control_dwell": config.control_dwell,
        "initial_direction": config.initial_direction,
        "diagnostics_stride": stride if stride is not None else
        (config.diagnostics_stride if config.diagnostics_stride is not None else 100),
    }


def _run_trajectory_task(task: dict) -> dict:
    """Worker entry point: one trajectory, slim picklable result."""
    rng = np.random.default_rng(task["seed"])
    if task["protocol"] == "sequential":
        cfg = SequentialConfig(**task["config"])
        out = run_sequential(cfg, rng)
    else:
        cfg = ContinuousConfig(**task["config"])
        out = run_continuous(cfg, rng)
    return {
        "trajectory_id": task["trajectory_id"],
        "index": task["index"],
        "seed": task["seed"],
        "protocol": task["protocol"],
        "n_qubits": task["config"]["n_qubits"],
        "times": out.times,
        "coherency": out.coherency_series,
        "alpha": out.alpha_series,
        "residual": out.residual_series,
        "estimate": out.estimate,
        "fidelity": out.fidelity,
        "initial_direction": out.initial_direction,
        "log_scale": out.log_scale,
        "degenerate": out.estimate_was_degenerate,
    }


def _run_krauspath_task(task: dict) -> dict:
    cfg = PathConfig(**task["config"])
    alphas, avec, axis, drift, _, _, res = run_single_path(cfg, task["index"])
    return {
        "index": task["index"],
        "seed": derive_seed(cfg.seed, task["index"]),
        "alphas": alphas,
        "alpha_vector": avec,
        "axis": axis,
        "drift": drift,
        "residual_max": res,
    }


def _run_validate_task(task: dict) -> dict:
    sys_ = build_spin_system(task["n_qubits"])
    dev = scs_resolution_check(sys_, (task["n_polar"], task["n_azimuth"]))
    return {"n_qubits": task["n_qubits"], "deviation": dev,
            "n_polar": task["n_polar"], "n_azimuth": task["n_azimuth"]}


def _execute(task_fn, tasks: list, workers: int, label: str) -> list:
    """Map tasks over a spawn pool, preserving order; progress to stderr."""
    if not tasks:
        return []
    os.environ.setdefault("OMP_NUM_THREADS", "1")
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    workers = min(workers, len(tasks))
    results = []
    ctx = mp.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        done = 0
        report_every = max(1, len(tasks) // 10)
        for res in pool.map(task_fn, tasks, chunksize=1):
            results.append(res)
            done += 1
            if done % report_every == 0 or done == len(tasks):
                print(f"[{label}] {done}/{len(tasks)} tasks done", file=sys.stderr)
    return results


def _write_trajectory_csv(path: Path, results: list, config_hash: str):
    lines = [",".join(CSV_HEADER)]
    for res in results:
        n_snap = len(res["times"])
        for k in range(n_snap):
            row = [str(res["trajectory_id"]), str(res["seed"]), config_hash,
                   _fmt(res["times"][k]), _fmt(res["coherency"][k]),
                   _fmt(res["alpha"][k]), _fmt(res["residual"][k])]
            if k == n_snap - 1:
                row += [_fmt(res["estimate"][0]), _fmt(res["estimate"][1]),
                        _fmt(res["estimate"][2]), _fmt(res["fidelity"])]
            else:
                row += ["", "", "", ""]
            lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _group_summaries(results: list) -> list:
    """Per (protocol, N) infidelity statistics, in first-seen order."""
    groups: dict = {}
    for res in results:
        groups.setdefault((res["protocol"], res["n_qubits"]), []).append(res)
    out = []
    for (protocol, n), rows in groups.items():
        fids = np.array([r["fidelity"] for r in rows])
        infids = 1.0 - fids
        stderr = float(infids.std(ddof=1) / np.sqrt(len(rows))) if len(rows) > 1 else 0.0
        out.append(SweepSummary(
            protocol=protocol,
            n_qubits=n,
            n_trajectories=len(rows),
            mean_infidelity=float(infids.mean()),
            stderr_infidelity=stderr,
            mp_bound_infidelity=1.0 / (n + 2),
            mean_fidelity=float(fids.mean()),
            final_coherency_median=float(np.median([r["coherency"][-1] for r in rows])),
        ))
    return out


def _trajectory_tasks(config: ExperimentConfig) -> list:
    """Build the deterministic task list for the configured experiment."""
    tasks = []
    if config.experiment in ("sequential", "continuous"):
        protos = [(config.experiment, config.n_qubits)]
        stride = config.diagnostics_stride
    else:  # sweep: snapshots only at the end unless explicitly asked
        protocols = [config.protocol] if config.protocol != "both" \
            else ["sequential", "continuous"]
        protos = [(p, n) for p in protocols for n in config.n_qubits_grid]
        stride = config.diagnostics_stride  # None -> per-task below

    index = 0
    for protocol, n_qubits in protos:
        if protocol == "sequential":
            task_cfg = _sequential_task_config(config, n_qubits, stride)
            if config.experiment == "sweep" and stride is None:
                task_cfg["diagnostics_stride"] = task_cfg["n_steps"]
        else:
            task_cfg = _continuous_task_config(config, n_qubits, stride)
            if config.experiment == "sweep" and stride is None:
                # sweeps only need the final snapshot
                probe = ContinuousConfig(**{**task_cfg, "diagnostics_stride": 1})
                task_cfg["diagnostics_stride"] = max(1, probe.n_steps)
        for i in range(config.n_trajectories):
            tasks.append({
                "trajectory_id": f"{protocol}-N{n_qubits}-{i:04d}",
                "index": index,
                "seed": derive_seed(config.master_seed, index),
                "protocol": protocol,
                "config": task_cfg,
            })
            index += 1
    return tasks


def run_experiment(config: ExperimentConfig) -> dict:
    """Execute the experiment and write artifacts into ``config.out``.

    Returns {"out_dir": ..., "csv": ..., "summary": ...} paths.  The same
    config and master seed produce byte-identical CSV and summary files
    for any worker count.
    """
    t_start = time.time()
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    chash = config.config_hash()

    cfg_json = {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in asdict(config).items()}
    (out_dir / "config.json").write_text(
        json.dumps(cfg_json, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    summary: dict = {"experiment": config.experiment, "config_hash": chash,
                     "master_seed": config.master_seed}
    csv_path = None

    if config.experiment in ("sequential", "continuous", "sweep"):
        tasks = _trajectory_tasks(config)
        results = _execute(_run_trajectory_task, tasks, config.workers,
                           config.experiment)
        csv_path = out_dir / "trajectories.csv"
        _write_trajectory_csv(csv_path, results, chash)
        rows = _group_summaries(results)
        summary["rows"] = [asdict(r) for r in rows]
        summary["n_degenerate_estimates"] = int(sum(r["degenerate"] for r in results))
        if config.experiment != "sweep":
            cohs = np.array([r["coherency"][-1] for r in results])
            summary["final_coherency"] = {
                "min": float(cohs.min()), "median": float(np.median(cohs)),
                "mean": float(cohs.mean()), "max": float(cohs.max()),
            }

    elif config.experiment == "krauspath":
        path_cfg = {"n_qubits": config.n_qubits, "delta_t": config.delta_t,
                    "total_time": config.total_time if config.total_time is not None
                    else 1.0 / config.kappa,
                    "kappa": config.kappa,
                    "mu_variance_mode": config.mu_variance_mode,
                    "n_paths": config.n_paths, "seed": config.master_seed}
        probe = PathConfig(**path_cfg)
        tasks = [{"index": i, "config": path_cfg} for i in range(config.n_paths)]
        results = _execute(_run_krauspath_task, tasks, config.workers, "krauspath")
        alpha_all = np.stack([r["alphas"] for r in results])
        times = probe.delta_t * probe.kappa * np.arange(1, probe.n_steps + 1)
        var_series = alpha_all.var(axis=0, ddof=1)
        slope, intercept = np.polyfit(times, var_series, 1)
        fitted = slope * times + intercept
        ss_res = float(np.sum((var_series - fitted) ** 2))
        ss_tot = float(np.sum((var_series - var_series.mean()) ** 2))
        expected = probe.kappa / 12.0 if config.mu_variance_mode == "third" \
            else probe.kappa / 4.0
        summary.update({
            "mode": config.mu_variance_mode,
            "n_paths": config.n_paths,
            "n_qubits": config.n_qubits,
            "times": [float(t) for t in times],
            "alpha_var_series": [float(v) for v in var_series],
            "alpha_mean": float(alpha_all[:, -1].mean()),
            "alpha_var": float(alpha_all[:, -1].var(ddof=1)),
            "var_slope": float(slope),
            "var_slope_expected": expected,
            "var_intercept": float(intercept),
            "r_squared": 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0,
            "residual_max": max(r["residual_max"] for r in results),
        })
        csv_path = out_dir / "trajectories.csv"
        lines = [",".join(KRAUSPATH_CSV_HEADER)]
        for r in results:
            for k, t in enumerate(times):
                lines.append(",".join([
                    f"path-{r['index']:04d}", str(r["seed"]), chash,
                    _fmt(t), _fmt(r["alphas"][k])]))
        csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    else:  # validate
        tasks = [{"n_qubits": n, "n_polar": config.validate_n_polar,
                  "n_azimuth": config.validate_n_azimuth}
                 for n in config.validate_grid]
        results = _execute(_run_validate_task, tasks, config.workers, "validate")
        summary["rows"] = results

    summary["runtime_seconds"] = round(time.time() - t_start, 3)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    return {"out_dir": str(out_dir), "csv": str(csv_path) if csv_path else None,
            "summary": str(summary_path)}
