"""Figure builders: coherency band and infidelity vs N.

Plotted values are taken from the input files exactly (no resampling or
smoothing), and output bytes are deterministic for a fixed input and spec.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "povmfigures"  # deterministic SVG ids

import matplotlib.pyplot as plt
import numpy as np

PLOT_KINDS = ("coherency_band", "infidelity_vs_n")

# marker/color per protocol, one entry per series in the sweep summaries
SERIES_STYLE = {
    "sequential": {"marker": "^", "color": "#17becf", "label": "sequential weak"},
    "continuous": {"marker": "o", "color": "#ff7f0e", "label": "continuous weak"},
}


@dataclass
class PlotSpec:
    inputs: list
    kind: str
    output: Path
    title: str = ""
    highlight: str = ""           # trajectory id to emphasize (default: first)
    axis_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"kind must be one of {PLOT_KINDS}, got {self.kind!r}")
        self.inputs = [Path(p) for p in self.inputs]
        if not self.inputs:
            raise ValueError("at least one input file is required")
        for p in self.inputs:
            if not p.exists():
                raise FileNotFoundError(f"input file does not exist: {p}")
        self.output = Path(self.output)


def _read_coherency_csv(path: Path):
    """Columns trajectory_id, t_kappa, coherency -> {id: (times, values)}."""
    series: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"trajectory_id", "t_kappa", "coherency"}
        missing = required - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            series.setdefault(row["trajectory_id"], []).append(
                (float(row["t_kappa"]), float(row["coherency"])))
    if not series:
        raise ValueError(f"{path}: no data rows")
    out = {}
    for tid, pairs in series.items():
        pairs.sort()
        arr = np.asarray(pairs)
        out[tid] = (arr[:, 0], arr[:, 1])
    return out


def _save(fig, output: Path):
    output.parent.mkdir(parents=True, exist_ok=True)
    suffix = output.suffix.lower()
    if suffix not in (".svg", ".png"):
        raise ValueError(f"unsupported output format {suffix!r} (use .svg or .png)")
    # SVG embeds a creation date by default; drop it for byte-stable output
    metadata = {"Date": None} if suffix == ".svg" else None
    fig.savefig(output, dpi=150, metadata=metadata)
    plt.close(fig)


def plot_coherency_band(spec: PlotSpec) -> Path:
    """Min-max coherency envelope across trajectories plus one highlighted
    realization, against kappa*t."""
    series = _read_coherency_csv(spec.inputs[0])
    ids = sorted(series)
    times0 = series[ids[0]][0]
    for tid in ids:
        if series[tid][0].shape != times0.shape or not np.allclose(series[tid][0], times0):
            raise ValueError("trajectories do not share a common time grid")

    values = np.stack([series[tid][1] for tid in ids])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if len(ids) > 1:
        ax.fill_between(times0, values.min(axis=0), values.max(axis=0),
                        color="#2ca02c", alpha=0.35, linewidth=0,
                        label=f"{len(ids)} realizations")
    pick = spec.highlight or ids[0]
    if pick not in series:
        raise ValueError(f"highlight trajectory {pick!r} not present")
    ax.plot(*series[pick], color="black", linewidth=1.2, label="one realization")
    ax.set_xlabel(r"$\kappa t$")
    ax.set_ylabel("coherency")
    ax.set_ylim(0.0, 1.02)
    ax.set_xlim(float(times0[0]), float(times0[-1]))
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(loc="lower right", frameon=False)
    fig.tight_layout()
    _save(fig, spec.output)
    return spec.output


def plot_infidelity_vs_n(spec: PlotSpec) -> Path:
    """Mean infidelity vs qubit number per protocol, error bars, and the
    1/(N+2) optimal bound, log ordinate."""
    rows = []
    for path in spec.inputs:
        summary = json.loads(Path(path).read_text(encoding="utf-8"))
        if "rows" not in summary:
            raise ValueError(f"{path}: no 'rows' array in summary")
        for row in summary["rows"]:
            for col in ("protocol", "n_qubits", "mean_infidelity",
                        "stderr_infidelity"):
                if col not in row:
                    raise ValueError(f"{path}: row missing column {col!r}")
            rows.append(row)
    if not rows:
        raise ValueError("no summary rows to plot")

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    protocols = sorted({r["protocol"] for r in rows})
    for proto in protocols:
        sel = sorted((r["n_qubits"], r) for r in rows if r["protocol"] == proto)
        ns = np.array([n for n, _ in sel], dtype=float)
        means = np.array([r["mean_infidelity"] for _, r in sel])
        errs = np.array([r["stderr_infidelity"] for _, r in sel])
        style = SERIES_STYLE.get(proto, {"marker": "s", "color": "gray",
                                         "label": proto})
        ax.errorbar(ns, means, yerr=errs, linestyle="none", capsize=3,
                    marker=style["marker"], color=style["color"],
                    label=style["label"])

    all_n = sorted({r["n_qubits"] for r in rows})
    grid = np.linspace(min(all_n), max(all_n), 200)
    ax.plot(grid, 1.0 / (grid + 2), color="black", linewidth=1.0,
            label=r"optimal $1/(N+2)$")
    ax.set_yscale("log")
    ax.set_xlabel("number of qubits $N$")
    ax.set_ylabel("average infidelity")
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, spec.output)
    return spec.output
