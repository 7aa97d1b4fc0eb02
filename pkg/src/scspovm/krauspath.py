"""Operator-valued Kraus paths driven by an isotropic Wiener process.

Validates the convergence theory independently of the trajectory
protocols: the coarse-grained product K ~ prod exp((kappa dt / 2) mu . J)
with Gaussian mu stays inside an SL(2,C) representation, so its element
K^dag K = exp(2 alpha n . J) exactly, and alpha performs an unbiased
random walk whose variance grows linearly in time.

The per-component variance of mu is selectable: "third" uses 1/(3 kappa dt)
(the value implied by composing isotropic unit-vector measurements, giving
Var(alpha) = kappa T / 12) while "unit" uses 1/(kappa dt) (the Wiener
weight read literally, giving kappa T / 4).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import KrausAccumulator, extract_polar
from .seeding import derive_seed
from .spin import SpinSystem, build_spin_system, diagonalize_component, spin_component

MU_VARIANCE_MODES = ("third", "unit")


@dataclass
class PathConfig:
    n_qubits: int
    delta_t: float
    total_time: float
    kappa: float = 1.0
    mu_variance_mode: str = "third"
    n_paths: int = 1
    seed: int = 0
    store_series: bool = False  # keep per-step axis/unitary series (memory!)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if not self.delta_t > 0:
            raise ValueError("delta_t must be positive")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        steps = self.total_time / self.delta_t
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ValueError("total_time must be a positive multiple of delta_t")
        if self.mu_variance_mode not in MU_VARIANCE_MODES:
            raise ValueError(f"mu_variance_mode must be one of {MU_VARIANCE_MODES}")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.total_time / self.delta_t))

    @property
    def mu_std(self) -> float:
        kdt = self.kappa * self.delta_t
        var = 1.0 / (3.0 * kdt) if self.mu_variance_mode == "third" else 1.0 / kdt
        return float(np.sqrt(var))


@dataclass
class PathStats:
    """Ensemble summary of integrated Kraus paths.

    The extraction returns a magnitude and an axis, defined only up to the
    simultaneous flip (alpha, n) -> (-alpha, -n); the unambiguous object is
    the vector alpha * n.  The scalar alpha reported here is its projection
    onto the fixed z axis, which is the signed quantity that diffuses with
    the stated per-step variance and has zero ensemble mean.  (The radial
    magnitude |alpha * n| picks up all three isotropic components and its
    squared mean grows three times faster.)
    """

    times: np.ndarray
    alpha_var_series: np.ndarray
    alpha_mean_series: np.ndarray
    final_alphas: np.ndarray        # signed z-projections, one per path
    final_alpha_vectors: np.ndarray  # (n_paths, 3) full alpha * n vectors
    final_axes: np.ndarray          # (n_paths, 3), gauge alpha >= 0
    final_drift_angles: np.ndarray  # rotation angle of the polar unitary
    alpha_mean: float
    alpha_var: float
    alpha_series: Optional[np.ndarray] = None       # (n_paths, n_steps)
    axis_series: Optional[np.ndarray] = None        # (n_paths, n_steps, 3)
    step_angle_series: Optional[np.ndarray] = None  # per-step unitary angles
    residual_max: float = 0.0


def sample_mu(rng: np.random.Generator, config: PathConfig) -> np.ndarray:
    """Isotropic Gaussian coarse-grained record increment."""
    return rng.normal(0.0, config.mu_std, 3)


def step_path(sys: SpinSystem, acc: KrausAccumulator, mu,
              config: PathConfig) -> KrausAccumulator:
    """Exact update K <- exp((kappa dt / 2) mu . J) K."""
    mu = np.asarray(mu, dtype=float)
    norm = float(np.linalg.norm(mu))
    if norm == 0.0:
        return acc
    w, v = diagonalize_component(sys, mu / norm)
    g = np.exp(0.5 * config.kappa * config.delta_t * norm * w)
    return acc.accumulate((v * g) @ v.conj().T)


def polar_unitary(sys: SpinSystem, acc: KrausAccumulator, alpha: float, axis) -> np.ndarray:
    """Unitary factor of K = c U exp(alpha axis . J), normalized to unit scale."""
    w, v = diagonalize_component(sys, axis)
    inv = (v * np.exp(-alpha * w)) @ v.conj().T
    u = acc.matrix @ inv
    scale = np.sqrt(np.real(np.trace(u.conj().T @ u)) / sys.dim)
    return u / scale


def rotation_angle(sys: SpinSystem, u: np.ndarray) -> float:
    """Rotation angle of a spin-J rotation representation, via its adjoint
    action on (jx, jy, jz)."""
    ops = (sys.jx, sys.jy, sys.jz)
    c = sys.j * (sys.j + 1) * (2 * sys.j + 1) / 3.0
    tr_r = 0.0
    for op in ops:
        tr_r += np.real(np.trace(op @ u @ op @ u.conj().T)) / c
    return float(np.arccos(np.clip((tr_r - 1.0) / 2.0, -1.0, 1.0)))


def run_single_path(config: PathConfig, path_index: int, sys: SpinSystem = None):
    """Integrate one path with its derived RNG stream.

    Returns (alpha z-projection series, final alpha vector, final axis,
    final drift angle, axis series or None, step-angle series or None,
    max fit residual).
    """
    if sys is None:
        sys = build_spin_system(config.n_qubits)
    rng = np.random.default_rng(derive_seed(config.seed, path_index))
    acc = KrausAccumulator.identity(sys.dim)

    n_steps = config.n_steps
    alphas = np.empty(n_steps)
    axis_series = np.empty((n_steps, 3)) if config.store_series else None
    step_angles = np.empty(n_steps) if config.store_series else None
    residual_max = 0.0
    u_prev = None
    polar = None

    for i in range(n_steps):
        step_path(sys, acc, sample_mu(rng, config), config)
        e = acc.matrix.conj().T @ acc.matrix
        polar = extract_polar(sys, 0.5 * (e + e.conj().T))
        residual_max = max(residual_max, polar.fit_residual)
        alphas[i] = polar.alpha * polar.axis[2]

        if config.store_series:
            axis_series[i] = polar.axis
            u = polar_unitary(sys, acc, polar.alpha, polar.axis)
            step_angles[i] = rotation_angle(
                sys, u if u_prev is None else u @ u_prev.conj().T)
            u_prev = u

    drift = rotation_angle(sys, polar_unitary(sys, acc, polar.alpha, polar.axis))
    return (alphas, polar.alpha * polar.axis, polar.axis, drift,
            axis_series, step_angles, residual_max)


def run_paths(config: PathConfig) -> PathStats:
    """Integrate an ensemble of independent paths and summarize alpha."""
    sys = build_spin_system(config.n_qubits)
    n_steps = config.n_steps
    alpha_all = np.empty((config.n_paths, n_steps))
    avecs = np.empty((config.n_paths, 3))
    axes = np.empty((config.n_paths, 3))
    drifts = np.empty(config.n_paths)
    axis_all = np.empty((config.n_paths, n_steps, 3)) if config.store_series else None
    angle_all = np.empty((config.n_paths, n_steps)) if config.store_series else None
    residual_max = 0.0

    for p in range(config.n_paths):
        alphas, avec, axis, drift, axis_series, step_angles, res = \
            run_single_path(config, p, sys=sys)
        alpha_all[p] = alphas
        avecs[p] = avec
        axes[p] = axis
        drifts[p] = drift
        residual_max = max(residual_max, res)
        if config.store_series:
            axis_all[p] = axis_series
            angle_all[p] = step_angles

    times = config.delta_t * config.kappa * np.arange(1, n_steps + 1)
    return PathStats(
        times=times,
        alpha_var_series=alpha_all.var(axis=0, ddof=1) if config.n_paths > 1
        else np.zeros(n_steps),
        alpha_mean_series=alpha_all.mean(axis=0),
        final_alphas=alpha_all[:, -1].copy(),
        final_alpha_vectors=avecs,
        final_axes=axes,
        final_drift_angles=drifts,
        alpha_mean=float(alpha_all[:, -1].mean()),
        alpha_var=float(alpha_all[:, -1].var(ddof=1)) if config.n_paths > 1 else 0.0,
        alpha_series=alpha_all if config.store_series else None,
        axis_series=axis_all,
        step_angle_series=angle_all,
        residual_max=residual_max,
    )


def grouped_isotropy_check(sys: SpinSystem, directions) -> float:
    """Spectral-norm deviation of the direction-averaged squared component
    (1/l) sum_i (u_i . J)^2 from its isotropic value J(J+1)/3 * identity."""
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    avg = np.zeros((sys.dim, sys.dim), dtype=complex)
    for u in directions:
        ju = spin_component(sys, u)
        avg += ju @ ju
    avg /= directions.shape[0]
    dev = avg - (sys.j * (sys.j + 1) / 3.0) * np.eye(sys.dim)
    return float(np.max(np.abs(np.linalg.eigvalsh(dev))))
