"""Sequential weak-measurement protocol: L weak collective-spin
measurements along Haar-random directions, one conditional trajectory at a
time, with the accumulated Kraus product tracked throughout.

Each step draws a direction, samples the outcome from the current state's
Born density, applies the conditional update, and multiplies the step
operator into the running product.  Diagnostics (coherency, exponential
fit of the element) are snapshotted every ``diagnostics_stride`` steps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import (
    DegenerateEstimateError,
    KrausAccumulator,
    coherency,
    estimate_direction,
    extract_polar,
    povm_element,
    qubit_fidelity,
)
from .spin import SpinSystem, as_direction, build_spin_system, spin_coherent_state
from .weak import WeakMeasSettings, pick_center


@dataclass
class SequentialConfig:
    n_qubits: int
    n_steps: int
    kappa_dt: float = 1e-4
    initial_direction: Optional[tuple] = None  # None: Haar-random per trajectory
    diagnostics_stride: int = 10
    seed: int = 0
    degenerate_policy: str = "random"  # or "error"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.kappa_dt > 0:
            raise ValueError(f"kappa_dt must be positive, got {self.kappa_dt}")
        if self.diagnostics_stride < 1:
            raise ValueError("diagnostics_stride must be >= 1")
        if self.degenerate_policy not in ("random", "error"):
            raise ValueError(f"unknown degenerate_policy {self.degenerate_policy!r}")
        if self.initial_direction is not None:
            self.initial_direction = tuple(as_direction(self.initial_direction))


@dataclass
class MeasurementRecord:
    """Ordered per-step record: (direction, m) pairs for the sequential
    protocol, (control angle, dy) pairs for the continuous one."""

    outcomes: np.ndarray
    directions: Optional[np.ndarray] = None  # (L, 3)
    angles: Optional[np.ndarray] = None      # (L,)

    def __len__(self):
        return self.outcomes.shape[0]


@dataclass
class TrajectoryOutcome:
    """Everything retained from one simulated measurement record."""

    record: MeasurementRecord
    initial_direction: np.ndarray
    e_r: np.ndarray                 # final element, Hermitian PSD, trace 1
    estimate: np.ndarray
    fidelity: float
    times: np.ndarray               # kappa * t at each diagnostics snapshot
    coherency_series: np.ndarray
    alpha_series: np.ndarray
    residual_series: np.ndarray
    log_scale: float
    estimate_was_degenerate: bool = False
    metadata: dict = field(default_factory=dict)


def haar_direction(rng: np.random.Generator) -> np.ndarray:
    """Uniform direction on the sphere: cos(theta) and azimuth uniform."""
    z = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    s = np.sqrt(1.0 - z * z)
    return np.array([s * np.cos(phi), s * np.sin(phi), z])


def _finish(sys, config, rng, acc, record, n0, times, cohs, alphas, residuals,
            metadata) -> TrajectoryOutcome:
    e_final = povm_element(acc)
    degenerate = False
    try:
        n_hat = estimate_direction(sys, e_final)
    except DegenerateEstimateError:
        if config.degenerate_policy == "error":
            raise
        n_hat = haar_direction(rng)
        degenerate = True
    return TrajectoryOutcome(
        record=record,
        initial_direction=n0,
        e_r=e_final,
        estimate=n_hat,
        fidelity=qubit_fidelity(n0, n_hat),
        times=np.asarray(times),
        coherency_series=np.asarray(cohs),
        alpha_series=np.asarray(alphas),
        residual_series=np.asarray(residuals),
        log_scale=acc.log_scale,
        estimate_was_degenerate=degenerate,
        metadata=metadata,
    )


def _run_weak_loop(config: SequentialConfig, rng: np.random.Generator,
                   fixed_direction=None) -> TrajectoryOutcome:
    sys = build_spin_system(config.n_qubits)
    settings = WeakMeasSettings(config.kappa_dt)
    kdt = settings.kappa_dt
    sigma = 1.0 / np.sqrt(kdt)
    m_asc = sys.m_values[::-1]  # exact outcome centers -J .. J, eigh order

    if config.initial_direction is not None:
        n0 = as_direction(config.initial_direction)
    else:
        n0 = haar_direction(rng)
    psi = spin_coherent_state(sys, n0)

    if fixed_direction is not None:
        fixed_direction = as_direction(fixed_direction)
        fixed_decomp = np.linalg.eigh(
            fixed_direction[0] * sys.jx + fixed_direction[1] * sys.jy
            + fixed_direction[2] * sys.jz)

    acc = KrausAccumulator.identity(sys.dim)
    n_steps = config.n_steps
    directions = np.empty((n_steps, 3))
    outcomes = np.empty(n_steps)
    times, cohs, alphas, residuals = [], [], [], []

    for i in range(n_steps):
        if fixed_direction is None:
            u = haar_direction(rng)
            a = u[0] * sys.jx + u[1] * sys.jy + u[2] * sys.jz
            w, v = np.linalg.eigh(a)
        else:
            u = fixed_direction
            w, v = fixed_decomp

        amps = v.conj().T @ psi
        weights = np.abs(amps) ** 2
        idx = pick_center(weights, rng)
        m = float(rng.normal(m_asc[idx], sigma))

        g = np.exp(-0.25 * kdt * (w - m) ** 2)
        amps *= g
        norm = np.linalg.norm(amps)
        psi = v @ (amps / norm)

        acc.accumulate((v * g) @ v.conj().T)
        directions[i] = u
        outcomes[i] = m

        if (i + 1) % config.diagnostics_stride == 0 or i + 1 == n_steps:
            e = povm_element(acc)
            polar = extract_polar(sys, e)
            times.append((i + 1) * kdt)
            cohs.append(coherency(sys, e))
            alphas.append(polar.alpha)
            residuals.append(polar.fit_residual)

    record = MeasurementRecord(outcomes=outcomes, directions=directions)
    return _finish(sys, config, rng, acc, record, n0, times, cohs, alphas,
                   residuals, metadata={"final_state": psi})


def run_sequential(config: SequentialConfig,
                   rng: Optional[np.random.Generator] = None) -> TrajectoryOutcome:
    """Simulate one trajectory of Haar-random weak measurements."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    return _run_weak_loop(config, rng)


def run_fixed_direction(config: SequentialConfig, u,
                        rng: Optional[np.random.Generator] = None) -> TrajectoryOutcome:
    """Same loop with a constant measurement direction (validation mode).

    Continual measurement along one axis squeezes the state into a J_u
    eigenstate instead of converging to a coherent-state projector.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    return _run_weak_loop(config, rng, fixed_direction=u)
