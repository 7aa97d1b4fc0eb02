"""Continuous weak measurement of J_z under piecewise-constant random
transverse control, integrated as a stochastic Schroedinger equation.

Each time step applies the differential Kraus operator

    dK = 1 - i H dt - (1/8) kappa Jz^2 dt + (sqrt(kappa)/2) Jz dy,
    dy = sqrt(kappa) <Jz> dt + dW,

with H = Omega (cos(phi) Jx + sin(phi) Jy) and phi redrawn uniformly every
dwell interval.  The state is renormalized every step (dK preserves the
norm only to first order) and the running product of dK factors is kept
for the realized POVM element.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import KrausAccumulator, coherency, extract_polar, povm_element
from .sequential import MeasurementRecord, TrajectoryOutcome, _finish, haar_direction
from .spin import SpinSystem, as_direction, build_spin_system, spin_coherent_state
from .weak import MeasurementUnderflowError, UNDERFLOW_FLOOR


@dataclass
class ContinuousConfig:
    n_qubits: int
    kappa: float = 1.0
    dt: Optional[float] = None            # default: kappa*dt = 1e-3 / (8J)
    total_time: Optional[float] = None    # default: 1/kappa
    rabi_over_kappa: float = 20.0 * np.pi  # Omega/kappa, i.e. Omega/2pi = 10 kappa
    control_dwell: Optional[float] = None  # default: 1/(50 kappa)
    initial_direction: Optional[tuple] = None
    diagnostics_stride: int = 100
    seed: int = 0
    degenerate_policy: str = "random"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        j = self.n_qubits / 2.0
        if self.dt is None:
            if self.kappa == 0:
                raise ValueError("dt must be given explicitly when kappa = 0")
            self.dt = 1e-3 / (8.0 * j * self.kappa)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.total_time is None:
            if self.kappa == 0:
                raise ValueError("total_time must be given explicitly when kappa = 0")
            self.total_time = 1.0 / self.kappa
        if self.total_time < 0:
            raise ValueError("total_time must be >= 0")
        if self.control_dwell is None:
            self.control_dwell = 1.0 / (50.0 * self.kappa) if self.kappa > 0 \
                else self.total_time or self.dt
        if self.control_dwell <= 0:
            raise ValueError("control_dwell must be positive")
        if 0 < self.total_time < self.control_dwell:
            raise ValueError("total_time must be >= control_dwell (or zero)")
        if self.diagnostics_stride < 1:
            raise ValueError("diagnostics_stride must be >= 1")
        if self.degenerate_policy not in ("random", "error"):
            raise ValueError(f"unknown degenerate_policy {self.degenerate_policy!r}")
        if self.initial_direction is not None:
            self.initial_direction = tuple(as_direction(self.initial_direction))

    @property
    def n_steps(self) -> int:
        return int(round(self.total_time / self.dt))

    @property
    def dwell_steps(self) -> int:
        """Control dwell snapped to a whole number of dt steps."""
        return max(1, int(round(self.control_dwell / self.dt)))

    @property
    def dwell_snap_error(self) -> float:
        """Relative deviation of the snapped dwell from the requested one."""
        return abs(self.dwell_steps * self.dt - self.control_dwell) / self.control_dwell

    @property
    def omega(self) -> float:
        return self.rabi_over_kappa * self.kappa if self.kappa > 0 \
            else self.rabi_over_kappa


@dataclass
class ControlSchedule:
    """Piecewise-constant control azimuths, one per dwell interval."""

    angles: np.ndarray
    dwell_steps: int

    def angle_at_step(self, i: int) -> float:
        return float(self.angles[i // self.dwell_steps])


def draw_schedule(config: ContinuousConfig, rng: np.random.Generator) -> ControlSchedule:
    n_dwells = int(np.ceil(config.n_steps / config.dwell_steps)) if config.n_steps else 0
    return ControlSchedule(angles=rng.uniform(0.0, 2.0 * np.pi, n_dwells),
                           dwell_steps=config.dwell_steps)


def control_hamiltonian(sys: SpinSystem, phi: float, omega: float) -> np.ndarray:
    """Transverse control H = Omega (cos(phi) Jx + sin(phi) Jy)."""
    return omega * (np.cos(phi) * sys.jx + np.sin(phi) * sys.jy)


def differential_kraus(sys: SpinSystem, phi: float, dy: float,
                       config: ContinuousConfig) -> np.ndarray:
    """One-step operator dK for control angle phi and record increment dy."""
    kappa, dt = config.kappa, config.dt
    h = control_hamiltonian(sys, phi, config.omega)
    return (np.eye(sys.dim) - 1j * dt * h - (kappa * dt / 8.0) * (sys.jz @ sys.jz)
            + (np.sqrt(kappa) / 2.0 * dy) * sys.jz)


def sse_step(sys: SpinSystem, state: np.ndarray, phi: float,
             rng: np.random.Generator, config: ContinuousConfig):
    """Advance the state one dt: returns (new state, dy, dK)."""
    kappa, dt = config.kappa, config.dt
    ez = float(np.real(np.vdot(state, sys.jz @ state)))
    dw = rng.normal(0.0, np.sqrt(dt))
    dy = np.sqrt(kappa) * ez * dt + dw
    dk = differential_kraus(sys, phi, dy, config)
    new = dk @ state
    norm_sq = float(np.real(np.vdot(new, new)))
    if norm_sq < UNDERFLOW_FLOOR:
        raise MeasurementUnderflowError(f"state norm^2 = {norm_sq:g} underflowed")
    return new / np.sqrt(norm_sq), float(dy), dk


def _integrate(config: ContinuousConfig, schedule: ControlSchedule, n0, psi0,
               dys: Optional[np.ndarray], rng: Optional[np.random.Generator]):
    """Shared loop for fresh-noise runs (dys None) and record replay."""
    sys = build_spin_system(config.n_qubits)
    kappa, dt = config.kappa, config.dt
    n_steps = config.n_steps
    m = sys.m_values
    const_diag = 1.0 - (kappa * dt / 8.0) * m**2
    sqrt_dt = np.sqrt(dt)
    sqrt_k = np.sqrt(kappa)

    psi = psi0
    acc = KrausAccumulator.identity(sys.dim)
    out_dys = np.empty(n_steps)
    out_angles = np.empty(n_steps)
    times, cohs, alphas, residuals = [], [], [], []

    base = None
    current_dwell = -1
    for i in range(n_steps):
        dwell = i // schedule.dwell_steps
        if dwell != current_dwell:
            phi = float(schedule.angles[dwell])
            h = config.omega * (np.cos(phi) * sys.jx + np.sin(phi) * sys.jy)
            base = -1j * dt * h
            base[np.diag_indices_from(base)] += const_diag
            current_dwell = dwell

        if dys is None:
            ez = float(m @ (np.abs(psi) ** 2))
            dy = sqrt_k * ez * dt + rng.normal(0.0, sqrt_dt)
        else:
            dy = float(dys[i])

        dk = base.copy()
        dk[np.diag_indices_from(dk)] += (sqrt_k / 2.0 * dy) * m

        new = dk @ psi
        norm_sq = float(np.real(np.vdot(new, new)))
        if norm_sq < UNDERFLOW_FLOOR:
            raise MeasurementUnderflowError(f"state norm^2 = {norm_sq:g} underflowed")
        psi = new / np.sqrt(norm_sq)
        acc.accumulate(dk)
        out_dys[i] = dy
        out_angles[i] = phi

        if (i + 1) % config.diagnostics_stride == 0 or i + 1 == n_steps:
            e = povm_element(acc)
            polar = extract_polar(sys, e)
            times.append((i + 1) * dt * kappa)
            cohs.append(coherency(sys, e))
            alphas.append(polar.alpha)
            residuals.append(polar.fit_residual)

    if n_steps == 0:
        e = povm_element(acc)
        times, cohs = [0.0], [coherency(sys, e)]
        polar = extract_polar(sys, e)
        alphas, residuals = [polar.alpha], [polar.fit_residual]

    record = MeasurementRecord(outcomes=out_dys, angles=out_angles)
    metadata = {"dwell_steps": schedule.dwell_steps,
                "dwell_snap_error": config.dwell_snap_error,
                "final_state": psi}
    return sys, acc, record, metadata, (times, cohs, alphas, residuals)


def run_continuous(config: ContinuousConfig,
                   rng: Optional[np.random.Generator] = None) -> TrajectoryOutcome:
    """Simulate one continuous-measurement trajectory."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n0 = as_direction(config.initial_direction) if config.initial_direction is not None \
        else haar_direction(rng)
    sys = build_spin_system(config.n_qubits)
    psi0 = spin_coherent_state(sys, n0)
    schedule = draw_schedule(config, rng)
    sys, acc, record, metadata, series = _integrate(config, schedule, n0, psi0,
                                                    dys=None, rng=rng)
    return _finish(sys, config, rng, acc, record, n0, *series, metadata=metadata)


def replay_continuous(config: ContinuousConfig, record: MeasurementRecord,
                      initial_direction,
                      rng: Optional[np.random.Generator] = None) -> TrajectoryOutcome:
    """Re-integrate a stored record: same state evolution, no fresh noise.

    The dy sequence fully determines the trajectory, so the result must
    match the original run to solver precision.
    """
    if record.angles is None:
        raise ValueError("record does not carry control angles")
    n0 = as_direction(initial_direction)
    sys = build_spin_system(config.n_qubits)
    psi0 = spin_coherent_state(sys, n0)
    dwell_steps = config.dwell_steps
    angles = record.angles[::dwell_steps].copy()
    schedule = ControlSchedule(angles=angles, dwell_steps=dwell_steps)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    sys, acc, rec, metadata, series = _integrate(config, schedule, n0, psi0,
                                                 dys=record.outcomes, rng=None)
    return _finish(sys, config, rng, acc, rec, n0, *series, metadata=metadata)
