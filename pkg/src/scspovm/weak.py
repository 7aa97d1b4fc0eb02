"""Single weak collective-spin measurement: Kraus kernel, Born-rule
outcome sampling, and conditional state update.

A weak measurement of J_u with strength kappa*dt and real outcome m is
generated by the Gaussian kernel

    K_u(m) = (kappa_dt / 2 pi)^(1/4) * exp(-(kappa_dt / 4) (J_u - m)^2),

which is diagonal in the J_u eigenbasis.  The outcome density is an
equal-variance Gaussian mixture centered on the eigenvalues M with weights
given by the state's populations in that basis, so it can be sampled
exactly in two stages (categorical over M, then normal).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .spin import SpinSystem, diagonalize_component, normalize_state

# Below this squared norm the conditional update is considered to have hit
# an impossible outcome numerically.
UNDERFLOW_FLOOR = 1e-300

# kappa*dt above this leaves the weak-coupling regime; we warn, not error.
WEAKNESS_THRESHOLD = 1e-2


class MeasurementUnderflowError(RuntimeError):
    """Post-measurement norm underflowed: outcome numerically impossible."""


@dataclass(frozen=True)
class WeakMeasSettings:
    """Dimensionless measurement strength kappa_dt = kappa * delta_t."""

    kappa_dt: float

    def __post_init__(self):
        if not self.kappa_dt > 0:
            raise ValueError(f"kappa_dt must be positive, got {self.kappa_dt}")
        if self.kappa_dt > WEAKNESS_THRESHOLD:
            warnings.warn(
                f"kappa_dt = {self.kappa_dt:g} is outside the weak regime "
                f"(> {WEAKNESS_THRESHOLD:g})",
                stacklevel=2,
            )


@dataclass(frozen=True)
class OutcomeMixture:
    """Gaussian-mixture outcome density: weights over centers M = J..-J,
    all components sharing variance 1/kappa_dt."""

    weights: np.ndarray
    centers: np.ndarray
    variance: float

    def __post_init__(self):
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")

    def density(self, m) -> np.ndarray:
        """Probability density of outcomes m (scalar or array)."""
        m = np.atleast_1d(np.asarray(m, dtype=float))
        z = (m[:, None] - self.centers[None, :]) ** 2
        g = np.exp(-z / (2 * self.variance)) / np.sqrt(2 * np.pi * self.variance)
        out = g @ self.weights
        return out if out.size > 1 else float(out[0])


def kraus_operator(sys: SpinSystem, u, m: float, settings: WeakMeasSettings) -> np.ndarray:
    """Dense weak-measurement operator for direction u and outcome m."""
    kdt = settings.kappa_dt
    w, v = diagonalize_component(sys, u)
    g = (kdt / (2 * np.pi)) ** 0.25 * np.exp(-0.25 * kdt * (w - m) ** 2)
    return (v * g) @ v.conj().T


def outcome_mixture(sys: SpinSystem, state: np.ndarray, u,
                    settings: WeakMeasSettings, decomp=None) -> OutcomeMixture:
    """Born-rule outcome density of measuring J_u on ``state``.

    ``decomp`` may carry a precomputed ``diagonalize_component`` result to
    avoid repeating the eigensolve when the direction is reused.
    """
    if decomp is None:
        decomp = diagonalize_component(sys, u)
    _, v = decomp
    amps = v.conj().T @ state
    weights = np.abs(amps) ** 2
    weights /= weights.sum()
    # eigh orders ascending, i.e. M = -J..J; flip to the Dicke convention
    return OutcomeMixture(weights=weights[::-1].copy(),
                          centers=sys.m_values.copy(),
                          variance=1.0 / settings.kappa_dt)


def pick_center(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF categorical draw over ``weights`` (need not be normalized)."""
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, weights.size - 1)


def sample_outcome(mixture: OutcomeMixture, rng: np.random.Generator) -> float:
    """Draw one outcome m: pick a center by weight, then add Gaussian noise."""
    idx = pick_center(mixture.weights, rng)
    return float(rng.normal(mixture.centers[idx], np.sqrt(mixture.variance)))


def apply_measurement(sys: SpinSystem, state: np.ndarray, u, m: float,
                      settings: WeakMeasSettings, decomp=None):
    """Conditional state update for outcome m.

    Returns (normalized post-measurement state, squared norm of the
    unnormalized update).  The Gaussian prefactor of the kernel is omitted,
    so the returned norm is the Born density up to (kappa_dt/2pi)^(1/2).
    """
    kdt = settings.kappa_dt
    if decomp is None:
        decomp = diagonalize_component(sys, u)
    w, v = decomp
    amps = v.conj().T @ state
    amps *= np.exp(-0.25 * kdt * (w - m) ** 2)
    norm_sq = float(np.real(np.vdot(amps, amps)))
    if norm_sq < UNDERFLOW_FLOOR:
        raise MeasurementUnderflowError(
            f"post-measurement norm^2 = {norm_sq:g} underflowed for m = {m:g}")
    return normalize_state(v @ amps), norm_sq
