"""Diagnostics on accumulated Kraus products and realized POVM elements.

The running product of thousands of sub-unity Kraus factors underflows
double precision, so products are stored as a unit-Frobenius matrix plus a
log scale.  Everything downstream (coherency, direction estimate, polar
extraction) is scale-invariant, so the dropped scalar never matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin import SpinSystem, as_direction, expectation_spin, spin_coherent_state

# Relative floor applied to POVM-element eigenvalues before taking logs;
# below ~1e-16 of the top eigenvalue eigh output is numerical noise.
EIGENVALUE_CLAMP = 1e-15

# Eigenvalues may dip this far below zero from round-off and still count
# as positive semidefinite.
PSD_TOLERANCE = 1e-12


class DegenerateEstimateError(RuntimeError):
    """The element carries no mean-spin direction to estimate from."""


@dataclass
class KrausAccumulator:
    """Running Kraus product K = exp(log_scale) * matrix, with ``matrix``
    kept at unit Frobenius norm."""

    matrix: np.ndarray
    log_scale: float = 0.0

    @classmethod
    def identity(cls, dim: int) -> "KrausAccumulator":
        return cls(matrix=np.eye(dim, dtype=complex), log_scale=0.0)

    def accumulate(self, step: np.ndarray) -> "KrausAccumulator":
        """Left-multiply by one step operator and renormalize in place."""
        m = step @ self.matrix
        scale = np.linalg.norm(m)
        if scale == 0.0 or not np.isfinite(scale):
            raise FloatingPointError(f"accumulator norm became {scale!r}")
        self.matrix = m / scale
        self.log_scale += float(np.log(scale))
        return self

    def copy(self) -> "KrausAccumulator":
        return KrausAccumulator(matrix=self.matrix.copy(), log_scale=self.log_scale)


def povm_element(acc: KrausAccumulator) -> np.ndarray:
    """Trace-one POVM element K^dag K / Tr(K^dag K) of the accumulated product."""
    e = acc.matrix.conj().T @ acc.matrix
    e = 0.5 * (e + e.conj().T)
    return e / np.trace(e).real


def _spin_trace_vector(sys: SpinSystem, e: np.ndarray) -> np.ndarray:
    """(Tr(jx E), Tr(jy E), Tr(jz E)) as a real 3-vector."""
    return np.array([np.trace(op @ e).real for op in (sys.jx, sys.jy, sys.jz)])


def coherency(sys: SpinSystem, e: np.ndarray) -> float:
    """Scale-invariant rank-1-ness score |Tr(J E)|^2 / (J Tr E)^2 in [0, 1].

    Equals 1 exactly when E is proportional to a spin-coherent-state
    projector, and 0 when E carries no mean spin.
    """
    tr = np.trace(e).real
    vec = _spin_trace_vector(sys, e)
    return float(vec @ vec) / (sys.j**2 * tr**2)


def estimate_direction(sys: SpinSystem, e: np.ndarray) -> np.ndarray:
    """Direction maximizing the average assignment fidelity: Tr(E J) normalized.

    Raises DegenerateEstimateError when the mean spin of E vanishes; callers
    doing ensemble statistics typically substitute a uniform random direction.
    """
    vec = _spin_trace_vector(sys, e)
    norm = np.linalg.norm(vec)
    if norm <= 1e-12:
        raise DegenerateEstimateError("Tr(E J) vanishes; no direction estimate")
    return vec / norm


def qubit_fidelity(n0, n_hat) -> float:
    """Pure-qubit fidelity between Bloch directions: (1 + n0 . n_hat) / 2."""
    return 0.5 * (1.0 + float(np.dot(as_direction(n0), as_direction(n_hat))))


@dataclass(frozen=True)
class PolarExtract:
    """Exponential-of-spin fit E ~ exp(2 alpha n . J): magnitude, axis and
    RMS deviation of the log-spectrum from linearity in M."""

    alpha: float
    axis: np.ndarray
    fit_residual: float


def extract_polar(sys: SpinSystem, e: np.ndarray) -> PolarExtract:
    """Fit a positive matrix to the form exp(2 alpha n . J).

    The log-eigenvalues are regressed linearly against M = -J..J; alpha is
    half the slope and the axis is the mean-spin direction of the top
    eigenvector.  The residual reports how far E is from the exponential
    family (it grows once the small eigenvalues underflow double precision).
    """
    w, v = np.linalg.eigh(e)
    top = w[-1]
    if top <= 0:
        raise ValueError("matrix has no positive eigenvalue")
    if w[0] < -PSD_TOLERANCE * top:
        raise ValueError(f"eigenvalue {w[0]:g} is negative beyond tolerance")
    w = np.maximum(w, EIGENVALUE_CLAMP * top)

    m_asc = sys.m_values[::-1]  # -J .. J, matching eigh's ascending order
    logs = np.log(w)
    slope, intercept = np.polyfit(m_asc, logs, 1)
    residual = float(np.sqrt(np.mean((logs - (slope * m_asc + intercept)) ** 2)))

    mean_spin = expectation_spin(sys, v[:, -1])
    norm = np.linalg.norm(mean_spin)
    if norm < 1e-12 * sys.j:
        axis = np.array([0.0, 0.0, 1.0])  # direction-free spectrum; arbitrary
    else:
        axis = mean_spin / norm
    return PolarExtract(alpha=float(slope) / 2.0, axis=axis, fit_residual=residual)


def coherency_from_alpha(n_qubits: int, alpha: float) -> float:
    """Closed-form coherency of an element with spectrum exp(2 alpha M).

    Evaluates
        C = (1 - (1/J) sum_{m=1..N} e^{-2 alpha m}
                 (1 - e^{-(N+1-m) 2 alpha}) / (1 - e^{-(N+1) 2 alpha}))^2,
    with the alpha -> 0 limit handled explicitly (the ratio is 0/0 there).
    For large alpha this approaches 1 - 2 / (e^{2 alpha} (N + 1)).
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0.0:
        return 0.0
    n = n_qubits
    j = n / 2.0
    m = np.arange(1, n + 1, dtype=float)
    denom = -np.expm1(-(n + 1) * 2.0 * alpha)
    terms = np.exp(-2.0 * alpha * m) * (-np.expm1(-(n + 1 - m) * 2.0 * alpha)) / denom
    return float((1.0 - terms.sum() / j) ** 2)


def scs_resolution_check(sys: SpinSystem, n_grid=(50, 100)) -> float:
    """Quadrature check that SCS projectors resolve the identity.

    Integrates (2J+1)/(4pi) |SCS(n)><SCS(n)| over the sphere on a product
    grid of Gauss-Legendre nodes in cos(theta) times a uniform azimuthal
    grid, and returns the max-abs deviation from the identity.  The caller
    decides whether the grid was fine enough for the returned deviation.
    """
    n_polar, n_azimuth = n_grid
    if n_polar < 1 or n_azimuth < 1:
        raise ValueError("grid sizes must be positive")
    nodes, weights = np.polynomial.legendre.leggauss(n_polar)
    phis = 2 * np.pi * np.arange(n_azimuth) / n_azimuth

    total = np.zeros((sys.dim, sys.dim), dtype=complex)
    prefactor = (2 * sys.j + 1) / (4 * np.pi) * (2 * np.pi / n_azimuth)
    for z, wt in zip(nodes, weights):
        s = np.sqrt(1.0 - z * z)
        for phi in phis:
            u = np.array([s * np.cos(phi), s * np.sin(phi), z])
            psi = spin_coherent_state(sys, u)
            total += (wt * prefactor) * np.outer(psi, psi.conj())
    return float(np.max(np.abs(total - np.eye(sys.dim))))
