"""Collective spin operators, rotations and spin-coherent states.

Everything lives in the Dicke basis of the symmetric subspace of N qubits,
ordered by decreasing projection M = J, J-1, ..., -J with J = N/2.  The
first basis vector is therefore the spin-coherent state along +z.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DiagonalizationError(RuntimeError):
    """Raised when the Hermitian eigensolver fails to converge."""


@dataclass(frozen=True)
class SpinSystem:
    """Collective spin operators for N qubits, dimension d = N + 1.

    The operator matrices are read-only; a SpinSystem can be shared freely
    across threads or processes.
    """

    n_qubits: int
    j: float
    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    m_values: np.ndarray = field(repr=False)  # J, J-1, ..., -J


def build_spin_system(n_qubits: int) -> SpinSystem:
    """Construct jx, jy, jz for ``n_qubits`` spin-1/2 particles.

    Uses the ladder-operator matrix elements sqrt(J(J+1) - M(M+1)).
    """
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    j = n_qubits / 2.0
    dim = n_qubits + 1
    m = j - np.arange(dim)  # descending J .. -J

    jp = np.zeros((dim, dim), dtype=complex)
    # <J,M+1| J+ |J,M> for M = J-1 .. -J; column index i holds M = m[i]
    for i in range(1, dim):
        jp[i - 1, i] = np.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    jm = jp.conj().T

    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    jz = np.diag(m.astype(complex))

    for a in (jx, jy, jz):
        a.setflags(write=False)
    mv = m.copy()
    mv.setflags(write=False)
    return SpinSystem(n_qubits=n_qubits, j=j, dim=dim, jx=jx, jy=jy, jz=jz,
                      m_values=mv)


def as_direction(u) -> np.ndarray:
    """Validate and normalize a 3-vector to a unit direction."""
    u = np.asarray(u, dtype=float)
    if u.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {u.shape}")
    norm = np.linalg.norm(u)
    if norm < 1e-12:
        raise ValueError("direction has (near-)zero norm")
    return u / norm


def normalize_state(psi: np.ndarray) -> np.ndarray:
    """Return psi scaled to unit 2-norm."""
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero state")
    return psi / norm


def spin_component(sys: SpinSystem, u) -> np.ndarray:
    """Spin component u . J along the unit direction u."""
    u = as_direction(u)
    return u[0] * sys.jx + u[1] * sys.jy + u[2] * sys.jz


def diagonalize_component(sys: SpinSystem, u):
    """Eigendecomposition of u . J.

    Returns (eigenvalues ascending, eigenvector matrix V) with
    V @ diag(w) @ V.conj().T == u . J.  The eigenvalues are -J .. J up to
    solver tolerance.
    """
    a = spin_component(sys, u)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise DiagonalizationError(f"eigh failed for spin component: {exc}") from exc
    return w, v


def spin_coherent_state(sys: SpinSystem, u) -> np.ndarray:
    """State |J,J> along u: the top eigenvector of u . J.

    The global phase is fixed by making the largest-magnitude amplitude
    real and positive.
    """
    _, v = diagonalize_component(sys, u)
    psi = v[:, -1]
    k = int(np.argmax(np.abs(psi)))
    phase = psi[k] / abs(psi[k])
    return normalize_state(psi / phase)


def expectation_spin(sys: SpinSystem, state: np.ndarray) -> np.ndarray:
    """Mean spin vector (<jx>, <jy>, <jz>) of a normalized pure state."""
    out = np.empty(3)
    for k, op in enumerate((sys.jx, sys.jy, sys.jz)):
        val = np.vdot(state, op @ state)
        if abs(val.imag) > 1e-10:
            raise ValueError(f"expectation value has imaginary part {val.imag:g}")
        out[k] = val.real
    return out


def rotation_unitary(sys: SpinSystem, axis, angle: float) -> np.ndarray:
    """Rotation representation exp(-i * angle * axis . J)."""
    w, v = diagonalize_component(sys, axis)
    return (v * np.exp(-1j * angle * w)) @ v.conj().T
