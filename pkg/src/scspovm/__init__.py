"""Monte Carlo unraveling of the spin-coherent-state POVM.

Simulates sequential and continuous weak collective-spin measurements on
N qubit copies, tracks the realized POVM elements, and scores the direction
estimates against the optimal pure-qubit tomography bound.
"""

from .spin import (
    SpinSystem,
    build_spin_system,
    as_direction,
    spin_component,
    diagonalize_component,
    spin_coherent_state,
    expectation_spin,
    rotation_unitary,
)
from .weak import WeakMeasSettings, kraus_operator, outcome_mixture, sample_outcome, apply_measurement
from .analysis import (
    KrausAccumulator,
    povm_element,
    coherency,
    estimate_direction,
    qubit_fidelity,
    extract_polar,
    coherency_from_alpha,
    scs_resolution_check,
)
from .sequential import SequentialConfig, TrajectoryOutcome, haar_direction, run_sequential, run_fixed_direction
from .continuous import ContinuousConfig, run_continuous, replay_continuous
from .krauspath import PathConfig, run_paths, grouped_isotropy_check

__all__ = [
    "SpinSystem",
    "build_spin_system",
    "as_direction",
    "spin_component",
    "diagonalize_component",
    "spin_coherent_state",
    "expectation_spin",
    "rotation_unitary",
    "WeakMeasSettings",
    "kraus_operator",
    "outcome_mixture",
    "sample_outcome",
    "apply_measurement",
    "KrausAccumulator",
    "povm_element",
    "coherency",
    "estimate_direction",
    "qubit_fidelity",
    "extract_polar",
    "coherency_from_alpha",
    "scs_resolution_check",
    "SequentialConfig",
    "TrajectoryOutcome",
    "haar_direction",
    "run_sequential",
    "run_fixed_direction",
    "ContinuousConfig",
    "run_continuous",
    "replay_continuous",
    "PathConfig",
    "run_paths",
    "grouped_isotropy_check",
]
