"""Deterministic per-task seed derivation for parallel Monte Carlo runs."""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, index: int) -> int:
    """Mix (master_seed, index) into a 64-bit stream seed.

    Packs the low 32 bits of each argument into one word and applies the
    SplitMix64 finalizer, which is bijective on 64-bit integers, so seeds
    are injective over indices < 2**32 for a fixed master seed.  Pure
    integer arithmetic: stable across platforms and versions.
    """
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    z = ((master_seed & 0xFFFFFFFF) << 32) | (index & 0xFFFFFFFF)
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)
