"""Deterministic seed derivation for multi-run experiments.

Every run of the tuner and of the baselines draws its randomness from a
single 64-bit seed derived from ``(base_seed, run_index)``.  The derivation
is fixed byte-for-byte so that result files are reproducible across
machines and so that paired-seed comparisons (same run index in two
methods) start from identical random streams.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One step of the SplitMix64 mixing function.

    Reference sequence (Steele, Lea & Flood): add the 64-bit golden-gamma
    constant, then xor-shift-multiply twice with the constants
    0xBF58476D1CE4E5B9 and 0x94D049BB133111EB, and finish with ``z ^ (z >> 31)``.
    All arithmetic is modulo 2**64.
    """
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_run_seed(base_seed: int, run_index: int) -> int:
    """Derive the 64-bit seed of run ``run_index`` from ``base_seed``.

    Defined exactly as::

        splitmix64(splitmix64(base_seed) ^ ((run_index + 1) * 0x9E3779B97F4A7C15 mod 2**64))

    so distinct run indices give statistically independent streams while the
    mapping stays trivial to reimplement.
    """
    if run_index < 0:
        raise ValueError(f"run_index must be non-negative, got {run_index}")
    inner = splitmix64(base_seed & _MASK64)
    return splitmix64(inner ^ (((run_index + 1) * _GOLDEN) & _MASK64))


def make_rng(seed: int) -> np.random.Generator:
    """Create the package-wide generator (PCG64) for a derived seed."""
    return np.random.default_rng(seed & _MASK64)
