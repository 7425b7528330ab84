"""Input validation helpers shared across the package.

All public entry points funnel array-like inputs through these checks so
error messages are uniform and shape/finiteness contracts are enforced in
one place.
"""

from __future__ import annotations

import numpy as np

LATENT_DIM = 8
MODULE_COUNT = 48
PROJECTION_COUNT = 15
GRID_SIZE = 32
SETTINGS_LIMIT = 0.5


def as_float_vector(x, name: str, size: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 vector, optionally of fixed size."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise ValueError(f"{name} must have length {size}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


def as_latent_point(z, name: str = "z1") -> np.ndarray:
    """Validate a latent point in R^8."""
    return as_float_vector(z, name, LATENT_DIM)


def as_trajectory(points, name: str = "trajectory") -> np.ndarray:
    """Validate a latent trajectory: 48 module latents of dimension 8."""
    arr = np.asarray(points, dtype=float)
    if arr.shape != (MODULE_COUNT, LATENT_DIM):
        raise ValueError(
            f"{name} must have shape ({MODULE_COUNT}, {LATENT_DIM}), got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


def as_weights(w, name: str = "weights") -> np.ndarray:
    """Validate a per-module weight vector: non-negative, not all zero."""
    arr = as_float_vector(w, name, MODULE_COUNT)
    if np.any(arr < 0.0):
        raise ValueError(f"{name} must be non-negative")
    if not np.any(arr > 0.0):
        raise ValueError(f"{name} must not be all zero")
    return arr


def as_loss_vector(losses, name: str = "losses") -> np.ndarray:
    """Validate a per-module loss vector with entries in [0, 1]."""
    arr = as_float_vector(losses, name, MODULE_COUNT)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    return arr


def check_probability_grid(projections, name: str = "projections") -> np.ndarray:
    """Validate a stack of projections: (15, 32, 32) with entries in [0, 1]."""
    arr = np.asarray(projections, dtype=float)
    expected = (PROJECTION_COUNT, GRID_SIZE, GRID_SIZE)
    if arr.shape != expected:
        raise ValueError(f"{name} must have shape {expected}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} intensities must lie in [0, 1]")
    return arr
