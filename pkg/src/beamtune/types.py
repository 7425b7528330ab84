"""Core value types shared by the surrogate, the synthetic system and the tuner."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import (
    MODULE_COUNT,
    as_float_vector,
    check_probability_grid,
)


@dataclass(frozen=True)
class BoundsBox:
    """Axis-aligned search box; lower[d] < upper[d] for every dimension."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = as_float_vector(self.lower, "lower")
        hi = as_float_vector(self.upper, "upper", lo.shape[0])
        if np.any(lo >= hi):
            raise ValueError("bounds require lower[d] < upper[d] in every dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return int(self.lower.shape[0])

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x, atol: float = 0.0) -> bool:
        arr = as_float_vector(x, "point", self.dim)
        return bool(np.all(arr >= self.lower - atol) and np.all(arr <= self.upper + atol))

    def clip(self, x) -> np.ndarray:
        arr = as_float_vector(x, "point", self.dim)
        return np.clip(arr, self.lower, self.upper)

    def sample(self, rng: np.random.Generator, count: int = 1) -> np.ndarray:
        """Draw ``count`` uniform points; shape (count, dim)."""
        u = rng.random((count, self.dim))
        return self.lower + u * self.width


def default_bounds(dim: int = 8, half_width: float = 1.0) -> BoundsBox:
    """The default symmetric search box [-1, 1]^8."""
    return BoundsBox(np.full(dim, -half_width), np.full(dim, half_width))


@dataclass(frozen=True)
class BeamState:
    """Diagnostic image stack of one beamline module.

    ``projections`` holds 15 two-dimensional views on a 32x32 grid with
    intensities in [0, 1]; ``module`` is the 1-based module index.
    """

    module: int
    projections: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not (1 <= int(self.module) <= MODULE_COUNT):
            raise ValueError(f"module must lie in 1..{MODULE_COUNT}, got {self.module}")
        object.__setattr__(self, "module", int(self.module))
        object.__setattr__(
            self, "projections", check_probability_grid(self.projections)
        )


# Label returned by the state classifier when no module prototype matches.
NON_PHYSICAL = None
