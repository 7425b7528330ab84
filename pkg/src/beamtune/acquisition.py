"""Expected-improvement acquisition and its seeded multi-start maximizer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .gp import GaussianProcessSurrogate
from .types import BoundsBox

__all__ = [
    "AcquisitionConfig",
    "expected_improvement",
    "propose_next",
    "std_normal_cdf",
    "std_normal_pdf",
]

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)
_INV_SQRT_2 = 1.0 / np.sqrt(2.0)


def std_normal_pdf(x):
    """Standard normal density, elementwise."""
    x = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return float(out) if out.ndim == 0 else out


def std_normal_cdf(x):
    """Standard normal CDF via the error function: 0.5 * (1 + erf(x / sqrt 2))."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * (1.0 + erf(x * _INV_SQRT_2))
    return float(out) if out.ndim == 0 else out


def expected_improvement(mean, std, best: float, xi: float = 0.0):
    """Expected improvement of a Gaussian belief over the incumbent ``best``.

    For a posterior N(mean, std^2) and exploration margin ``xi``::

        EI = (mean - best - xi) * cdf(u) + std * pdf(u),  u = (mean - best - xi) / std

    and exactly 0 where ``std == 0``.  Elementwise over ``mean``/``std``.

    Raises
    ------
    ValueError
        If any ``std`` is negative or ``xi`` is negative.
    """
    if xi < 0.0:
        raise ValueError(f"xi must be non-negative, got {xi}")
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    if np.any(std < 0.0):
        raise ValueError("std must be non-negative")
    scalar = mean.ndim == 0 and std.ndim == 0
    mean, std = np.atleast_1d(mean), np.atleast_1d(std)
    mean, std = np.broadcast_arrays(mean, std)

    improvement = mean - best - xi
    out = np.zeros(improvement.shape, dtype=float)
    active = std > 0.0
    if np.any(active):
        u = improvement[active] / std[active]
        value = improvement[active] * std_normal_cdf(u) + std[active] * std_normal_pdf(u)
        out[active] = np.maximum(value, 0.0)
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class AcquisitionConfig:
    """Settings of the seeded acquisition maximizer.

    ``candidate_count`` uniform candidates are scored in one batch; the best
    one is then refined by ``refine_steps`` single-coordinate perturbations
    (scale 1% of the box width, kept only on improvement, clipped to bounds).
    """

    xi: float = 0.1
    candidate_count: int = 1024
    refine_steps: int = 24

    def __post_init__(self) -> None:
        if not np.isfinite(self.xi) or self.xi < 0.0:
            raise ValueError(f"xi must be finite and non-negative, got {self.xi}")
        if self.candidate_count < 1:
            raise ValueError(f"candidate_count must be >= 1, got {self.candidate_count}")
        if self.refine_steps < 0:
            raise ValueError(f"refine_steps must be >= 0, got {self.refine_steps}")


def propose_next(
    model: GaussianProcessSurrogate,
    bounds: BoundsBox,
    config: AcquisitionConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Pick the next query point by maximizing expected improvement.

    The incumbent is the best (largest) target stored in the fitted model.
    Randomness is consumed in a fixed order (the full candidate batch
    first, then one coordinate index and one Gaussian step per refinement)
    so results are bit-reproducible for a given generator state.  Among
    equal EI scores the first-scanned candidate wins.
    """
    if bounds.dim != model.params_.dim:
        raise ValueError(
            f"bounds dimension {bounds.dim} does not match model dimension {model.params_.dim}"
        )
    best = float(np.max(model.y_train_))

    def score(points: np.ndarray) -> np.ndarray:
        mean, var = model.predict(points, return_var=True)
        return expected_improvement(mean, np.sqrt(var), best, config.xi)

    candidates = bounds.sample(rng, config.candidate_count)
    ei = score(candidates)
    idx = int(np.argmax(ei))
    incumbent = candidates[idx].copy()
    incumbent_ei = float(ei[idx])

    step_scale = 0.01 * bounds.width
    for _ in range(config.refine_steps):
        d = int(rng.integers(bounds.dim))
        delta = rng.normal(0.0, step_scale[d])
        trial = incumbent.copy()
        trial[d] = min(max(trial[d] + delta, bounds.lower[d]), bounds.upper[d])
        trial_ei = float(score(trial[None, :])[0])
        if trial_ei > incumbent_ei:
            incumbent, incumbent_ei = trial, trial_ei
    return incumbent
