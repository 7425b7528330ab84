"""Weighted beam-loss objective over decoded trajectories.

Per-module loss is the normalized intensity deficit of the energy-phase
projection (index 11, 1-based): ``L = clamp(1 - S / reference, 0, 1)`` where
``S`` sums all pixels of that projection.  The tuning objective is the dot
product of the per-module losses with a non-negative weight vector; the
default weight vector is zero everywhere except the final module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .types import BeamState
from .validation import (
    MODULE_COUNT,
    as_latent_point,
    as_loss_vector,
    as_weights,
)

__all__ = [
    "LOSS_PROJECTION",
    "Evaluation",
    "batched_total_loss",
    "module_beam_loss",
    "objective_eval",
    "step_weights",
    "total_beam_loss",
]

# 1-based index of the projection whose intensity sum defines survival.
LOSS_PROJECTION = 11


def module_beam_loss(state: BeamState, reference_intensity: float) -> float:
    """Normalized beam loss of one module state, clamped to [0, 1]."""
    reference = float(reference_intensity)
    if not reference > 0.0:
        raise ValueError("reference_intensity must be positive")
    survival = float(state.projections[LOSS_PROJECTION - 1].sum())
    return float(np.clip(1.0 - survival / reference, 0.0, 1.0))


def total_beam_loss(losses, weights) -> float:
    """Weighted sum of per-module losses.

    Accumulated in module order over the nonzero weights, which is the same
    order the batched evaluator uses, so the two agree bitwise for any
    weight vector.
    """
    losses = as_loss_vector(losses)
    weights = as_weights(weights)
    total = 0.0
    for m in np.nonzero(weights)[0]:
        total += weights[m] * losses[m]
    return float(total)


def step_weights() -> np.ndarray:
    """Weight vector selecting only the final module."""
    w = np.zeros(MODULE_COUNT)
    w[-1] = 1.0
    return w


@dataclass(frozen=True)
class Evaluation:
    """Everything produced by one objective evaluation, for history storage."""

    total_loss: float
    trajectory: np.ndarray
    states: list[BeamState]
    settings: np.ndarray
    losses: np.ndarray


def objective_eval(z1, system, weights, reference_intensity: float) -> Evaluation:
    """Forecast, decode, estimate and score one candidate latent point."""
    z1 = as_latent_point(z1)
    weights = as_weights(weights)
    trajectory = system.forecast(z1)
    states = system.decode(trajectory)
    settings = system.estimate(trajectory)
    losses = np.array(
        [module_beam_loss(state, reference_intensity) for state in states]
    )
    total = total_beam_loss(losses, weights)
    return Evaluation(
        total_loss=total,
        trajectory=trajectory,
        states=states,
        settings=settings,
        losses=losses,
    )


def batched_total_loss(system, Z, weights, reference_intensity: float) -> np.ndarray:
    """Total beam loss for a latent batch, rendering only what the weights need.

    Bitwise-identical to composing :func:`objective_eval` point by point:
    modules with zero weight contribute exactly zero, so their projections
    are never rendered.  With the default step weights this costs a single
    projection render per point, which keeps dense grid oracles fast.
    """
    weights = as_weights(weights)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    reference = float(reference_intensity)
    if not reference > 0.0:
        raise ValueError("reference_intensity must be positive")
    total = np.zeros(Z.shape[0])
    for m in np.nonzero(weights)[0]:
        traj_m = system.rollout_batch(m + 1, Z)
        images = system.render_batch(m + 1, LOSS_PROJECTION, traj_m)
        survival = images.sum(axis=(1, 2))
        total += weights[m] * np.clip(1.0 - survival / reference, 0.0, 1.0)
    return total
