"""Classifier-pruned baselines: random search and finite-difference Adam.

Both baselines share the tuner's run-result schema and pruning semantics so
one comparator handles every method, and both respect the evaluation budget
exactly: ``len(all_entries) == iterations``, with the gradient baseline's
finite-difference probes each counting as one evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .objective import Evaluation, step_weights
from .rng import derive_run_seed, make_rng
from .tuner import RunResult, _finish, _record, default_objective, sample_initial
from .types import BoundsBox, default_bounds
from .validation import as_weights

__all__ = [
    "BaselineConfig",
    "gradient_search",
    "random_search",
]


@dataclass(frozen=True)
class BaselineConfig:
    """Budget fields shared with the tuner plus the Adam knobs."""

    iterations: int = 1000
    runs: int = 10
    bounds: BoundsBox = field(default_factory=default_bounds)
    weights: np.ndarray = field(default_factory=step_weights)
    seed: int = 0
    step_size: float = 0.05
    fd_epsilon: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not self.fd_epsilon > 0:
            raise ValueError("fd_epsilon must be positive")
        if not 0 <= self.adam_beta1 < 1 or not 0 <= self.adam_beta2 < 1:
            raise ValueError("adam betas must lie in [0, 1)")
        if not self.adam_eps > 0:
            raise ValueError("adam_eps must be positive")
        object.__setattr__(self, "weights", as_weights(self.weights))


def random_search(
    cfg: BaselineConfig,
    run_index: int,
    system,
    objective: Optional[Callable[[np.ndarray], Evaluation]] = None,
) -> RunResult:
    """Exploration-only baseline: independent uniform draws, same pruning."""
    if objective is None:
        objective = default_objective(system, cfg.weights)
    run_seed = derive_run_seed(cfg.seed, run_index)
    rng = make_rng(run_seed)
    entries: list = []
    pruned: list = []
    for i in range(cfg.iterations):
        z1 = sample_initial(cfg.bounds, rng)
        _record(z1, i, objective, system, entries, pruned)
    return _finish(run_index, run_seed, entries, pruned, 0)


def gradient_search(
    cfg: BaselineConfig,
    run_index: int,
    system,
    objective: Optional[Callable[[np.ndarray], Evaluation]] = None,
    initial: Optional[np.ndarray] = None,
) -> RunResult:
    """Adam on central finite differences of the total loss.

    Budget layout: entry 0 evaluates the start point (uniformly sampled
    unless ``initial`` is given); each subsequent Adam step spends 16 probe
    evaluations (x +- eps e_d, probes left unclipped) followed by 1
    evaluation of the clipped new iterate.  When the remaining budget
    cannot fit a full step, it is spent on probes in coordinate order and
    no further update happens, so the evaluation count always equals
    ``iterations`` exactly.
    """
    if objective is None:
        objective = default_objective(system, cfg.weights)
    run_seed = derive_run_seed(cfg.seed, run_index)
    rng = make_rng(run_seed)
    bounds = cfg.bounds
    dim = bounds.dim
    entries: list = []
    pruned: list = []

    if initial is None:
        x = sample_initial(bounds, rng)
    else:
        x = np.asarray(initial, dtype=float).copy()
        if x.shape != (dim,):
            raise ValueError(f"initial point must have shape ({dim},), got {x.shape}")
    _record(x, 0, objective, system, entries, pruned)
    spent = 1

    m = np.zeros(dim)
    v = np.zeros(dim)
    t = 0
    while spent < cfg.iterations:
        grad = np.zeros(dim)
        full_step = cfg.iterations - spent >= 2 * dim + 1
        for d in range(dim):
            if spent >= cfg.iterations:
                break
            plus = x.copy()
            plus[d] += cfg.fd_epsilon
            ev_plus = _record(plus, spent, objective, system, entries, pruned)
            spent += 1
            if spent >= cfg.iterations:
                break
            minus = x.copy()
            minus[d] -= cfg.fd_epsilon
            ev_minus = _record(minus, spent, objective, system, entries, pruned)
            spent += 1
            grad[d] = (ev_plus.total_loss - ev_minus.total_loss) / (2 * cfg.fd_epsilon)
        if not full_step or spent >= cfg.iterations:
            break
        t += 1
        m = cfg.adam_beta1 * m + (1 - cfg.adam_beta1) * grad
        v = cfg.adam_beta2 * v + (1 - cfg.adam_beta2) * grad * grad
        m_hat = m / (1 - cfg.adam_beta1**t)
        v_hat = v / (1 - cfg.adam_beta2**t)
        x = bounds.clip(x - cfg.step_size * m_hat / (np.sqrt(v_hat) + cfg.adam_eps))
        _record(x, spent, objective, system, entries, pruned)
        spent += 1

    return _finish(run_index, run_seed, entries, pruned, 0)
