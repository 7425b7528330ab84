"""Classifier-pruned Bayesian optimization loop over the injected latent point.

One run: draw ``initial_design`` uniform points, evaluate them, then for the
remaining budget fit the GP surrogate to the negated total loss of every
evaluated point, propose the expected-improvement maximizer, evaluate it,
and classify the decoded trajectory.  Every evaluation feeds the surrogate;
classification only decides membership in the physical history ``pruned``,
whose loss minimizer is the run's ``best``.  Runs are deterministic given
``(seed, run_index)`` via the documented seed-split in :mod:`beamtune.rng`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .acquisition import AcquisitionConfig, propose_next
from .gp import GaussianProcessSurrogate, heuristic_kernel_params
from .objective import Evaluation, objective_eval, step_weights
from .rng import derive_run_seed, make_rng
from .types import BoundsBox, default_bounds
from .validation import as_weights

__all__ = [
    "HistoryEntry",
    "RunResult",
    "TunerConfig",
    "cbol_tune",
    "default_objective",
    "multi_run",
    "sample_initial",
]


@dataclass(frozen=True)
class TunerConfig:
    """Budget, acquisition and seeding knobs for one experiment."""

    iterations: int = 1000
    runs: int = 10
    xi: float = 0.1
    bounds: BoundsBox = field(default_factory=default_bounds)
    weights: np.ndarray = field(default_factory=step_weights)
    candidate_count: int = 1024
    refine_steps: int = 24
    initial_design: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 1 <= self.initial_design <= self.iterations:
            raise ValueError("initial_design must be in [1, iterations]")
        if self.candidate_count < 1:
            raise ValueError("candidate_count must be >= 1")
        if self.refine_steps < 0:
            raise ValueError("refine_steps must be >= 0")
        if not np.isfinite(self.xi) or self.xi < 0:
            raise ValueError("xi must be finite and >= 0")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        object.__setattr__(self, "weights", as_weights(self.weights))

    def acquisition(self) -> AcquisitionConfig:
        return AcquisitionConfig(
            xi=self.xi,
            candidate_count=self.candidate_count,
            refine_steps=self.refine_steps,
        )


@dataclass(frozen=True)
class HistoryEntry:
    """One evaluated candidate with everything needed to audit the run."""

    iteration: int
    z1: np.ndarray
    trajectory: np.ndarray
    settings: np.ndarray
    losses: np.ndarray
    total_loss: float
    passed_classifier: bool


@dataclass(frozen=True)
class RunResult:
    """Outcome of one run; schema shared by the tuner and both baselines."""

    run_index: int
    seed: int
    all_entries: list
    pruned: list
    best: Optional[HistoryEntry]
    gp_observations: int

    def best_loss(self) -> float:
        """Loss of the best physical entry; NaN when everything was pruned."""
        return self.best.total_loss if self.best is not None else float("nan")


def sample_initial(bounds: BoundsBox, rng: np.random.Generator) -> np.ndarray:
    """One uniform draw in the box; the conditional latent sampler stand-in."""
    return bounds.sample(rng, 1)[0]


def default_objective(
    system, weights, reference_intensity: Optional[float] = None
) -> Callable[[np.ndarray], Evaluation]:
    """Objective closure evaluating the synthetic system end to end."""
    weights = as_weights(weights)
    if reference_intensity is None:
        reference_intensity = system.payload["objective"]["reference_intensity"]
    reference = float(reference_intensity)

    def evaluate(z1) -> Evaluation:
        return objective_eval(z1, system, weights, reference)

    return evaluate


def _record(
    z1: np.ndarray,
    iteration: int,
    objective: Callable[[np.ndarray], Evaluation],
    system,
    entries: list,
    pruned: list,
) -> Evaluation:
    evaluation = objective(z1)
    passed = bool(system.trajectory_passes(evaluation.states))
    entry = HistoryEntry(
        iteration=iteration,
        z1=np.array(z1, dtype=float),
        trajectory=evaluation.trajectory,
        settings=evaluation.settings,
        losses=evaluation.losses,
        total_loss=float(evaluation.total_loss),
        passed_classifier=passed,
    )
    entries.append(entry)
    if passed:
        pruned.append(entry)
    return evaluation


def _finish(run_index: int, run_seed: int, entries, pruned, gp_observations) -> RunResult:
    best = None
    if pruned:
        best = min(pruned, key=lambda e: e.total_loss)
    return RunResult(
        run_index=run_index,
        seed=run_seed,
        all_entries=entries,
        pruned=pruned,
        best=best,
        gp_observations=gp_observations,
    )


def cbol_tune(
    cfg: TunerConfig,
    run_index: int,
    system,
    objective: Optional[Callable[[np.ndarray], Evaluation]] = None,
) -> RunResult:
    """One Bayesian-optimization run with classifier pruning."""
    if objective is None:
        objective = default_objective(system, cfg.weights)
    run_seed = derive_run_seed(cfg.seed, run_index)
    rng = make_rng(run_seed)
    bounds = cfg.bounds
    acq = cfg.acquisition()

    entries: list = []
    pruned: list = []
    X = np.empty((cfg.iterations, bounds.dim))
    y = np.empty(cfg.iterations)

    for i in range(cfg.initial_design):
        z1 = sample_initial(bounds, rng)
        evaluation = _record(z1, i, objective, system, entries, pruned)
        X[i] = z1
        y[i] = -evaluation.total_loss

    for i in range(cfg.initial_design, cfg.iterations):
        params = heuristic_kernel_params(bounds.lower, bounds.upper, y[:i])
        model = GaussianProcessSurrogate(
            signal_variance=params.signal_variance,
            length_scales=params.length_scales,
            noise_variance=params.noise_variance,
        ).fit(X[:i], y[:i])
        z1 = propose_next(model, bounds, acq, rng)
        evaluation = _record(z1, i, objective, system, entries, pruned)
        X[i] = z1
        y[i] = -evaluation.total_loss

    return _finish(run_index, run_seed, entries, pruned, cfg.iterations)


def multi_run(
    cfg: TunerConfig,
    system,
    objective: Optional[Callable[[np.ndarray], Evaluation]] = None,
    search: Optional[Callable[..., RunResult]] = None,
) -> list:
    """Independent runs 0..runs-1; each gets its own derived seed."""
    if search is None:
        search = cbol_tune
    return [search(cfg, i, system, objective) for i in range(cfg.runs)]
