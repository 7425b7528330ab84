"""Strict TOML experiment configuration.

Four sections are recognized: ``[bounds]``, ``[tuner]``, ``[system]`` and
``[objective]``.  Every key is optional with the library defaults below,
but unknown sections or keys are rejected outright so typos never pass
silently.  Gradient-baseline knobs live in ``[tuner]`` alongside the
budget they share with the other methods.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import BaselineConfig
from .objective import step_weights
from .tuner import TunerConfig
from .types import BoundsBox, default_bounds
from .validation import MODULE_COUNT, as_weights

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["AppConfig", "load_config", "parse_config"]

_TUNER_KEYS = {
    "iterations": int,
    "runs": int,
    "xi": float,
    "candidate_count": int,
    "refine_steps": int,
    "initial_design": int,
    "seed": int,
    "step_size": float,
    "fd_epsilon": float,
    "adam_beta1": float,
    "adam_beta2": float,
    "adam_eps": float,
}


@dataclass(frozen=True)
class AppConfig:
    """Resolved experiment configuration shared by every CLI subcommand."""

    bounds: BoundsBox = field(default_factory=default_bounds)
    iterations: int = 1000
    runs: int = 10
    xi: float = 0.1
    candidate_count: int = 1024
    refine_steps: int = 24
    initial_design: int = 8
    seed: int = 0
    step_size: float = 0.05
    fd_epsilon: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    asset_path: Optional[str] = None
    weights: np.ndarray = field(default_factory=step_weights)
    reference_intensity: Optional[float] = None

    def tuner_config(self) -> TunerConfig:
        return TunerConfig(
            iterations=self.iterations,
            runs=self.runs,
            xi=self.xi,
            bounds=self.bounds,
            weights=self.weights,
            candidate_count=self.candidate_count,
            refine_steps=self.refine_steps,
            initial_design=self.initial_design,
            seed=self.seed,
        )

    def baseline_config(self) -> BaselineConfig:
        return BaselineConfig(
            iterations=self.iterations,
            runs=self.runs,
            bounds=self.bounds,
            weights=self.weights,
            seed=self.seed,
            step_size=self.step_size,
            fd_epsilon=self.fd_epsilon,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            adam_eps=self.adam_eps,
        )

    def override(self, **kwargs) -> "AppConfig":
        provided = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **provided) if provided else self


def _reject_unknown(section: dict, allowed, where: str) -> None:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ValueError(
            f"unknown key(s) {sorted(unknown)} in [{where}]"
        )


def _as_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{key} must be an integer")
    return value


def _as_float(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{key} must be a number")
    return float(value)


def _parse_weights(value):
    if isinstance(value, str):
        if value == "step":
            return step_weights()
        if value == "uniform":
            return np.full(MODULE_COUNT, 1.0 / MODULE_COUNT)
        raise ValueError(
            f"weights must be 'step', 'uniform' or a {MODULE_COUNT}-entry array,"
            f" got {value!r}"
        )
    return as_weights(value)


def parse_config(document: dict) -> AppConfig:
    """Validate a parsed TOML document and resolve it to an AppConfig."""
    _reject_unknown(document, {"bounds", "tuner", "system", "objective"}, "top level")
    values: dict = {}

    bounds_sec = document.get("bounds", {})
    _reject_unknown(bounds_sec, {"lower", "upper"}, "bounds")
    if ("lower" in bounds_sec) != ("upper" in bounds_sec):
        raise ValueError("[bounds] needs both lower and upper, or neither")
    if "lower" in bounds_sec:
        values["bounds"] = BoundsBox(
            np.asarray(bounds_sec["lower"], dtype=float),
            np.asarray(bounds_sec["upper"], dtype=float),
        )

    tuner_sec = document.get("tuner", {})
    _reject_unknown(tuner_sec, _TUNER_KEYS, "tuner")
    for key, kind in _TUNER_KEYS.items():
        if key in tuner_sec:
            value = tuner_sec[key]
            values[key] = (
                _as_int(value, key) if kind is int else _as_float(value, key)
            )

    system_sec = document.get("system", {})
    _reject_unknown(system_sec, {"asset"}, "system")
    if "asset" in system_sec:
        if not isinstance(system_sec["asset"], str):
            raise ValueError("asset must be a path string")
        values["asset_path"] = system_sec["asset"]

    objective_sec = document.get("objective", {})
    _reject_unknown(objective_sec, {"weights", "reference_intensity"}, "objective")
    if "weights" in objective_sec:
        values["weights"] = _parse_weights(objective_sec["weights"])
    if "reference_intensity" in objective_sec:
        values["reference_intensity"] = _as_float(
            objective_sec["reference_intensity"], "reference_intensity"
        )

    return AppConfig(**values)


def load_config(path) -> AppConfig:
    with open(Path(path), "rb") as fh:
        document = tomllib.load(fh)
    return parse_config(document)
