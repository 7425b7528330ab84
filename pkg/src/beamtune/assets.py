"""Versioned asset file holding every constant of the synthetic system.

The asset is a JSON document ``{"schema_version", "checksum", "payload"}``.
The payload carries the seeded generative constants (see
:func:`beamtune.synthetic.build_constants`), the calibrated classifier
section, the loss normalization constant, and the committed grid-search
optimum, so the tuner, the baselines and every test oracle load identical
numbers.  The checksum is the SHA-256 of the canonical payload JSON
(sorted keys, compact separators); loading verifies it.
"""

from __future__ import annotations

import hashlib
import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .synthetic import (
    SyntheticBeamSystem,
    build_constants,
    calibrate_classifier,
    gain_channel_value,
)

__all__ = [
    "ASSET_FILENAME",
    "SCHEMA_VERSION",
    "build_asset_payload",
    "checksum_payload",
    "default_payload",
    "default_system",
    "load_assets",
    "save_assets",
]

SCHEMA_VERSION = 1
ASSET_FILENAME = "synthetic_v1.json"


def checksum_payload(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def save_assets(payload: dict, path) -> None:
    document = {
        "schema_version": SCHEMA_VERSION,
        "checksum": checksum_payload(payload),
        "payload": payload,
    }
    Path(path).write_text(json.dumps(document, indent=1) + "\n")


def load_assets(path) -> dict:
    document = json.loads(Path(path).read_text())
    return _validate_document(document)


def _validate_document(document: dict) -> dict:
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(
            f"unsupported asset schema_version {version!r}, expected {SCHEMA_VERSION}"
        )
    payload = document.get("payload")
    if not isinstance(payload, dict):
        raise ValueError("asset document lacks a payload section")
    expected = document.get("checksum")
    actual = checksum_payload(payload)
    if expected != actual:
        raise ValueError(
            f"asset checksum mismatch: file says {expected!r}, payload hashes to {actual!r}"
        )
    return payload


@lru_cache(maxsize=1)
def default_payload() -> dict:
    """The packaged asset, checksum-verified, loaded once per process."""
    text = resources.files("beamtune.data").joinpath(ASSET_FILENAME).read_text()
    return _validate_document(json.loads(text))


@lru_cache(maxsize=1)
def default_system() -> SyntheticBeamSystem:
    return SyntheticBeamSystem(default_payload())


def _reference_intensity(system: SyntheticBeamSystem, grid: int = 200001) -> float:
    """Maximum attainable survival of the loss projection at the last module.

    The landscape is additively separable across latent coordinates, so the
    box-wide maximum is the sum of per-channel maxima over dense 1-D grids
    pushed through the per-coordinate rollout maps.
    """
    from .objective import LOSS_PROJECTION
    from .validation import MODULE_COUNT

    m = MODULE_COUNT - 1
    k = LOSS_PROJECTION - 1
    lower, upper = system.default_bounds().lower, system.default_bounds().upper

    w = system.gain_weights[k]
    bg = float(system._bg_sum[k, m])
    total = bg * system.gain_const
    # Coordinate d contributes mass (d == 4) plus its gain channels; maxima
    # decompose per coordinate because nothing couples the coordinates.
    for d in range(len(lower)):
        zd = system.rollout_coordinate(
            d, np.linspace(lower[d], upper[d], grid), MODULE_COUNT
        )
        contrib = np.zeros_like(zd)
        if d == 4:
            contrib += system.mass_base[k, m] * _sigmoid_np(
                system.mass_slope * zd + system.mass_offset[m]
            )
        for j, ch in enumerate(system.gain_channels):
            if ch["coord"] == d:
                contrib += bg * w[j] * gain_channel_value(ch, zd)
        total += float(contrib.max())
    return total


def _sigmoid_np(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


def build_asset_payload(
    seed: int = 42,
    oracle_resolution: int = 10000,
    prototype_samples: int = 256,
    calibration_samples: int = 512,
) -> dict:
    """Regenerate the full asset payload from scratch (slow; build-time only)."""
    from .objective import step_weights
    from .reporting import run_oracle

    payload = build_constants(seed)
    payload["classifier"] = calibrate_classifier(
        payload,
        prototype_samples=prototype_samples,
        calibration_samples=calibration_samples,
    )
    system = SyntheticBeamSystem(payload)
    reference = _reference_intensity(system)
    payload["objective"] = {
        "reference_intensity": reference,
        "loss_projection": 11,
    }
    oracle = run_oracle(
        system,
        weights=step_weights(),
        bounds=system.default_bounds(),
        reference_intensity=reference,
        resolution=oracle_resolution,
    )
    payload["oracle"] = oracle
    return payload
