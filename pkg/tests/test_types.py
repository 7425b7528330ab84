"""BoundsBox and BeamState value types."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from beamtune.types import BeamState, BoundsBox, NON_PHYSICAL, default_bounds


def test_default_bounds_is_unit_box():
    b = default_bounds()
    assert b.dim == 8
    assert np.all(b.lower == -1.0)
    assert np.all(b.upper == 1.0)
    assert np.all(b.width == 2.0)


def test_bounds_rejects_inverted_interval():
    with pytest.raises(ValueError):
        BoundsBox(np.array([0.0, 1.0]), np.array([1.0, 0.5]))


def test_bounds_contains_and_clip():
    b = BoundsBox(np.array([-1.0, 0.0]), np.array([1.0, 2.0]))
    assert b.contains([0.0, 1.0])
    assert not b.contains([1.5, 1.0])
    assert b.contains([1.0 + 1e-12, 1.0], atol=1e-9)
    assert b.clip([5.0, -5.0]).tolist() == [1.0, 0.0]


def test_bounds_sample_shape_and_range(rng):
    b = BoundsBox(np.array([-2.0, 3.0]), np.array([-1.0, 7.0]))
    pts = b.sample(rng, 500)
    assert pts.shape == (500, 2)
    assert np.all(pts >= b.lower) and np.all(pts <= b.upper)
    # both dimensions actually spread over their ranges
    assert np.ptp(pts[:, 0]) > 0.5 and np.ptp(pts[:, 1]) > 2.0


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2**32 - 1))
def test_bounds_sample_within_box_property(dim, seed):
    b = BoundsBox(np.full(dim, -3.0), np.full(dim, 1.5))
    pts = b.sample(np.random.default_rng(seed), 32)
    assert np.all(pts >= -3.0) and np.all(pts <= 1.5)


def test_beam_state_validation():
    good = BeamState(module=1, projections=np.zeros((15, 32, 32)))
    assert good.module == 1
    with pytest.raises(ValueError):
        BeamState(module=0, projections=np.zeros((15, 32, 32)))
    with pytest.raises(ValueError):
        BeamState(module=49, projections=np.zeros((15, 32, 32)))
    with pytest.raises(ValueError):
        BeamState(module=1, projections=np.full((15, 32, 32), 1.2))


def test_non_physical_label_is_none():
    assert NON_PHYSICAL is None
