"""Shared input validation helpers."""

import numpy as np
import pytest

from beamtune.validation import (
    LATENT_DIM,
    MODULE_COUNT,
    as_float_vector,
    as_latent_point,
    as_loss_vector,
    as_trajectory,
    as_weights,
    check_probability_grid,
)


def test_as_float_vector_accepts_lists():
    out = as_float_vector([1, 2, 3], "x")
    assert out.dtype == np.float64
    assert out.tolist() == [1.0, 2.0, 3.0]


def test_as_float_vector_rejects_matrix():
    with pytest.raises(ValueError, match="one-dimensional"):
        as_float_vector(np.zeros((2, 2)), "x")


def test_as_float_vector_rejects_wrong_size():
    with pytest.raises(ValueError, match="length 4"):
        as_float_vector([1.0, 2.0], "x", 4)


def test_as_float_vector_rejects_nan_and_inf():
    with pytest.raises(ValueError, match="finite"):
        as_float_vector([1.0, np.nan], "x")
    with pytest.raises(ValueError, match="finite"):
        as_float_vector([np.inf, 0.0], "x")


def test_as_latent_point_size():
    assert as_latent_point(np.zeros(LATENT_DIM)).shape == (LATENT_DIM,)
    with pytest.raises(ValueError):
        as_latent_point(np.zeros(LATENT_DIM + 1))


def test_as_trajectory_shape():
    ok = np.zeros((MODULE_COUNT, LATENT_DIM))
    assert as_trajectory(ok).shape == (MODULE_COUNT, LATENT_DIM)
    with pytest.raises(ValueError):
        as_trajectory(np.zeros((MODULE_COUNT - 1, LATENT_DIM)))
    bad = ok.copy()
    bad[3, 2] = np.nan
    with pytest.raises(ValueError):
        as_trajectory(bad)


def test_as_weights_contract():
    w = np.zeros(MODULE_COUNT)
    w[-1] = 1.0
    assert as_weights(w)[-1] == 1.0
    with pytest.raises(ValueError, match="non-negative"):
        bad = w.copy()
        bad[0] = -0.1
        as_weights(bad)
    with pytest.raises(ValueError, match="all zero"):
        as_weights(np.zeros(MODULE_COUNT))


def test_as_loss_vector_bounds():
    ok = np.full(MODULE_COUNT, 0.5)
    assert np.all(as_loss_vector(ok) == 0.5)
    bad = ok.copy()
    bad[0] = 1.5
    with pytest.raises(ValueError, match=r"\[0, 1\]"):
        as_loss_vector(bad)


def test_check_probability_grid():
    ok = np.zeros((15, 32, 32))
    assert check_probability_grid(ok).shape == (15, 32, 32)
    with pytest.raises(ValueError, match="shape"):
        check_probability_grid(np.zeros((15, 32, 31)))
    bad = ok.copy()
    bad[0, 0, 0] = -0.01
    with pytest.raises(ValueError, match="intensities"):
        check_probability_grid(bad)
