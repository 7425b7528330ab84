"""GP surrogate against an independent dense solver.

The oracle below rebuilds the SE-ARD kernel with explicit loops in extended
precision and solves the posterior equations with a dense
``numpy.linalg.solve``: no Cholesky, and no shared code with the
implementation under test beyond numpy itself.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beamtune.gp import (
    GaussianProcessSurrogate,
    KernelParams,
    NotFittedError,
    NumericalFitError,
    heuristic_kernel_params,
    kernel_matrix,
)


def dense_kernel(a, b, signal, scales):
    """Loop-built SE-ARD kernel in longdouble."""
    a = np.asarray(a, dtype=np.longdouble)
    b = np.asarray(b, dtype=np.longdouble)
    scales = np.asarray(scales, dtype=np.longdouble)
    out = np.empty((a.shape[0], b.shape[0]), dtype=np.longdouble)
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            d = (a[i] - b[j]) / scales
            out[i, j] = signal * np.exp(-0.5 * np.dot(d, d))
    return out


def dense_posterior(X, y, Xq, signal, scales, noise):
    """Posterior mean/variance via one dense solve in longdouble."""
    K = dense_kernel(X, X, signal, scales)
    K += noise * np.eye(len(X), dtype=np.longdouble)
    ymean = np.longdouble(np.mean(np.asarray(y, dtype=np.longdouble)))
    centered = np.asarray(y, dtype=np.longdouble) - ymean
    Ks = dense_kernel(Xq, X, signal, scales)
    alpha = np.linalg.solve(K.astype(float), centered.astype(float))
    mean = ymean + Ks.astype(float) @ alpha
    solve_star = np.linalg.solve(K.astype(float), Ks.astype(float).T)
    var = signal - np.sum(Ks.astype(float).T * solve_star, axis=0)
    return np.asarray(mean, dtype=float), np.asarray(var, dtype=float)


def _random_problem(rng, n=24, m=16, dim=3):
    X = rng.uniform(-1.0, 1.0, size=(n, dim))
    y = np.sin(X.sum(axis=1)) + 0.1 * rng.standard_normal(n)
    Xq = rng.uniform(-1.0, 1.0, size=(m, dim))
    return X, y, Xq


def test_posterior_matches_dense_oracle(rng):
    X, y, Xq = _random_problem(rng)
    signal, scales, noise = 0.8, np.array([0.5, 0.7, 0.4]), 1e-8
    model = GaussianProcessSurrogate(signal, scales, noise).fit(X, y)
    mean, var = model.predict(Xq, return_var=True)
    mean_o, var_o = dense_posterior(X, y, Xq, signal, scales, noise)
    assert np.max(np.abs(mean - mean_o)) < 1e-8
    assert np.max(np.abs(var - var_o)) < 1e-8


def test_interpolation_at_training_points(rng):
    X, y, _ = _random_problem(rng)
    model = GaussianProcessSurrogate(1.0, 0.6, 1e-8).fit(X, y)
    mean, var = model.predict(X, return_var=True)
    assert np.max(np.abs(mean - y)) < 1e-6
    assert np.all(var >= 0.0)
    assert np.max(var) < 1e-6


def test_kernel_matrix_explicit_value():
    params = KernelParams(2.0, np.array([0.5, 2.0]), 0.0)
    a = np.array([[0.0, 0.0]])
    b = np.array([[0.5, 2.0]])
    # one squared scaled distance per dimension: (0.5/0.5)^2 + (2/2)^2 = 2
    expected = 2.0 * np.exp(-1.0)
    assert abs(kernel_matrix(a, b, params)[0, 0] - expected) < 1e-15


def test_kernel_matrix_symmetry_and_diagonal(rng):
    params = KernelParams(1.3, np.array([0.4, 0.9]), 0.0)
    X = rng.uniform(-1, 1, size=(12, 2))
    K = kernel_matrix(X, X, params)
    assert np.allclose(K, K.T, atol=1e-15)
    assert np.allclose(np.diag(K), 1.3, atol=1e-15)
    assert K.max() <= 1.3 + 1e-15


def test_kernel_dimension_mismatch():
    params = KernelParams(1.0, np.array([0.5, 0.5]), 0.0)
    with pytest.raises(ValueError, match="dimension"):
        kernel_matrix(np.zeros((2, 3)), np.zeros((2, 2)), params)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_variance_never_increases_with_new_data(seed):
    """Conditioning on one more observation cannot raise posterior variance."""
    rg = np.random.default_rng(seed)
    X, y, Xq = _random_problem(rg, n=12, m=8, dim=2)
    params = dict(signal_variance=1.0, length_scales=0.5, noise_variance=1e-8)
    base = GaussianProcessSurrogate(**params).fit(X, y)
    _, var0 = base.predict(Xq, return_var=True)
    x_new = rg.uniform(-1.0, 1.0, size=2)
    grown = base.augmented(x_new, float(np.sin(x_new.sum())))
    _, var1 = grown.predict(Xq, return_var=True)
    assert np.all(var1 <= var0 + 1e-9)


def test_augmented_equals_refit(rng):
    X, y, Xq = _random_problem(rng, n=10, m=5, dim=2)
    base = GaussianProcessSurrogate(0.9, 0.5, 1e-8).fit(X, y)
    x_new, y_new = np.array([0.3, -0.2]), 0.7
    a = base.augmented(x_new, y_new)
    b = GaussianProcessSurrogate(0.9, 0.5, 1e-8).fit(
        np.vstack([X, x_new]), np.append(y, y_new)
    )
    ma, va = a.predict(Xq, return_var=True)
    mb, vb = b.predict(Xq, return_var=True)
    assert np.array_equal(ma, mb)
    assert np.array_equal(va, vb)
    # the receiver is untouched
    assert base.n_observations_ == 10


def test_jitter_escalation_on_duplicates(rng):
    # identical rows with identical targets need jitter at zero noise
    X = np.vstack([np.zeros((2, 2)), rng.uniform(-1, 1, (6, 2))])
    y = np.concatenate([[0.5, 0.5], rng.standard_normal(6)])
    model = GaussianProcessSurrogate(1.0, 0.7, 0.0).fit(X, y)
    assert model.jitter_ > 0.0
    mean = model.predict(np.array([[0.0, 0.0]]))
    assert abs(mean[0] - 0.5) < 1e-3


def test_conflicting_duplicates_rejected():
    X = np.zeros((2, 2))
    y = np.array([0.0, 1.0])
    with pytest.raises(NumericalFitError, match="duplicate"):
        GaussianProcessSurrogate(1.0, 0.5, 0.0).fit(X, y)


def test_not_fitted_error():
    model = GaussianProcessSurrogate()
    with pytest.raises(NotFittedError):
        model.predict(np.zeros((1, 2)))


def test_fit_validation_errors():
    g = GaussianProcessSurrogate()
    with pytest.raises(ValueError, match="empty"):
        g.fit(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(ValueError, match="disagree"):
        g.fit(np.zeros((3, 2)), np.zeros(2))
    with pytest.raises(ValueError, match="finite"):
        g.fit(np.array([[np.nan, 0.0]]), np.array([1.0]))


def test_kernel_params_validation():
    with pytest.raises(ValueError):
        KernelParams(0.0, np.array([1.0]), 0.0)
    with pytest.raises(ValueError):
        KernelParams(1.0, np.array([-1.0]), 0.0)
    with pytest.raises(ValueError):
        KernelParams(1.0, np.array([1.0]), -1e-3)


def test_heuristic_kernel_params():
    lower, upper = np.full(8, -1.0), np.full(8, 1.0)
    targets = np.array([0.0, 1.0, 2.0])
    p = heuristic_kernel_params(lower, upper, targets)
    assert np.allclose(p.length_scales, 0.5)
    assert abs(p.signal_variance - np.var(targets)) < 1e-15
    assert p.noise_variance == 1e-8
    # variance floor engages for constant targets
    flat = heuristic_kernel_params(lower, upper, np.ones(5))
    assert flat.signal_variance == 1e-6


def test_get_set_params_roundtrip():
    g = GaussianProcessSurrogate(2.0, 0.3, 1e-6)
    assert g.get_params()["signal_variance"] == 2.0
    g.set_params(signal_variance=1.5)
    assert g.signal_variance == 1.5
    with pytest.raises(ValueError, match="unknown parameter"):
        g.set_params(bogus=1)
