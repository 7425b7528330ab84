"""Gaussian-process surrogate with a squared-exponential ARD kernel.

The surrogate is deliberately small and fixed: per-dimension length scales,
signal variance and observation-noise variance are supplied up front (or via
:func:`heuristic_kernel_params`), and there is no marginal-likelihood
optimization.  Fitting factorizes the full kernel matrix, so updates are
O(n^3); at the budgets used here (n <= 1000) correctness beats speed.

The estimator follows the usual fit/predict surface: ``fit(X, y)`` returns
``self`` with trailing-underscore attributes, ``predict`` evaluates the
posterior, and ``get_params``/``set_params`` expose the constructor
parameters.  Fitted state is never mutated afterwards; :meth:`augmented`
returns a new fitted instance instead of updating in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

__all__ = [
    "KernelParams",
    "GaussianProcessSurrogate",
    "NotFittedError",
    "NumericalFitError",
    "heuristic_kernel_params",
    "kernel_matrix",
]

# Jitter schedule: first attempt adds noise only, retries add an escalating
# diagonal jitter until factorization succeeds or the cap is reached.
_JITTER_START = 1e-10
_JITTER_FACTOR = 10.0
_JITTER_MAX = 1e-4

# Largest negative predictive variance attributable to roundoff; anything
# worse indicates a broken factorization and is raised, not clamped.
_VARIANCE_ROUNDOFF = 1e-10


class NotFittedError(RuntimeError):
    """Raised when posterior queries reach an unfitted surrogate."""


class NumericalFitError(RuntimeError):
    """Raised when the kernel matrix cannot be factorized reliably."""


@dataclass(frozen=True)
class KernelParams:
    """Squared-exponential kernel hyperparameters.

    Parameters
    ----------
    signal_variance : float
        Prior variance of the latent function; strictly positive.
    length_scales : np.ndarray
        One strictly positive length scale per input dimension.
    noise_variance : float
        Observation-noise variance added to the kernel diagonal; >= 0.
    """

    signal_variance: float
    length_scales: np.ndarray
    noise_variance: float

    def __post_init__(self) -> None:
        scales = np.atleast_1d(np.asarray(self.length_scales, dtype=float))
        if scales.ndim != 1 or scales.size == 0:
            raise ValueError("length_scales must be a non-empty vector")
        if not np.all(np.isfinite(scales)) or np.any(scales <= 0.0):
            raise ValueError("length_scales must be finite and strictly positive")
        if not np.isfinite(self.signal_variance) or self.signal_variance <= 0.0:
            raise ValueError("signal_variance must be finite and strictly positive")
        if not np.isfinite(self.noise_variance) or self.noise_variance < 0.0:
            raise ValueError("noise_variance must be finite and non-negative")
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))
        object.__setattr__(self, "length_scales", scales)

    @property
    def dim(self) -> int:
        return int(self.length_scales.shape[0])


def kernel_matrix(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Cross-covariance matrix of the SE-ARD kernel.

    ``k(x, x') = signal_variance * exp(-0.5 * sum_d ((x_d - x'_d) / l_d)^2)``

    Parameters
    ----------
    a, b : np.ndarray
        Point sets of shape (n, d) and (m, d).
    params : KernelParams
        Kernel hyperparameters with ``dim == d``.

    Returns
    -------
    np.ndarray
        Matrix of shape (n, m).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != params.dim or b.shape[1] != params.dim:
        raise ValueError(
            f"kernel inputs must have dimension {params.dim}, "
            f"got {a.shape[1]} and {b.shape[1]}"
        )
    sa = a / params.length_scales
    sb = b / params.length_scales
    sq = (
        np.sum(sa**2, axis=1)[:, None]
        + np.sum(sb**2, axis=1)[None, :]
        - 2.0 * sa @ sb.T
    )
    np.maximum(sq, 0.0, out=sq)
    return params.signal_variance * np.exp(-0.5 * sq)


def heuristic_kernel_params(
    lower: np.ndarray, upper: np.ndarray, targets: np.ndarray
) -> KernelParams:
    """Fixed hyperparameter heuristic used by the tuner.

    Length scale per dimension is a quarter of the box width, signal
    variance is the population variance of the observed targets floored at
    1e-6, and noise variance is pinned at 1e-8.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    targets = np.asarray(targets, dtype=float)
    signal = max(float(np.var(targets)), 1e-6)
    return KernelParams(
        signal_variance=signal,
        length_scales=0.25 * (upper - lower),
        noise_variance=1e-8,
    )


def _find_conflicting_duplicates(X: np.ndarray, y: np.ndarray) -> bool:
    """True if two identical rows of X carry different targets."""
    seen: dict[bytes, float] = {}
    for row, target in zip(X, y):
        key = row.tobytes()
        if key in seen and seen[key] != target:
            return True
        seen.setdefault(key, float(target))
    return False


class GaussianProcessSurrogate:
    """GP regressor over a box-bounded continuous input space.

    Parameters
    ----------
    signal_variance : float
        Prior variance of the latent function.
    length_scales : float or array-like
        Per-dimension length scales; a scalar is broadcast at fit time.
    noise_variance : float
        Observation-noise variance.

    Attributes (after fit)
    ----------------------
    params_ : KernelParams
        Validated hyperparameters with resolved dimensionality.
    X_train_, y_train_ : np.ndarray
        Copies of the training data.
    y_mean_ : float
        Target mean subtracted before solving, added back at prediction.
    L_ : np.ndarray
        Lower Cholesky factor of the regularized kernel matrix.
    alpha_ : np.ndarray
        ``K^{-1} (y - y_mean)`` via two triangular solves.
    jitter_ : float
        Diagonal jitter that made the factorization succeed (0.0 if none).
    """

    def __init__(
        self,
        signal_variance: float = 1.0,
        length_scales: float | np.ndarray = 1.0,
        noise_variance: float = 1e-8,
    ) -> None:
        self.signal_variance = signal_variance
        self.length_scales = length_scales
        self.noise_variance = noise_variance

    # -- parameter plumbing -------------------------------------------------

    def get_params(self, deep: bool = True) -> dict:
        return {
            "signal_variance": self.signal_variance,
            "length_scales": self.length_scales,
            "noise_variance": self.noise_variance,
        }

    def set_params(self, **params) -> "GaussianProcessSurrogate":
        valid = self.get_params()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"unknown parameter {key!r} for GaussianProcessSurrogate")
            setattr(self, key, value)
        return self

    # -- fitting ------------------------------------------------------------

    def _resolve_params(self, dim: int) -> KernelParams:
        scales = np.asarray(self.length_scales, dtype=float)
        if scales.ndim == 0:
            scales = np.full(dim, float(scales))
        if scales.shape != (dim,):
            raise ValueError(
                f"length_scales must be scalar or have length {dim}, got shape {scales.shape}"
            )
        return KernelParams(
            signal_variance=self.signal_variance,
            length_scales=scales,
            noise_variance=self.noise_variance,
        )

    def fit(self, X, y) -> "GaussianProcessSurrogate":
        """Fit the surrogate on inputs ``X`` (n, d) and targets ``y`` (n,)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] == 0:
            raise ValueError("cannot fit on an empty dataset")
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"inputs and targets disagree: {X.shape[0]} rows vs {y.shape[0]} targets"
            )
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("training data must be finite")

        params = self._resolve_params(X.shape[1])
        if params.noise_variance == 0.0 and _find_conflicting_duplicates(X, y):
            raise NumericalFitError(
                "duplicate inputs with conflicting targets and zero noise_variance "
                "make the kernel system inconsistent; add observation noise"
            )

        K = kernel_matrix(X, X, params)
        n = X.shape[0]
        diag = np.arange(n)
        K[diag, diag] += params.noise_variance

        L = None
        jitter_used = 0.0
        jitter = 0.0
        while True:
            try:
                L = np.linalg.cholesky(K + jitter * np.eye(n) if jitter else K)
                jitter_used = jitter
                break
            except np.linalg.LinAlgError:
                jitter = _JITTER_START if jitter == 0.0 else jitter * _JITTER_FACTOR
                if jitter > _JITTER_MAX:
                    raise NumericalFitError(
                        "Cholesky factorization failed at maximum jitter "
                        f"(schedule {_JITTER_START:g} x{_JITTER_FACTOR:g} "
                        f"up to {_JITTER_MAX:g})"
                    ) from None

        y_mean = float(np.mean(y))
        centered = y - y_mean
        alpha = solve_triangular(
            L.T, solve_triangular(L, centered, lower=True), lower=False
        )

        self.params_ = params
        self.X_train_ = X.copy()
        self.y_train_ = y.copy()
        self.y_mean_ = y_mean
        self.L_ = L
        self.alpha_ = alpha
        self.jitter_ = jitter_used
        return self

    @property
    def n_observations_(self) -> int:
        self._check_fitted()
        return int(self.X_train_.shape[0])

    def _check_fitted(self) -> None:
        if not hasattr(self, "alpha_"):
            raise NotFittedError(
                "this GaussianProcessSurrogate is not fitted; call fit(X, y) first"
            )

    # -- prediction ---------------------------------------------------------

    def predict(self, X, return_var: bool = False):
        """Posterior mean (and latent-function variance) at query points.

        Parameters
        ----------
        X : array-like
            Query points of shape (m, d) or a single point of shape (d,).
        return_var : bool
            When true, also return the posterior variance.

        Returns
        -------
        np.ndarray or (np.ndarray, np.ndarray)
            Mean of shape (m,), and variance of shape (m,) if requested.
        """
        self._check_fitted()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not np.all(np.isfinite(X)):
            raise ValueError("query points must be finite")
        k_star = kernel_matrix(X, self.X_train_, self.params_)
        mean = self.y_mean_ + k_star @ self.alpha_
        if not return_var:
            return mean
        v = solve_triangular(self.L_, k_star.T, lower=True)
        var = self.params_.signal_variance - np.sum(v * v, axis=0)
        worst = float(var.min(initial=np.inf))
        if worst < -_VARIANCE_ROUNDOFF:
            raise NumericalFitError(
                f"posterior variance {worst:.3e} below the roundoff tolerance "
                f"-{_VARIANCE_ROUNDOFF:g}; kernel system is ill-conditioned"
            )
        np.maximum(var, 0.0, out=var)
        return mean, var

    # -- incremental interface ---------------------------------------------

    def augmented(self, x, y: float) -> "GaussianProcessSurrogate":
        """Return a new surrogate fitted on the training set plus ``(x, y)``.

        Equivalent to refitting from scratch on the augmented dataset with
        unchanged hyperparameters; the receiver is left untouched.
        """
        self._check_fitted()
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.X_train_.shape[1]:
            raise ValueError(
                f"new point has dimension {x.shape[0]}, expected {self.X_train_.shape[1]}"
            )
        X_new = np.vstack([self.X_train_, x[None, :]])
        y_new = np.append(self.y_train_, float(y))
        clone = GaussianProcessSurrogate(**self.get_params())
        return clone.fit(X_new, y_new)
