"""scikit-learn compatible estimators.

Missing entries are marked with NaN, as in :mod:`sklearn.impute`.  Completion
is transductive: ``fit`` solves the completion problem for the array it is
given and stores the result in ``completed_``; ``transform`` fills the NaN
entries of an array of the same shape from that result and keeps everything
else.
"""

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils.validation import check_is_fitted

from .completion import CompletionConfig, lrmc_admm, tmatrix_admm
from .exceptions import ValidationError
from .lifting import downconvert, lift_image, lift_mask
from .validation import check_image, check_neighborhood

__all__ = [
    "MatrixCompleter",
    "TMatrixCompleter",
    "NeighborhoodLifter",
    "HigherOrderTNN",
]


class _CompletionMixin:
    def _config(self):
        return CompletionConfig(
            tau0=self.tau0,
            alpha=self.alpha,
            tau_min=self.tau_min,
            max_iters=self.max_iter,
            rel_tol=self.tol,
        )

    def _store(self, trace):
        self.trace_ = trace
        self.n_iter_ = trace.n_iter
        self.converged_ = trace.converged
        if not trace.converged:
            warnings.warn(
                f"ADMM stopped after {trace.n_iter} iterations with relative "
                f"residual {trace.relative_residual:.3g} > tol={self.tol:g}",
                ConvergenceWarning,
                stacklevel=3,
            )

    def transform(self, X):
        """Fill the NaN entries of `X` from the fitted completion."""
        check_is_fitted(self, "completed_")
        X = np.asarray(X, dtype=np.float64)
        if X.shape != self.completed_.shape:
            raise ValidationError(
                f"X has shape {X.shape}, but the estimator was fitted on {self.completed_.shape}"
            )
        return np.where(np.isnan(X), self.completed_, X)


class MatrixCompleter(_CompletionMixin, TransformerMixin, BaseEstimator):
    """Low-rank matrix completion (nuclear norm ADMM).

    Parameters
    ----------
    tau0, alpha, tau_min : float
        Penalty schedule, see :class:`~htnn.completion.CompletionConfig`.
    max_iter : int
    tol : float
        Relative primal residual at which to stop.

    Attributes
    ----------
    completed_ : ndarray of shape (D1, D2)
    trace_ : CompletionTrace
    n_iter_ : int
    converged_ : bool
    """

    def __init__(self, tau0=1e4, alpha=0.9, tau_min=1e-6, max_iter=500, tol=1e-8):
        self.tau0 = tau0
        self.alpha = alpha
        self.tau_min = tau_min
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None, callback=None):
        """Complete `X`, whose missing entries are NaN.

        `callback` is handed to the solver and called after every iteration,
        see :func:`~htnn.completion.lrmc_admm`.
        """
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValidationError(f"expected a 2-D array, got shape {X.shape}")
        completed, trace = lrmc_admm(X, ~np.isnan(X), self._config(), callback)
        self.completed_ = completed
        self._store(trace)
        return self


class TMatrixCompleter(_CompletionMixin, TransformerMixin, BaseEstimator):
    """Completion of a t-matrix given as its little-endian body.

    `X` has shape ``(I1, ..., IN, D1, D2)``; the last two axes are the
    matrix axes.  Parameters and attributes are as for
    :class:`MatrixCompleter`.
    """

    def __init__(self, tau0=1e4, alpha=0.9, tau_min=1e-6, max_iter=500, tol=1e-8):
        self.tau0 = tau0
        self.alpha = alpha
        self.tau_min = tau_min
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None, callback=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim < 3:
            raise ValidationError(f"expected an array with >= 3 axes, got shape {X.shape}")
        completed, trace = tmatrix_admm(X, ~np.isnan(X), self._config(), callback)
        self.completed_ = np.asarray(completed.body)
        self._store(trace)
        return self


class NeighborhoodLifter(TransformerMixin, BaseEstimator):
    """Lift images to t-matrix bodies; ``inverse_transform`` reads them back.

    Parameters
    ----------
    neighborhood : (int, int) or str
        Odd extents, e.g. ``(3, 3)`` or ``"3x3"``.
    boundary : {"replicate", "wrap", "reflect"}
    """

    def __init__(self, neighborhood=(3, 3), boundary="replicate"):
        self.neighborhood = neighborhood
        self.boundary = boundary

    def fit(self, X, y=None):
        img = check_image(X, allow_nan=True)
        self.neighborhood_ = check_neighborhood(self.neighborhood, img.shape)
        self.image_shape_ = img.shape
        return self

    def transform(self, X):
        check_is_fitted(self, "neighborhood_")
        return np.asarray(lift_image(X, self.neighborhood_, self.boundary).body)

    def inverse_transform(self, X):
        check_is_fitted(self, "neighborhood_")
        return downconvert(X)


class HigherOrderTNN(_CompletionMixin, TransformerMixin, BaseEstimator):
    """Image completion over neighborhood-lifted t-matrices.

    The image is lifted with an ``I1 x I2`` pixel neighborhood, completed by
    t-matrix ADMM, and the centres of the completed neighborhoods are read
    back.  ``neighborhood=(1, 1)`` is the plain tensor-nuclear-norm baseline
    with t-scalars made of the channel vector.

    Parameters
    ----------
    neighborhood : (int, int) or str, default (3, 3)
    boundary : {"replicate", "wrap", "reflect"}, default "replicate"
    tau0, alpha, tau_min, max_iter, tol
        As for :class:`MatrixCompleter`.

    Attributes
    ----------
    completed_ : ndarray of shape (D1, D2, D3)
        Unquantized completed image, on the scale of the input.
    trace_ : CompletionTrace
    n_iter_ : int
    converged_ : bool
    """

    def __init__(
        self,
        neighborhood=(3, 3),
        boundary="replicate",
        tau0=1e4,
        alpha=0.9,
        tau_min=1e-6,
        max_iter=500,
        tol=1e-8,
    ):
        self.neighborhood = neighborhood
        self.boundary = boundary
        self.tau0 = tau0
        self.alpha = alpha
        self.tau_min = tau_min
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y=None, callback=None):
        """Complete the image `X` (NaN = missing); `callback` sees the lifted iterates."""
        img = check_image(X, allow_nan=True)
        nb = check_neighborhood(self.neighborhood, img.shape)
        observed = ~np.isnan(img)
        lifted = lift_image(np.where(observed, img, 0.0), nb, self.boundary)
        lifted_obs = lift_mask(observed, nb, self.boundary)
        completed, trace = tmatrix_admm(lifted, lifted_obs, self._config(), callback)
        out = downconvert(completed)
        self.completed_ = out if np.ndim(X) == 3 else out[:, :, 0]
        self._store(trace)
        return self
