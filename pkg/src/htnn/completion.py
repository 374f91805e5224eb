"""ADMM solvers for low-rank matrix and t-matrix completion.

Both solvers run the same iteration on the problem

    minimize ||X||_*  subject to  X + E = M,  E = 0 on observed entries

with a decaying penalty ``tau``::

    X_{k+1} = prox_{tau_k}(M - E_k + tau_k * Y_k)
    E_{k+1} = keep_missing(M - X_{k+1} + tau_k * Y_k)
    Y_{k+1} = Y_k + (M - X_{k+1} - E_{k+1}) / tau_k
    tau_{k+1} = max(alpha * tau_k, tau_min)

where the proximal step is singular value thresholding for plain matrices
and TSVT for t-matrices.  With t-scalars of a single entry the two solvers
coincide.
"""

import csv
import io
from collections import namedtuple
from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import ValidationError
from .tmatrix import TMatrix, _svt
from .validation import check_mask, check_observed_finite

__all__ = [
    "CompletionConfig",
    "CompletionTrace",
    "IterationRecord",
    "mask_keep",
    "svt",
    "lrmc_admm",
    "tmatrix_admm",
]


@dataclass(frozen=True)
class CompletionConfig:
    """ADMM hyperparameters.

    Attributes
    ----------
    tau0 : float
        Initial penalty (also the first singular value threshold).
    alpha : float
        Per-iteration decay of the penalty, in (0, 1).
    tau_min : float
        Floor for the penalty.
    max_iters : int
        Iteration cap.
    rel_tol : float
        Stop once ``||M - X - E||_F <= rel_tol * ||M||_F``.
    """

    tau0: float = 1e4
    alpha: float = 0.9
    tau_min: float = 1e-6
    max_iters: int = 500
    rel_tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.tau_min <= self.tau0:
            raise ValidationError(
                f"need 0 < tau_min <= tau0, got tau_min={self.tau_min}, tau0={self.tau0}"
            )
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValidationError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.rel_tol > 0:
            raise ValidationError(f"rel_tol must be positive, got {self.rel_tol}")

    def to_dict(self):
        return asdict(self)


IterationRecord = namedtuple("IterationRecord", ["iter", "tau", "residual", "nuclear_norm"])


@dataclass
class CompletionTrace:
    """Per-iteration diagnostics of an ADMM run.

    ``residual`` is the absolute primal residual ``||M - X_k - E_k||_F``;
    ``norm_M`` is the norm it is compared against.
    """

    norm_M: float
    rel_tol: float
    records: list = field(default_factory=list)
    converged: bool = False

    @property
    def n_iter(self):
        return len(self.records)

    @property
    def final_residual(self):
        return self.records[-1].residual if self.records else float("nan")

    @property
    def relative_residual(self):
        if self.norm_M == 0:
            return self.final_residual
        return self.final_residual / self.norm_M

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(IterationRecord._fields)
        for r in self.records:
            w.writerow([r.iter, repr(r.tau), repr(r.residual), repr(r.nuclear_norm)])

    def to_csv(self, path=None):
        """Write the trace as CSV to `path`, or return it as a string."""
        if path is None:
            buf = io.StringIO()
            self.write_csv(buf)
            return buf.getvalue()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            self.write_csv(fh)


def mask_keep(A, mask):
    """Keep entries where `mask` is True and zero the rest.

    Works on arrays and on t-matrices; for t-matrices the mask addresses the
    entries of the underlying array, so a partially observed t-scalar keeps
    its observed entries.
    """
    if isinstance(A, TMatrix):
        return TMatrix(mask_keep(A.body, mask))
    A = np.asarray(A)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != A.shape:
        raise ValidationError(f"mask shape {mask.shape} does not match operand shape {A.shape}")
    return np.where(mask, A, np.zeros((), dtype=A.dtype))


def svt(A, tau):
    """Classical singular value thresholding of a matrix.

    Returns the thresholded matrix and its nuclear norm.
    """
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    s = np.maximum(s - tau, 0.0)
    return (U * s) @ Vh, float(s.sum())


def _admm(M, observed, prox, config, callback):
    M = np.where(observed, M, 0.0)
    missing = ~observed
    E = np.zeros_like(M)
    Y = np.zeros_like(M)
    tau = float(config.tau0)
    trace = CompletionTrace(norm_M=float(np.linalg.norm(M)), rel_tol=config.rel_tol)
    threshold = config.rel_tol * trace.norm_M
    X = M
    for k in range(int(config.max_iters)):
        X, nuc = prox(M - E + tau * Y, tau)
        E = np.where(missing, M - X + tau * Y, 0.0)
        R = M - X - E
        Y_next = Y + R / tau
        residual = float(np.linalg.norm(R))
        trace.records.append(IterationRecord(k + 1, tau, residual, nuc))
        if callback is not None:
            callback(k + 1, X, E, Y_next, tau)
        Y = Y_next
        tau = max(config.alpha * tau, config.tau_min)
        if residual <= threshold:
            trace.converged = True
            break
    return X, trace


def lrmc_admm(M, observed, config=None, callback=None):
    """Low-rank matrix completion by ADMM with singular value thresholding.

    Parameters
    ----------
    M : array_like, shape (D1, D2)
        Matrix to complete; entries outside `observed` are ignored.
    observed : array_like of bool, shape (D1, D2)
        Observation mask, a non-empty proper subset of the entries.
    config : CompletionConfig, optional
    callback : callable, optional
        Called as ``callback(k, X, E, Y, tau)`` after iteration ``k`` with the
        new iterates and the penalty used in that iteration.

    Returns
    -------
    X : ndarray
        Completed matrix.
    trace : CompletionTrace
    """
    config = config or CompletionConfig()
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {M.shape}")
    observed = check_mask(observed, M.shape, name="observed")
    check_observed_finite(M, observed)
    return _admm(M, observed, svt, config, callback)


def tmatrix_admm(M, observed, config=None, callback=None):
    """Generalized (t-matrix) completion by ADMM with TSVT.

    Parameters
    ----------
    M : TMatrix or array_like
        T-matrix (or its little-endian body) to complete.
    observed : array_like of bool
        Entry-level observation mask over the underlying array.  A full mask
        is accepted; the solver then converges to `M` itself.
    config : CompletionConfig, optional
    callback : callable, optional
        As for :func:`lrmc_admm`; iterates are passed as body arrays.

    Returns
    -------
    X : TMatrix
    trace : CompletionTrace
    """
    config = config or CompletionConfig()
    body = M.body if isinstance(M, TMatrix) else np.asarray(M)
    if body.ndim < 3:
        raise ValidationError(f"expected a t-matrix body with >= 3 axes, got shape {body.shape}")
    if not np.iscomplexobj(body):
        body = body.astype(np.float64)
    observed = check_mask(observed, body.shape, allow_full=True, name="observed")
    check_observed_finite(body, observed)

    def prox(Z, tau):
        X, nuc = _svt(TMatrix(Z), tau)
        return X.body, nuc

    X, trace = _admm(body, observed, prox, config, callback)
    return TMatrix(X), trace
