"""Generalized matrices (t-matrices) over t-scalars.

A ``D1 x D2`` t-matrix with t-scalars of shape ``I1 x ... x IN`` is stored
little-endian: its body is an array of shape ``(I1, ..., IN, D1, D2)``.
Applying the DFT along the first N axes splits it into K = I1*...*IN
independent complex ``D1 x D2`` matrices, the spectral slices, and every
operation here (product, SVD, thresholding, pseudo-inverse, ranks, norms)
is carried out slice by slice.

For a real body the slices come in conjugate pairs; only one slice of each
pair is factorized and its partner is filled in by conjugation, which keeps
the inverse-transformed results real.
"""

import csv
import functools
from collections import namedtuple
from fractions import Fraction

import numpy as np
import scipy.linalg

from .exceptions import SVDConvergenceError
from .spectral import forward_dft, inverse_dft
from .tscalar import TScalar, real_from_residue

__all__ = [
    "TMatrix",
    "TSVDFactors",
    "tmat_mul",
    "conj_transpose",
    "tsvd",
    "tsvt",
    "pseudo_inverse",
    "higher_order_rank",
    "slice_ranks",
    "tubal_rank",
    "average_rank",
    "trace_rank",
    "schatten_norm",
    "real_schatten",
    "nuclear_norm",
    "real_inner_product",
    "direct_sum_representation",
    "dump_tsvd",
]

DIRECT_SUM_MAX = 512


class TMatrix:
    """Rectangular array of t-scalars in little-endian layout.

    Parameters
    ----------
    body : array_like, shape (I1, ..., IN, D1, D2)
        Underlying array; N >= 1.  Real input stays real (``float64``),
        complex input is stored as ``complex128``.
    """

    __slots__ = ("_body",)
    __array_ufunc__ = None

    def __init__(self, body):
        body = np.array(body)
        if np.iscomplexobj(body):
            body = body.astype(np.complex128)
        elif body.dtype.kind in "biuf":
            body = body.astype(np.float64)
        else:
            raise TypeError(f"unsupported dtype {body.dtype}")
        if body.ndim < 3:
            raise ValueError(
                "a t-matrix body needs at least 3 axes (scalar axes, then D1, D2); "
                f"got shape {body.shape}"
            )
        if 0 in body.shape:
            raise ValueError(f"t-matrix shape {body.shape} has an empty extent")
        body.setflags(write=False)
        self._body = body

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, scalar_shape, d1, d2):
        return cls(np.zeros(tuple(scalar_shape) + (d1, d2)))

    @classmethod
    def identity(cls, scalar_shape, d):
        """Identity t-matrix: identity t-scalars on the diagonal."""
        body = np.zeros(tuple(scalar_shape) + (d, d))
        body[(0,) * len(scalar_shape)] = np.eye(d)
        return cls(body)

    @classmethod
    def from_entries(cls, rows):
        """Assemble from a nested list of :class:`TScalar` entries."""
        rows = [list(r) for r in rows]
        if not rows or not rows[0] or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("entries must form a non-empty rectangular grid")
        body = np.stack([np.stack([e.body for e in r], axis=-1) for r in rows], axis=-2)
        return cls(body)

    @classmethod
    def from_spectral_slices(cls, slices, *, real=False):
        """Inverse of :meth:`spectral_slices`.

        With ``real=True`` the imaginary residue of the inverse transform is
        checked and dropped.
        """
        slices = np.asarray(slices, dtype=np.complex128)
        body = inverse_dft(slices, tuple(range(slices.ndim - 2)))
        if real:
            body = real_from_residue(body, "t-matrix")
        return cls(body)

    @classmethod
    def from_big_endian(cls, array, scalar_ndim):
        """Convert a ``(D1, D2, I1, ..., IN)`` array to little-endian."""
        array = np.asarray(array)
        if array.ndim != scalar_ndim + 2:
            raise ValueError(
                f"expected {scalar_ndim + 2} axes for scalar order {scalar_ndim}"
            )
        return cls(np.moveaxis(array, (0, 1), (-2, -1)))

    # views --------------------------------------------------------------

    @property
    def body(self):
        return self._body

    @property
    def shape(self):
        return self._body.shape

    @property
    def scalar_shape(self):
        return self._body.shape[:-2]

    @property
    def scalar_ndim(self):
        return self._body.ndim - 2

    @property
    def scalar_axes(self):
        return tuple(range(self._body.ndim - 2))

    @property
    def dims(self):
        return self._body.shape[-2:]

    @property
    def K(self):
        return int(np.prod(self.scalar_shape))

    @property
    def is_real(self):
        return not np.iscomplexobj(self._body)

    def entry(self, d1, d2):
        return TScalar(self._body[..., d1, d2])

    def spectral_slices(self):
        """Fourier transform over the scalar axes, shape ``(I..., D1, D2)``."""
        return forward_dft(self._body, self.scalar_axes)

    def to_big_endian(self):
        return np.ascontiguousarray(np.moveaxis(self._body, (-2, -1), (0, 1)))

    # arithmetic ---------------------------------------------------------

    def _check_same(self, other):
        if not isinstance(other, TMatrix):
            return None
        if other.shape != self.shape:
            raise ValueError(f"t-matrix shapes differ: {self.shape} vs {other.shape}")
        return other

    def __add__(self, other):
        other = self._check_same(other)
        if other is None:
            return NotImplemented
        return TMatrix(self._body + other._body)

    def __sub__(self, other):
        other = self._check_same(other)
        if other is None:
            return NotImplemented
        return TMatrix(self._body - other._body)

    def __neg__(self):
        return TMatrix(-self._body)

    def __mul__(self, other):
        if np.isscalar(other):
            return TMatrix(other * self._body)
        return NotImplemented

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, TMatrix):
            return NotImplemented
        return tmat_mul(self, other)

    @property
    def H(self):
        """Conjugate transpose."""
        return conj_transpose(self)

    def allclose(self, other, atol=1e-10, rtol=0.0):
        other = self._check_same(other)
        return bool(np.allclose(self._body, other._body, atol=atol, rtol=rtol))

    def __repr__(self):
        kind = "real" if self.is_real else "complex"
        return f"TMatrix(dims={self.dims}, scalar_shape={self.scalar_shape}, {kind})"


# slice-wise machinery ---------------------------------------------------


@functools.lru_cache(maxsize=64)
def _conjugate_pairs(scalar_shape):
    """Representatives of the conjugate-pair classes of Fourier indices.

    Returns ``(reps, partners, selfconj)``: linear (C-order) indices of one
    slice per pair, the linear index of its partner ``-i mod I``, and a mask
    of representatives that are their own partner.
    """
    shape = np.array(scalar_shape)
    idx = np.indices(scalar_shape).reshape(len(scalar_shape), -1)
    partner = np.ravel_multi_index(tuple((-idx) % shape[:, None]), scalar_shape)
    k = np.arange(idx.shape[1])
    reps = k[k <= partner]
    return reps, partner[reps], partner[reps] == reps


class _Slices:
    """Spectral slices of a t-matrix, halved by conjugate symmetry if real."""

    def __init__(self, X):
        self.scalar_shape = X.scalar_shape
        self.K = X.K
        self.real = X.is_real
        stack = X.spectral_slices().reshape((X.K,) + X.dims)
        if self.real:
            reps, partners, selfconj = _conjugate_pairs(X.scalar_shape)
            stack = stack[reps]
            stack[selfconj] = stack[selfconj].real
        else:
            reps = partners = np.arange(X.K)
            selfconj = np.zeros(X.K, dtype=bool)
        self.stack = stack
        self.reps = reps
        self.partners = partners
        self.selfconj = selfconj

    @property
    def weights(self):
        """How many full-spectrum slices each stored slice stands for."""
        if not self.real:
            return np.ones(len(self.reps))
        return np.where(self.selfconj, 1.0, 2.0)

    def multi_index(self, row):
        return np.unravel_index(int(self.reps[row]), self.scalar_shape)

    def svd(self, compute_uv=True):
        """Compact SVD of every stored slice, real arithmetic where possible."""
        stack = self.stack
        try:
            if not self.real or not self.selfconj.any():
                return np.linalg.svd(stack, full_matrices=False, compute_uv=compute_uv)
            sc = self.selfconj
            out_c = np.linalg.svd(stack[~sc], full_matrices=False, compute_uv=compute_uv)
            out_r = np.linalg.svd(stack[sc].real, full_matrices=False, compute_uv=compute_uv)
        except np.linalg.LinAlgError:
            self._locate_failure(compute_uv)
            raise
        if not compute_uv:
            s = np.empty((len(stack), min(stack.shape[1:])))
            s[~sc], s[sc] = out_c, out_r
            return s
        parts = []
        for a, b in zip(out_c, out_r):
            full = np.empty((len(stack),) + a.shape[1:], dtype=a.dtype)
            full[~sc], full[sc] = a, b
            parts.append(full)
        return tuple(parts)

    def _locate_failure(self, compute_uv):
        for row, A in enumerate(self.stack):
            try:
                np.linalg.svd(A, full_matrices=False, compute_uv=compute_uv)
            except np.linalg.LinAlgError:
                raise SVDConvergenceError(self.multi_index(row)) from None

    def expand(self, out):
        """Full-spectrum stack from a per-representative result stack."""
        if not self.real:
            return out
        full = np.empty((self.K,) + out.shape[1:], dtype=out.dtype)
        full[self.partners] = np.conj(out)
        full[self.reps] = out
        return full

    def to_tmatrix(self, out):
        full = self.expand(out).reshape(self.scalar_shape + out.shape[1:])
        return TMatrix.from_spectral_slices(full, real=self.real)

    def to_tscalar(self, values):
        full = self.expand(np.asarray(values)).reshape(self.scalar_shape)
        return TScalar.from_spectrum(full, real=self.real)


def _rank_tol(s, dims, tol):
    if tol is not None:
        if tol <= 0:
            raise ValueError("tol must be positive")
        return np.full(len(s), float(tol))
    smax = s[:, 0] if s.shape[1] else np.zeros(len(s))
    return max(dims) * np.finfo(np.float64).eps * smax


# operations -------------------------------------------------------------


def tmat_mul(A, B):
    """Product of a ``D1 x D2`` and a ``D2 x D3`` t-matrix.

    Each spectral slice of the result is the product of the corresponding
    input slices.
    """
    if A.scalar_shape != B.scalar_shape:
        raise ValueError(
            f"scalar shapes differ: {A.scalar_shape} vs {B.scalar_shape}"
        )
    if A.dims[1] != B.dims[0]:
        raise ValueError(f"inner dimensions differ: {A.dims} @ {B.dims}")
    prod = A.spectral_slices() @ B.spectral_slices()
    return TMatrix.from_spectral_slices(prod, real=A.is_real and B.is_real)


def conj_transpose(X):
    """Conjugate transpose; every slice becomes its Hermitian transpose."""
    slices = np.conj(np.swapaxes(X.spectral_slices(), -1, -2))
    return TMatrix.from_spectral_slices(slices, real=X.is_real)


TSVDFactors = namedtuple("TSVDFactors", ["U", "S", "V"])
TSVDFactors.__doc__ = """Factors of ``X = U @ S @ V.H``.

U is ``D1 x D``, S is a diagonal ``D x D`` t-matrix, V is ``D2 x D``, with
``D = min(D1, D2)``."""


def tsvd(X):
    """Tensorial SVD via compact SVDs of the spectral slices.

    Singular vectors are not canonicalized; only products and invariants
    (``U.H @ U = I``, nonincreasing nonnegative slice singular values) are
    meaningful.

    Raises
    ------
    SVDConvergenceError
        If LAPACK fails on a slice; the error carries the slice multi-index.
    """
    sl = _Slices(X)
    U, s, Vh = sl.svd()
    d = s.shape[1]
    S = np.zeros(s.shape + (d,), dtype=np.complex128)
    S[:, np.arange(d), np.arange(d)] = s
    V = np.conj(np.swapaxes(Vh, -1, -2))
    return TSVDFactors(sl.to_tmatrix(U), sl.to_tmatrix(S), sl.to_tmatrix(V))


def _svt(X, tau):
    """Thresholded t-matrix and the nuclear norm of the result."""
    sl = _Slices(X)
    U, s, Vh = sl.svd()
    s = np.maximum(s - tau, 0.0)
    out = (U * s[:, None, :]) @ Vh
    return sl.to_tmatrix(out), float(np.sum(sl.weights * s.sum(axis=1)))


def tsvt(X, tau):
    """Tensorial singular value thresholding.

    Soft-thresholds the singular values of every spectral slice by `tau`;
    this is the proximal operator of the t-matrix nuclear norm.
    """
    if not tau > 0:
        raise ValueError(f"threshold must be positive, got {tau}")
    return _svt(X, tau)[0]


def pseudo_inverse(X, tol=None):
    """Moore-Penrose pseudo-inverse, slice by slice.

    Singular values at or below the rank tolerance (see
    :func:`higher_order_rank`) are treated as zero.
    """
    sl = _Slices(X)
    U, s, Vh = sl.svd()
    cut = _rank_tol(s, X.dims, tol)
    keep = s > cut[:, None]
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    out = np.conj(np.swapaxes(Vh, -1, -2)) @ (inv[:, :, None] * np.conj(np.swapaxes(U, -1, -2)))
    return sl.to_tmatrix(out)


def slice_ranks(X, tol=None):
    """Numerical rank of every spectral slice, shape ``scalar_shape``.

    A singular value counts when it exceeds
    ``max(D1, D2) * eps * (largest singular value of the slice)``, or the
    absolute `tol` when given.
    """
    sl = _Slices(X)
    s = sl.svd(compute_uv=False)
    cut = _rank_tol(s, X.dims, tol)
    ranks = np.sum(s > cut[:, None], axis=1)
    return sl.expand(ranks).reshape(X.scalar_shape)


def higher_order_rank(X, tol=None):
    """Nonnegative t-scalar whose spectrum holds the slice ranks."""
    return TScalar.from_spectrum(slice_ranks(X, tol).astype(np.float64), real=X.is_real)


def tubal_rank(X, tol=None):
    return int(np.max(slice_ranks(X, tol)))


def average_rank(X, tol=None):
    """Mean slice rank as an exact fraction."""
    r = slice_ranks(X, tol)
    return Fraction(int(r.sum()), r.size)


def trace_rank(X, tol=None):
    """Sum of the slice ranks (rank of the direct-sum representation)."""
    return int(np.sum(slice_ranks(X, tol)))


def _check_p(p):
    if not p >= 1:
        raise ValueError(f"Schatten p must be >= 1, got {p}")


def schatten_norm(X, p):
    """Higher-order Schatten p-norm: a nonnegative t-scalar.

    Its spectrum at each Fourier index is the Schatten p-norm of the
    corresponding slice.
    """
    _check_p(p)
    sl = _Slices(X)
    s = sl.svd(compute_uv=False)
    vals = np.max(s, axis=1) if np.isinf(p) else np.sum(s**p, axis=1) ** (1.0 / p)
    return sl.to_tscalar(vals.astype(np.complex128))


def real_schatten(X, p):
    """Schatten p-norm of the direct-sum representation."""
    _check_p(p)
    sl = _Slices(X)
    s = sl.svd(compute_uv=False)
    if np.isinf(p):
        return float(np.max(s)) if s.size else 0.0
    return float(np.sum(sl.weights[:, None] * s**p) ** (1.0 / p))


def nuclear_norm(X):
    return real_schatten(X, 1)


def real_inner_product(X, Y):
    """``Re trace(M(X)^H M(Y))`` over the direct-sum representation.

    This equals half the trace of ``R(X)^T R(Y)`` for the realified 2x2-block
    representation ``R``, without materializing it.
    """
    if X.shape != Y.shape:
        raise ValueError(f"t-matrix shapes differ: {X.shape} vs {Y.shape}")
    return float(np.real(np.vdot(X.spectral_slices(), Y.spectral_slices())))


def direct_sum_representation(X, max_size=DIRECT_SUM_MAX):
    """Block-diagonal ``(K*D1) x (K*D2)`` matrix of the spectral slices.

    Intended as a dense oracle for small instances; refuses to build
    anything with ``K * max(D1, D2) > max_size``.
    """
    if X.K * max(X.dims) > max_size:
        raise ValueError(
            f"direct-sum representation of size {X.K * max(X.dims)} exceeds {max_size}"
        )
    slices = X.spectral_slices().reshape((X.K,) + X.dims)
    return scipy.linalg.block_diag(*slices)


def dump_tsvd(factors, npz_path, csv_path=None):
    """Write TSVD factors to an ``.npz`` archive and singular values to CSV.

    The archive holds the little-endian bodies ``U``, ``S``, ``V``.  The CSV
    has one row per (slice, index) with the slice multi-index spelled as
    ``i1;i2;...``.
    """
    U, S, V = factors
    np.savez(npz_path, U=U.body, S=S.body, V=V.body)
    if csv_path is None:
        return
    spec = S.spectral_slices()
    d = S.dims[0]
    sigma = np.real(spec[..., np.arange(d), np.arange(d)]).reshape(S.K, d)
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["slice", "index", "sigma"])
        for k in range(S.K):
            label = ";".join(str(i) for i in np.unravel_index(k, S.scalar_shape))
            for j in range(d):
                w.writerow([label, j, repr(float(sigma[k, j]))])
