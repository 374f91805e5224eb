"""Generalized scalars (t-scalars).

A t-scalar is an order-N complex array. Addition is entrywise and
multiplication is N-way circular convolution, which the DFT turns into an
entrywise product of spectra.  The spectrum (the DFT of the body) is also
the set of eigenvalues of the t-scalar viewed as a linear operator, which is
what conjugation, nonnegativity, ordering, absolute value and trace are
defined through.
"""

import enum
import numbers

import numpy as np

from .spectral import forward_dft, inverse_dft

__all__ = [
    "TScalar",
    "Order",
    "identity",
    "zero",
    "partial_order_cmp",
    "REAL_RESIDUE_TOL",
]

#: Largest imaginary residue, relative to max(1, |body|), accepted when a
#: spectrum is declared to come from a real-bodied t-scalar.
REAL_RESIDUE_TOL = 1e-9


def real_from_residue(body, what="t-scalar"):
    """Drop the imaginary part of `body` after checking that it is noise."""
    body = np.asarray(body)
    if not np.iscomplexobj(body):
        return body.astype(np.float64, copy=False)
    if body.size:
        scale = max(1.0, float(np.max(np.abs(body.real))))
        residue = float(np.max(np.abs(body.imag)))
        if residue > REAL_RESIDUE_TOL * scale:
            raise ValueError(
                f"{what} is not real: imaginary residue {residue:.3g} exceeds "
                f"{REAL_RESIDUE_TOL:g} * {scale:.3g}"
            )
    return np.ascontiguousarray(body.real)


class Order(enum.Enum):
    """Outcome of comparing two t-scalars under the partial order."""

    GREATER_EQUAL = "greater_equal"
    LESS_EQUAL = "less_equal"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


class TScalar:
    """Element of the algebra of complex arrays of a fixed shape.

    Parameters
    ----------
    body : array_like
        Spatial-domain array of order >= 1.
    real : bool, default False
        Assert that the body is real.  A complex body whose imaginary part is
        below :data:`REAL_RESIDUE_TOL` is accepted and truncated.

    Notes
    -----
    Instances are immutable.  ``x * y`` is the t-scalar product when `y` is a
    TScalar and scalar multiplication when it is a number.
    """

    __slots__ = ("_body",)
    __array_ufunc__ = None

    def __init__(self, body, *, real=False):
        body = np.array(body, dtype=np.complex128)
        if body.ndim < 1:
            raise ValueError("a t-scalar body needs at least one dimension")
        if 0 in body.shape:
            raise ValueError(f"t-scalar shape {body.shape} has an empty extent")
        if real:
            body = real_from_residue(body).astype(np.complex128)
        body.setflags(write=False)
        self._body = body

    @classmethod
    def from_spectrum(cls, spectrum, *, real=False):
        """Build the t-scalar whose DFT is `spectrum`."""
        spectrum = np.asarray(spectrum, dtype=np.complex128)
        return cls(inverse_dft(spectrum), real=real)

    @property
    def body(self):
        return self._body

    @property
    def shape(self):
        return self._body.shape

    @property
    def K(self):
        """Dimension of the algebra (number of body entries)."""
        return self._body.size

    def spectrum(self):
        """Eigenvalues of the t-scalar, i.e. the DFT of its body."""
        return forward_dft(self._body)

    def _coerce(self, other):
        if not isinstance(other, TScalar):
            return None
        if other.shape != self.shape:
            raise ValueError(
                f"t-scalar shapes differ: {self.shape} vs {other.shape}"
            )
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return TScalar(self._body + other._body)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return TScalar(self._body - other._body)

    def __neg__(self):
        return TScalar(-self._body)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return TScalar(complex(other) * self._body)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return TScalar(inverse_dft(self.spectrum() * other.spectrum()))

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return TScalar(complex(other) * self._body)
        return NotImplemented

    def __repr__(self):
        return f"TScalar(shape={self.shape})"

    def allclose(self, other, atol=1e-10, rtol=0.0):
        other = self._coerce(other)
        return bool(np.allclose(self._body, other._body, atol=atol, rtol=rtol))

    def conj(self):
        """Conjugate: the t-scalar whose spectrum is conjugated entrywise."""
        return TScalar.from_spectrum(np.conj(self.spectrum()))

    def abs(self):
        """Higher-order absolute value ``sqrt(x* x)``: spectrum moduli."""
        return TScalar.from_spectrum(np.abs(self.spectrum()))

    def trace(self):
        """Sum of the eigenvalues (spectral entries)."""
        return complex(np.sum(self.spectrum()))

    def default_tol(self):
        """Nonnegativity tolerance: 1e-9 times the largest spectral modulus."""
        return 1e-9 * float(np.max(np.abs(self.spectrum())))

    def is_nonnegative(self, tol=None):
        """True iff every eigenvalue is (numerically) a nonnegative real."""
        spec = self.spectrum()
        if tol is None:
            tol = 1e-9 * float(np.max(np.abs(spec)))
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        return bool(np.all(np.abs(spec.imag) <= tol) and np.all(spec.real >= -tol))

    def compare(self, other, tol=None):
        """See :func:`partial_order_cmp`."""
        return partial_order_cmp(self, other, tol)

    def matrix_representation(self):
        """K x K diagonal matrix carrying the spectrum (C-order multi-index)."""
        return np.diag(self.spectrum().ravel())


def identity(shape):
    """Identity t-scalar: 1 at the first multi-index, 0 elsewhere."""
    body = np.zeros(shape, dtype=np.complex128)
    body[(0,) * body.ndim] = 1.0
    return TScalar(body)


def zero(shape):
    """Zero t-scalar."""
    return TScalar(np.zeros(shape, dtype=np.complex128))


def partial_order_cmp(x, y, tol=None):
    """Classify `x` against `y` by nonnegativity of ``x - y`` and ``y - x``.

    The default tolerance is 1e-9 times the largest spectral modulus of
    either operand.
    """
    if x.shape != y.shape:
        raise ValueError(f"t-scalar shapes differ: {x.shape} vs {y.shape}")
    if tol is None:
        tol = max(x.default_tol(), y.default_tol())
    ge = (x - y).is_nonnegative(tol)
    le = (y - x).is_nonnegative(tol)
    if ge and le:
        return Order.EQUAL
    if ge:
        return Order.GREATER_EQUAL
    if le:
        return Order.LESS_EQUAL
    return Order.INCOMPARABLE
