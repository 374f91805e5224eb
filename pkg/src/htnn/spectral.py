"""Multidimensional DFT, axis permutation and reshape primitives.

Arrays are numpy ``complex128`` (or ``float64``) arrays stored in numpy's
default C order, i.e. the last index varies fastest.  The column-major
("row-index-first") relinearization used when down-converting lifted images
is a separate, explicit operation: :func:`reshape_row_index_first`.

Transforms are unnormalized in the forward direction and carry the full
``1/K`` factor in the inverse, so that circular convolution maps to a plain
Hadamard product of spectra.
"""

import numpy as np

__all__ = [
    "forward_dft",
    "inverse_dft",
    "permute_axes",
    "inverse_permutation",
    "reshape_row_index_first",
]


def _check_modes(x, modes):
    ndim = x.ndim
    if ndim < 1:
        raise ValueError("array must have at least one dimension")
    seen = set()
    out = []
    for m in modes:
        if isinstance(m, (bool, np.bool_)) or not isinstance(m, (int, np.integer)):
            raise ValueError(f"mode {m!r} is not an integer")
        if not -ndim <= m < ndim:
            raise ValueError(f"mode {m} is out of range for an array of order {ndim}")
        m = int(m) % ndim
        if m in seen:
            raise ValueError(f"mode {m} is listed more than once")
        seen.add(m)
        out.append(m)
    return tuple(out)


def forward_dft(x, modes=None):
    """Unnormalized multi-mode DFT of `x` along `modes`.

    Equivalent to multiplying ``x`` along every listed mode by the Fourier
    matrix ``W[j, k] = exp(-2j*pi*j*k/n)``.  Any extent is accepted (numpy's
    pocketfft backend handles mixed radices and large primes).

    Parameters
    ----------
    x : array_like
        Input array of order >= 1.
    modes : sequence of int, optional
        Axes to transform; defaults to all axes.

    Returns
    -------
    ndarray of complex128, same shape as `x`.
    """
    x = np.asarray(x)
    modes = tuple(range(x.ndim)) if modes is None else _check_modes(x, modes)
    if not modes:
        return x.astype(np.complex128, copy=True)
    return np.fft.fftn(x, axes=modes)


def inverse_dft(x, modes=None):
    """Inverse of :func:`forward_dft`, with the ``1/K`` factor applied here."""
    x = np.asarray(x)
    modes = tuple(range(x.ndim)) if modes is None else _check_modes(x, modes)
    if not modes:
        return x.astype(np.complex128, copy=True)
    return np.fft.ifftn(x, axes=modes)


def _check_perm(perm, ndim):
    perm = tuple(perm)
    if len(perm) != ndim or sorted(int(p) for p in perm) != list(range(ndim)):
        raise ValueError(f"{perm} is not a permutation of range({ndim})")
    return tuple(int(p) for p in perm)


def permute_axes(x, perm):
    """Reorder the axes of `x`: output axis ``j`` is input axis ``perm[j]``.

    Returns a fresh contiguous array, never a view of the input.
    """
    x = np.asarray(x)
    return np.ascontiguousarray(np.transpose(x, _check_perm(perm, x.ndim)))


def inverse_permutation(perm):
    """Permutation that undoes `perm` under :func:`permute_axes`."""
    perm = _check_perm(perm, len(tuple(perm)))
    return tuple(int(i) for i in np.argsort(perm))


def reshape_row_index_first(x, new_shape):
    """Reshape `x` using the first-index-fastest (column-major) protocol.

    This is MATLAB's ``reshape``; e.g. ``[[1, 2], [3, 4]]`` reshaped to
    ``(4, 1)`` gives ``1, 3, 2, 4``.
    """
    x = np.asarray(x)
    new_shape = tuple(int(s) for s in np.atleast_1d(new_shape))
    if any(s < 0 for s in new_shape) or int(np.prod(new_shape)) != x.size:
        raise ValueError(
            f"cannot reshape array of size {x.size} into shape {new_shape}"
        )
    return np.ascontiguousarray(np.reshape(x, new_shape, order="F"))
