"""Slow, independent reference implementations used only by the tests.

Nothing here calls numpy.fft or the package's spectral code, so agreement
with the library is a genuine cross-check.
"""

import itertools

import numpy as np


def dft_matrix(n):
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def brute_dft(x, axes=None):
    """Multi-mode unnormalized DFT by explicit matrix products per axis."""
    x = np.asarray(x, dtype=complex)
    axes = range(x.ndim) if axes is None else axes
    for ax in axes:
        x = np.moveaxis(np.tensordot(dft_matrix(x.shape[ax]), np.moveaxis(x, ax, 0), axes=1), 0, ax)
    return x


def brute_idft(x, axes=None):
    x = np.asarray(x, dtype=complex)
    axes = range(x.ndim) if axes is None else axes
    for ax in axes:
        n = x.shape[ax]
        F = dft_matrix(n).conj() / n
        x = np.moveaxis(np.tensordot(F, np.moveaxis(x, ax, 0), axes=1), 0, ax)
    return x


def circular_convolution(x, y):
    """Direct O(K^2) N-way circular convolution with modular indices."""
    x, y = np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)
    shape = x.shape
    out = np.zeros(shape, dtype=complex)
    idx = list(itertools.product(*(range(n) for n in shape)))
    for i in idx:
        acc = 0j
        for j in idx:
            k = tuple((a - b) % n for a, b, n in zip(i, j, shape))
            acc += x[j] * y[k]
        out[i] = acc
    return out


def naive_tmat_mul(A, B, nscalar):
    """Matrix product looping over entries with convolution as scalar product."""
    shape = A.shape[:nscalar]
    d1, d2 = A.shape[nscalar:]
    d3 = B.shape[-1]
    out = np.zeros(shape + (d1, d3), dtype=complex)
    for i in range(d1):
        for j in range(d3):
            acc = np.zeros(shape, dtype=complex)
            for k in range(d2):
                acc += circular_convolution(A[..., i, k], B[..., k, j])
            out[..., i, j] = acc
    return out


def classical_svt(A, tau):
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    return (U * np.maximum(s - tau, 0.0)) @ Vh


def realification(A):
    """Replace each complex entry a + ib by the real block [[a, -b], [b, a]]."""
    A = np.asarray(A, dtype=complex)
    m, n = A.shape
    R = np.zeros((2 * m, 2 * n))
    R[0::2, 0::2] = A.real
    R[0::2, 1::2] = -A.imag
    R[1::2, 0::2] = A.imag
    R[1::2, 1::2] = A.real
    return R


def block_diag(blocks):
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r, c = r + b.shape[0], c + b.shape[1]
    return out


def spectral_slices(body, nscalar):
    """(K, D1, D2) slices in C order of the scalar multi-index."""
    spec = brute_dft(body, axes=range(nscalar))
    return spec.reshape((-1,) + body.shape[nscalar:])


def neighborhood_members(shape2d, pixel, nb):
    """Positions ((d1, d2), (a, b)) of every lifted copy of an interior pixel."""
    H, W = shape2d
    i1, i2 = nb
    c1, c2 = i1 // 2, i2 // 2
    hits = []
    for d1 in range(H):
        for d2 in range(W):
            for a in range(i1):
                for b in range(i2):
                    if (d1 + a - c1, d2 + b - c2) == tuple(pixel):
                        hits.append(((d1, d2), (a, b)))
    return hits


def lift_loop(image, nb, boundary="replicate"):
    """Pixel-by-pixel lift with explicit boundary index arithmetic.

    Returns the little-endian body of shape (I1, I2, D3, D1, D2).
    """
    H, W, C = image.shape
    i1, i2 = nb
    out = np.empty((i1, i2, C, H, W))

    def fix(i, n):
        if 0 <= i < n:
            return i
        if boundary == "replicate":
            return min(max(i, 0), n - 1)
        if boundary == "wrap":
            return i % n
        # mirror without repeating the edge sample
        period = 2 * (n - 1)
        i = abs(i) % period if period else 0
        return period - i if i >= n else i

    for d1 in range(H):
        for d2 in range(W):
            for a in range(i1):
                for b in range(i2):
                    r = fix(d1 + a - i1 // 2, H)
                    s = fix(d2 + b - i2 // 2, W)
                    out[a, b, :, d1, d2] = image[r, s, :]
    return out


def column_major_index(index, shape):
    """Linear index with the first subscript varying fastest."""
    lin, stride = 0, 1
    for i, n in zip(index, shape):
        lin += i * stride
        stride *= n
    return lin
