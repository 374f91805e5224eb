"""Pixel-neighborhood lifting of images to t-matrices and back.

An image of shape ``(D1, D2, D3)`` becomes a ``D1 x D2`` t-matrix whose
t-scalars have shape ``(I1, I2, D3)``: entry ``(a, b, c)`` of the t-scalar at
pixel ``(d1, d2)`` is channel ``c`` of the pixel at offset
``(a - I1 // 2, b - I2 // 2)``.  The centre of every neighborhood is the
pixel itself, so down-conversion only has to read the central position.
"""

import enum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import ValidationError
from .spectral import permute_axes, reshape_row_index_first
from .tmatrix import TMatrix
from .tscalar import real_from_residue
from .validation import check_image, check_neighborhood

__all__ = ["Boundary", "as_boundary", "lift_image", "lift_mask", "downconvert", "quantize_uint8"]


class Boundary(str, enum.Enum):
    """How neighborhoods that run past the image border are filled."""

    REPLICATE = "replicate"
    WRAP = "wrap"
    REFLECT = "reflect"


_PAD_MODE = {Boundary.REPLICATE: "edge", Boundary.WRAP: "wrap", Boundary.REFLECT: "reflect"}


def as_boundary(value):
    try:
        return Boundary(value)
    except ValueError:
        choices = ", ".join(b.value for b in Boundary)
        raise ValidationError(f"unknown boundary {value!r}; choose from {choices}") from None


def _gather(arr, neighborhood, boundary):
    i1, i2 = neighborhood
    c1, c2 = i1 // 2, i2 // 2
    d1, d2, _ = arr.shape
    padded = np.pad(arr, ((c1, c1), (c2, c2), (0, 0)), mode=_PAD_MODE[as_boundary(boundary)])
    # windows[d1, d2, c, a, b] = padded[d1 + a, d2 + b, c]
    windows = sliding_window_view(padded, (i1, i2), axis=(0, 1))
    # (I1, I2, D1, D2, D3): one I1 x I2 x D1 x D2 block per channel along mode 5
    up = np.transpose(windows, (3, 4, 0, 1, 2))
    return permute_axes(up, (0, 1, 4, 2, 3))


def lift_image(image, neighborhood=(3, 3), boundary="replicate"):
    """Lift an image to a t-matrix with ``(I1, I2, D3)`` t-scalars.

    Parameters
    ----------
    image : array_like, shape (D1, D2) or (D1, D2, D3)
    neighborhood : (int, int)
        Odd neighborhood extents ``(I1, I2)``, no larger than the image.
    boundary : {"replicate", "wrap", "reflect"}

    Returns
    -------
    TMatrix
        Real t-matrix with body shape ``(I1, I2, D3, D1, D2)``.
    """
    img = check_image(image)
    nb = check_neighborhood(neighborhood, img.shape)
    return TMatrix(_gather(img, nb, boundary))


def lift_mask(observed, neighborhood=(3, 3), boundary="replicate"):
    """Lift a pixel-level observation mask to the lifted entry domain.

    A lifted entry is observed exactly when the pixel it copies is observed.
    """
    observed = np.asarray(observed)
    if observed.dtype != bool:
        raise ValidationError(f"mask must be boolean, got dtype {observed.dtype}")
    if observed.ndim == 2:
        observed = observed[:, :, None]
    if observed.ndim != 3:
        raise ValidationError(f"expected a mask of shape (H, W[, C]), got {observed.shape}")
    if not observed.any():
        raise ValidationError("mask observes no pixels")
    nb = check_neighborhood(neighborhood, observed.shape)
    return _gather(observed, nb, boundary)


def quantize_uint8(values):
    """Round half away from zero and clamp to ``[0, 255]``."""
    values = np.asarray(values, dtype=np.float64)
    rounded = np.sign(values) * np.floor(np.abs(values) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def downconvert(X, quantize=False):
    """Recover an image from a lifted t-matrix by reading neighborhood centres.

    The body is reshaped column-major to ``(I1*I2, D3*D1*D2)``, the central
    row is taken and reshaped column-major to ``(D3, D1, D2)``, then the axes
    are permuted to ``(D1, D2, D3)``.

    Parameters
    ----------
    X : TMatrix or array_like
        Lifted t-matrix, body shape ``(I1, I2, D3, D1, D2)`` with odd I1, I2.
    quantize : bool, default False
        Return ``uint8`` values via :func:`quantize_uint8`.
    """
    body = X.body if isinstance(X, TMatrix) else np.asarray(X)
    if body.ndim != 5:
        raise ValidationError(f"expected a body of shape (I1, I2, D3, D1, D2), got {body.shape}")
    i1, i2, d3, d1, d2 = body.shape
    check_neighborhood((i1, i2))
    if np.iscomplexobj(body):
        body = real_from_residue(body, "lifted t-matrix")
    flat = reshape_row_index_first(body, (i1 * i2, d3 * d1 * d2))
    centre = flat[(i1 * i2 - 1) // 2]
    down = permute_axes(reshape_row_index_first(centre, (d3, d1, d2)), (1, 2, 0))
    return quantize_uint8(down) if quantize else down
