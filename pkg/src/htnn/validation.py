"""Input validation helpers shared by the solvers, estimators and CLI."""

import numpy as np

from .exceptions import ValidationError


def check_mask(mask, shape, *, allow_full=False, name="mask"):
    """Validate a boolean observation mask (True = observed).

    The observed set must be non-empty and, unless `allow_full`, a proper
    subset of the index domain.
    """
    mask = np.asarray(mask)
    if mask.dtype != bool:
        raise ValidationError(f"{name} must be boolean, got dtype {mask.dtype}")
    if mask.shape != tuple(shape):
        raise ValidationError(
            f"{name} shape {mask.shape} does not match operand shape {tuple(shape)}"
        )
    if not mask.any():
        raise ValidationError(f"{name} observes no entries")
    if not allow_full and mask.all():
        raise ValidationError(f"{name} observes every entry; nothing to complete")
    return mask


def check_observed_finite(M, mask):
    """Observed entries must be finite; missing ones are never read."""
    if not np.all(np.isfinite(M[mask])):
        raise ValidationError("observed entries contain NaN or infinity")


def check_neighborhood(neighborhood, image_shape=None):
    """Normalize ``(I1, I2)`` and check both extents are odd and fit the image."""
    if isinstance(neighborhood, str):
        neighborhood = parse_shape(neighborhood)
    try:
        i1, i2 = (int(n) for n in neighborhood)
    except (TypeError, ValueError):
        raise ValidationError(f"neighborhood must be a pair, got {neighborhood!r}") from None
    for n in (i1, i2):
        if n < 1 or n % 2 == 0:
            raise ValidationError(f"neighborhood extents must be odd and positive, got {i1}x{i2}")
    if image_shape is not None:
        d1, d2 = image_shape[:2]
        if i1 > d1 or i2 > d2:
            raise ValidationError(
                f"neighborhood {i1}x{i2} exceeds image size {d1}x{d2}"
            )
    return i1, i2


def check_image(image, *, allow_nan=False):
    """Return a float64 ``(D1, D2, D3)`` view of a 2-D or 3-D image."""
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[:, :, None]
    if image.ndim != 3 or 0 in image.shape:
        raise ValidationError(f"expected an image of shape (H, W[, C]), got {image.shape}")
    if image.dtype.kind not in "biuf":
        raise ValidationError(f"unsupported image dtype {image.dtype}")
    image = image.astype(np.float64)
    bad = ~np.isfinite(image)
    if allow_nan:
        bad &= ~np.isnan(image)
    if bad.any():
        raise ValidationError("image contains non-finite values")
    return image


def parse_shape(text):
    """Parse ``"3x3x3"`` (or ``"3,3,3"``) into a tuple of ints."""
    parts = str(text).lower().replace(",", "x").split("x")
    try:
        shape = tuple(int(p) for p in parts if p.strip())
    except ValueError:
        raise ValidationError(f"cannot parse shape {text!r}") from None
    if not shape or any(s < 1 for s in shape):
        raise ValidationError(f"invalid shape {text!r}")
    return shape
