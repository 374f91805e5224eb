"""Reading and writing images and observation masks.

Images are 8-bit PNG, binary PPM (P6) or PGM (P5) files and are returned as
``uint8`` arrays of shape ``(H, W, C)``.  Masks are either PNG bitmaps
(0 = missing, 255 = observed) or CSV index lists naming the missing entries
with a ``row,col[,channel]`` header; a row without a channel marks the pixel
missing in every channel.
"""

import csv
from importlib import resources

import numpy as np
from PIL import Image

from .exceptions import ValidationError

__all__ = [
    "read_image",
    "write_image",
    "read_mask",
    "write_mask_png",
    "write_mask_csv",
    "load_sample_image",
    "SAMPLE_IMAGES",
]

SAMPLE_IMAGES = ("astronaut", "chelsea", "coffee")


def read_image(path):
    try:
        with Image.open(path) as im:
            if im.mode in ("1", "LA", "I", "I;16"):
                im = im.convert("L")
            elif im.mode not in ("L", "RGB"):
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read image {path}: {exc}") from exc
    return arr[:, :, None] if arr.ndim == 2 else arr


def write_image(path, image):
    """Write a ``uint8`` image; the format follows the file extension."""
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValidationError(f"images are written as uint8, got {image.dtype}")
    if image.ndim == 3 and image.shape[2] == 1:
        image = image[:, :, 0]
    if image.ndim == 3 and image.shape[2] != 3:
        raise ValidationError(f"cannot store {image.shape[2]} channels as PNG/PPM")
    Image.fromarray(image).save(path)


def _read_mask_csv(path, shape):
    d1, d2, d3 = shape
    observed = np.ones(shape, dtype=bool)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header not in (["row", "col"], ["row", "col", "channel"]):
            raise ValidationError(f"{path}: expected header row,col[,channel], got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                idx = tuple(int(v) for v in row)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-integer index {row}") from None
            if len(idx) != len(header):
                raise ValidationError(f"{path}:{lineno}: expected {len(header)} fields")
            limits = (d1, d2, d3)[: len(idx)]
            if any(not 0 <= i < n for i, n in zip(idx, limits)):
                raise ValidationError(
                    f"{path}:{lineno}: index {idx} out of range for image of shape {shape}"
                )
            if len(idx) == 2:
                observed[idx[0], idx[1], :] = False
            else:
                observed[idx] = False
    return observed


def read_mask(path, shape):
    """Read an observation mask for an image of shape ``(H, W, C)``.

    Returns a boolean array of that shape, True where observed.
    """
    shape = tuple(shape)
    if str(path).lower().endswith(".csv"):
        return _read_mask_csv(path, shape)
    arr = read_image(path)
    if arr.shape[:2] != shape[:2]:
        raise ValidationError(
            f"mask {path} has size {arr.shape[:2]}, image has size {shape[:2]}"
        )
    if arr.shape[2] == 1:
        arr = np.repeat(arr, shape[2], axis=2)
    elif arr.shape[2] != shape[2]:
        raise ValidationError(f"mask {path} has {arr.shape[2]} channels, image has {shape[2]}")
    return arr > 127


def write_mask_png(path, observed):
    write_image(path, np.where(np.asarray(observed, dtype=bool), 255, 0).astype(np.uint8))


def write_mask_csv(path, observed):
    observed = np.asarray(observed, dtype=bool)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "channel"])
        for idx in np.argwhere(~observed):
            w.writerow([int(i) for i in idx])


def load_sample_image(name):
    """One of the bundled 64x64 RGB test images (see :data:`SAMPLE_IMAGES`)."""
    if name not in SAMPLE_IMAGES:
        raise ValueError(f"unknown sample image {name!r}; choose from {SAMPLE_IMAGES}")
    with resources.as_file(resources.files("htnn.data") / f"{name}.png") as p:
        return read_image(p)
