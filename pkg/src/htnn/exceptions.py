"""Exception types raised by htnn."""

import numpy as np


class ValidationError(ValueError):
    """Invalid user input (shapes, masks, neighborhoods, file contents)."""


class SVDConvergenceError(np.linalg.LinAlgError):
    """SVD failed to converge on one spectral slice.

    Attributes
    ----------
    slice_index : tuple of int
        Fourier multi-index of the offending slice.
    """

    def __init__(self, slice_index):
        self.slice_index = tuple(int(i) for i in slice_index)
        super().__init__(f"SVD did not converge on spectral slice {self.slice_index}")
