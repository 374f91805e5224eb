"""Higher-order t-matrix algebra and low-rank completion.

T-scalars are complex arrays multiplied by circular convolution; t-matrices
are matrices of t-scalars.  The package provides their algebra (products,
TSVD, thresholding, ranks and norms), ADMM completion solvers, the
pixel-neighborhood lifting of images, and scikit-learn style estimators.
"""

from .completion import CompletionConfig, CompletionTrace, lrmc_admm, mask_keep, tmatrix_admm
from .estimators import HigherOrderTNN, MatrixCompleter, NeighborhoodLifter, TMatrixCompleter
from .exceptions import SVDConvergenceError, ValidationError
from .lifting import Boundary, downconvert, lift_image, lift_mask
from .tmatrix import (
    TMatrix,
    TSVDFactors,
    average_rank,
    conj_transpose,
    direct_sum_representation,
    higher_order_rank,
    nuclear_norm,
    pseudo_inverse,
    real_inner_product,
    real_schatten,
    schatten_norm,
    tmat_mul,
    trace_rank,
    tsvd,
    tsvt,
    tubal_rank,
)
from .tscalar import Order, TScalar, identity, partial_order_cmp, zero

__version__ = "0.1.0"
