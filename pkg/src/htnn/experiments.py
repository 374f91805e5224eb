"""Synthetic recovery runs, phase-transition grids and image completion runs.

Random numbers come from numpy's PCG64 bit generator seeded through
:class:`numpy.random.SeedSequence`.  Normal variates are drawn with the
Box-Muller transform from PCG64 uniforms (not numpy's ziggurat), and missing
entries are chosen by ranking uniform keys, so that both are simple to
reproduce outside numpy.
"""

import csv
import json
import math
import time
import warnings
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from PIL import Image
from sklearn.exceptions import ConvergenceWarning

from .completion import CompletionConfig, tmatrix_admm
from .estimators import HigherOrderTNN
from .exceptions import ValidationError
from .lifting import as_boundary, quantize_uint8
from .tmatrix import TMatrix, tmat_mul
from .validation import check_neighborhood

__all__ = [
    "SyntheticSpec",
    "EvalReport",
    "GridCell",
    "make_rng",
    "standard_normal",
    "sample_observed",
    "gen_synthetic",
    "rse",
    "psnr",
    "run_synthetic",
    "phase_grid",
    "write_grid_csv",
    "render_heatmap",
    "complete_image",
    "write_records_csv",
]


def make_rng(*key):
    """PCG64 generator seeded from a tuple of non-negative integers."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


def standard_normal(rng, shape):
    """Standard normal samples by the Box-Muller transform.

    Pairs of uniforms ``(u1, u2)`` are drawn in order; each pair yields
    ``sqrt(-2 log(1 - u1)) * cos(2 pi u2)`` followed by the matching sine
    term, and the sequence is truncated to ``prod(shape)``.
    """
    n = int(np.prod(shape))
    u = rng.random(2 * ((n + 1) // 2)).reshape(-1, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    z = np.column_stack((radius * np.cos(angle), radius * np.sin(angle))).ravel()
    return z[:n].reshape(shape)


def sample_observed(rng, shape, missing):
    """Observation mask with ``round(missing * size)`` entries missing.

    Missing entries are sampled without replacement: the entries with the
    smallest uniform keys (stable order on ties) are removed.
    """
    if not 0 <= missing < 1:
        raise ValidationError(f"missing fraction must lie in [0, 1), got {missing}")
    size = int(np.prod(shape))
    n_missing = int(round(missing * size))
    keys = rng.random(size)
    observed = np.ones(size, dtype=bool)
    observed[np.argsort(keys, kind="stable")[:n_missing]] = False
    return observed.reshape(shape)


@dataclass(frozen=True)
class SyntheticSpec:
    """Random low-rank t-matrix completion instance.

    ``Y = P @ Q`` with ``P`` of size ``D x r`` and ``Q`` of size ``r x D``,
    real standard-normal bodies, and a fraction `missing` of the entries of
    the underlying array removed uniformly at random.
    """

    D: int
    r: int
    missing: float
    scalar_shape: tuple = (3, 3, 3)
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.r <= self.D:
            raise ValidationError(f"need 1 <= r <= D, got r={self.r}, D={self.D}")
        if not 0 < self.missing < 1:
            raise ValidationError(f"missing fraction must lie in (0, 1), got {self.missing}")
        object.__setattr__(self, "scalar_shape", tuple(int(s) for s in self.scalar_shape))


def gen_synthetic(spec):
    """Return ``(Y, observed)`` for a :class:`SyntheticSpec`.

    Draw order from the seeded generator: body of P, body of Q, then the
    mask keys.
    """
    rng = make_rng(spec.seed)
    shape = spec.scalar_shape
    P = TMatrix(standard_normal(rng, shape + (spec.D, spec.r)))
    Q = TMatrix(standard_normal(rng, shape + (spec.r, spec.D)))
    Y = tmat_mul(P, Q)
    return Y, sample_observed(rng, Y.shape, spec.missing)


def _array(x):
    return np.asarray(x.body if isinstance(x, TMatrix) else x)


def rse(truth, estimate):
    """Relative Frobenius error ``||truth - estimate|| / ||truth||``."""
    truth, estimate = _array(truth), _array(estimate)
    if truth.shape != estimate.shape:
        raise ValidationError(f"shapes differ: {truth.shape} vs {estimate.shape}")
    denom = np.linalg.norm(truth)
    if denom == 0:
        raise ValidationError("RSE is undefined for an all-zero reference")
    return float(np.linalg.norm(truth - estimate) / denom)


def _unit_scale(img):
    img = np.asarray(img)
    return img / 255.0 if img.dtype == np.uint8 else img.astype(np.float64)


def psnr(recovered, reference):
    """PSNR in dB with peak value 1.

    ``uint8`` inputs are divided by 255; float inputs are taken to be
    normalized already.  Identical images give ``math.inf``.
    """
    a, b = _unit_scale(recovered), _unit_scale(reference)
    if a.shape != b.shape:
        raise ValidationError(f"shapes differ: {a.shape} vs {b.shape}")
    err = float(np.sum((a - b) ** 2))
    if err == 0:
        return math.inf
    return 10.0 * math.log10(a.size / err)


@dataclass
class EvalReport:
    rse: float
    psnr_db: float = None
    iterations: int = 0
    converged: bool = False
    wall_time: float = 0.0
    config: dict = field(default_factory=dict)

    def to_json(self):
        d = asdict(self)
        if d["psnr_db"] is not None and math.isinf(d["psnr_db"]):
            d["psnr_db"] = "inf"
        return json.dumps(d, indent=2, sort_keys=True)

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")


def run_synthetic(spec, config=None, callback=None):
    """Complete one synthetic instance; returns ``(EvalReport, trace)``."""
    config = config or CompletionConfig()
    Y, observed = gen_synthetic(spec)
    t0 = time.perf_counter()
    X, trace = tmatrix_admm(Y, observed, config, callback)
    report = EvalReport(
        rse=rse(Y, X),
        iterations=trace.n_iter,
        converged=trace.converged,
        wall_time=time.perf_counter() - t0,
        config={**asdict(spec), **config.to_dict()},
    )
    return report, trace


GridCell = namedtuple("GridCell", ["r", "rho", "success_rate", "mean_rse"])


def _cell_seed(seed, r, rho, trial):
    """Per-trial seed derived only from ``(seed, r, rho, trial)``."""
    key = [int(seed), int(r), int(round(rho * 1_000_000)), int(trial)]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def _trial_rse(args):
    D, scalar_shape, r, rho, seed, config = args
    spec = SyntheticSpec(D=D, r=r, missing=rho, scalar_shape=scalar_shape, seed=seed)
    return run_synthetic(spec, config)[0].rse


def phase_grid(D, scalar_shape, ranks, missing_fractions, trials=1, threshold=1e-2,
               seed=0, config=None, n_jobs=1):
    """Success rate and mean RSE over a grid of ranks and missing fractions.

    A trial succeeds when its RSE is below `threshold`.  Every trial gets its
    own seed derived from ``(seed, r, rho, trial)``, so the grid does not
    depend on `n_jobs` or on evaluation order.

    Returns
    -------
    list of GridCell
        Ordered by rank, then missing fraction.
    """
    ranks, missing_fractions = list(ranks), list(missing_fractions)
    if not ranks or not missing_fractions or trials < 1:
        raise ValidationError("ranks, missing fractions and trials must be non-empty")
    config = config or CompletionConfig()
    cells = [(r, rho) for r in ranks for rho in missing_fractions]
    jobs = [
        (D, tuple(scalar_shape), r, rho, _cell_seed(seed, r, rho, t), config)
        for r, rho in cells
        for t in range(trials)
    ]
    if n_jobs == 1:
        results = [_trial_rse(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_trial_rse, jobs))
    out = []
    for i, (r, rho) in enumerate(cells):
        errs = results[i * trials:(i + 1) * trials]
        ok = sum(1 for e in errs if e < threshold)
        out.append(GridCell(r, rho, ok / trials, float(np.mean(errs))))
    return out


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return "x".join(str(i) for i in v)
    return v


def write_records_csv(rows, path_or_file):
    """Write a list of dicts (or namedtuples) as UTF-8 CSV with a header row."""
    rows = [r._asdict() if hasattr(r, "_asdict") else dict(r) for r in rows]
    if not rows:
        raise ValueError("no rows to write")

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(rows[0].keys())
        for r in rows:
            w.writerow([_fmt(v) for v in r.values()])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            emit(fh)


def write_grid_csv(cells, path_or_file):
    """CSV with columns ``r, rho, success_rate, mean_rse``."""
    write_records_csv(cells, path_or_file)


def render_heatmap(cells, path, cell_px=24):
    """Grey-scale success map: white = always succeeds, black = never.

    Rows are ranks (smallest at the bottom), columns missing fractions.
    """
    ranks = sorted({c.r for c in cells})
    rhos = sorted({c.rho for c in cells})
    grid = np.zeros((len(ranks), len(rhos)))
    for c in cells:
        grid[len(ranks) - 1 - ranks.index(c.r), rhos.index(c.rho)] = c.success_rate
    pix = np.kron(np.round(grid * 255), np.ones((cell_px, cell_px))).astype(np.uint8)
    Image.fromarray(pix).save(path)


def complete_image(image, observed, neighborhood=(3, 3), config=None, boundary="replicate",
                   callback=None):
    """Complete an 8-bit image with missing entries.

    The image is scaled to [0, 1], completed with :class:`HigherOrderTNN`,
    and re-quantized to ``uint8``.  PSNR and RSE are measured against
    `image` itself, so pass the undamaged image when it is known.
    `callback` is passed to the solver and sees the lifted iterates.

    Returns
    -------
    recovered : ndarray of uint8
    report : EvalReport
    trace : CompletionTrace
    """
    config = config or CompletionConfig()
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValidationError(f"expected a uint8 image, got {image.dtype}")
    if image.ndim == 2:
        image = image[:, :, None]
    observed = np.asarray(observed, dtype=bool)
    if observed.shape != image.shape:
        raise ValidationError(
            f"mask shape {observed.shape} does not match image shape {image.shape}"
        )
    unit = np.where(observed, image / 255.0, np.nan)
    est = HigherOrderTNN(
        neighborhood=neighborhood,
        boundary=boundary,
        tau0=config.tau0,
        alpha=config.alpha,
        tau_min=config.tau_min,
        max_iter=config.max_iters,
        tol=config.rel_tol,
    )
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        est.fit(unit, callback=callback)
    elapsed = time.perf_counter() - t0
    recovered = quantize_uint8(est.completed_ * 255.0)
    report = EvalReport(
        rse=rse(image / 255.0, recovered / 255.0),
        psnr_db=psnr(recovered, image),
        iterations=est.n_iter_,
        converged=est.converged_,
        wall_time=elapsed,
        config={
            **config.to_dict(),
            "neighborhood": list(check_neighborhood(neighborhood)),
            "boundary": as_boundary(boundary).value,
        },
    )
    return recovered, report, est.trace_
