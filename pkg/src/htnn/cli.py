"""Command-line interface.

Subcommands::

    htnn synth      phase-transition grid on synthetic low-rank t-matrices
    htnn complete   complete an image with missing entries
    htnn eval       PSNR / RSE between two images
    htnn tsvd-dump  write the TSVD factors of an array or lifted image

Solver options may also come from a TOML file given with ``--config``; keys
are the long option names with dashes or underscores (``tau_min = 1e-6``).
Command-line values win.  Exit status: 0 success, 2 invalid input, 3
numerical failure (SVD failure, or non-convergence with ``--strict``).
"""

import argparse
import json
import logging
import math
import sys

import numpy as np

from .completion import CompletionConfig
from .exceptions import ValidationError
from .experiments import (
    complete_image,
    make_rng,
    phase_grid,
    psnr,
    render_heatmap,
    rse,
    sample_observed,
    write_grid_csv,
)
from .imageio import read_image, read_mask, write_image, write_mask_csv, write_mask_png
from .lifting import Boundary, lift_image
from .tmatrix import TMatrix, dump_tsvd, tsvd
from .validation import parse_shape

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("htnn")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

_DEFAULTS = {
    "tau0": 1e4,
    "alpha": 0.9,
    "tau_min": 1e-6,
    "max_iters": 500,
    "tol": 1e-8,
    "neighborhood": "3x3",
    "boundary": "replicate",
    "seed": 0,
    "missing": None,
    "dim": 40,
    "scalar_shape": "3x3x3",
    "ranks": "2",
    "trials": 1,
    "threshold": 1e-2,
    "jobs": 1,
}


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _add_solver_args(p):
    g = p.add_argument_group("solver")
    g.add_argument("--tau0", type=float, help="initial penalty (default 1e4)")
    g.add_argument("--alpha", type=float, help="penalty decay in (0, 1) (default 0.9)")
    g.add_argument("--tau-min", type=float, help="penalty floor (default 1e-6)")
    g.add_argument("--max-iters", type=int, help="iteration cap (default 500)")
    g.add_argument("--tol", type=float, help="relative residual tolerance (default 1e-8)")


def build_parser():
    parser = argparse.ArgumentParser(prog="htnn", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="TOML file with default option values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="phase-transition grid on synthetic data")
    p.add_argument("--dim", type=int, help="matrix size D (default 40)")
    p.add_argument("--scalar-shape", help="t-scalar shape, e.g. 3x3x3")
    p.add_argument("--ranks", help="comma-separated inner dimensions r")
    p.add_argument("--missing", help="comma-separated missing fractions")
    p.add_argument("--trials", type=int, help="trials per cell (default 1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float, help="RSE success threshold (default 1e-2)")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--heatmap", help="optional PNG rendering of the success rates")
    _add_solver_args(p)

    p = sub.add_parser("complete", help="complete an image with missing entries")
    p.add_argument("input", help="PNG/PPM/PGM image")
    p.add_argument("--out", required=True, help="recovered image path")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--mask", help="PNG bitmap (0 = missing) or CSV list of missing entries")
    src.add_argument("--missing", type=float, help="generate a random mask with this missing fraction")
    p.add_argument("--seed", type=int, help="seed for --missing (default 0)")
    p.add_argument("--save-mask", help="write the mask used (PNG or CSV)")
    p.add_argument("--neighborhood", help="odd neighborhood, e.g. 3x3 (default)")
    p.add_argument("--boundary", choices=[b.value for b in Boundary])
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--trace", help="CSV convergence trace path")
    p.add_argument("--strict", action="store_true", help="exit 3 if ADMM does not converge")
    _add_solver_args(p)

    p = sub.add_parser("eval", help="PSNR and RSE of an image against a reference")
    p.add_argument("recovered")
    p.add_argument("reference")
    p.add_argument("--out", help="write the JSON result here as well")

    p = sub.add_parser("tsvd-dump", help="dump TSVD factors for inspection")
    p.add_argument("input", help=".npy little-endian t-matrix body, or an image")
    p.add_argument("--out", required=True, help="output prefix (<out>.npz, <out>.csv)")
    p.add_argument("--neighborhood", help="lift images with this neighborhood (default 1x1)")
    p.add_argument("--boundary", choices=[b.value for b in Boundary])
    return parser


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    return {k.replace("-", "_"): v for k, v in raw.items()}


def _opt(args, cfg, name, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(name, _DEFAULTS.get(name, default))


def _solver_config(args, cfg):
    return CompletionConfig(
        tau0=float(_opt(args, cfg, "tau0")),
        alpha=float(_opt(args, cfg, "alpha")),
        tau_min=float(_opt(args, cfg, "tau_min")),
        max_iters=int(_opt(args, cfg, "max_iters")),
        rel_tol=float(_opt(args, cfg, "tol")),
    )


def cmd_synth(args, cfg):
    missing = _opt(args, cfg, "missing")
    if missing is None:
        raise ValidationError("synth needs --missing")
    try:
        ranks = _int_list(_opt(args, cfg, "ranks"))
        fractions = _float_list(missing)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    cells = phase_grid(
        D=int(_opt(args, cfg, "dim")),
        scalar_shape=parse_shape(_opt(args, cfg, "scalar_shape")),
        ranks=ranks,
        missing_fractions=fractions,
        trials=int(_opt(args, cfg, "trials")),
        threshold=float(_opt(args, cfg, "threshold")),
        seed=int(_opt(args, cfg, "seed")),
        config=_solver_config(args, cfg),
        n_jobs=int(_opt(args, cfg, "jobs")),
    )
    write_grid_csv(cells, args.out)
    if args.heatmap:
        render_heatmap(cells, args.heatmap)
    for c in cells:
        log.info("r=%d rho=%g success=%.2f mean_rse=%.3g", *c)
    return EXIT_OK


def cmd_complete(args, cfg):
    image = read_image(args.input)
    if args.mask:
        observed = read_mask(args.mask, image.shape)
    else:
        missing = _opt(args, cfg, "missing")
        if missing is None:
            raise ValidationError("complete needs --mask or --missing")
        rng = make_rng(int(_opt(args, cfg, "seed")))
        observed = sample_observed(rng, image.shape, float(missing))
    if args.save_mask:
        if args.save_mask.lower().endswith(".csv"):
            write_mask_csv(args.save_mask, observed)
        else:
            write_mask_png(args.save_mask, observed)
    recovered, report, trace = complete_image(
        image,
        observed,
        neighborhood=parse_shape(_opt(args, cfg, "neighborhood")),
        config=_solver_config(args, cfg),
        boundary=_opt(args, cfg, "boundary"),
    )
    write_image(args.out, recovered)
    if args.report:
        report.write_json(args.report)
    if args.trace:
        trace.to_csv(args.trace)
    print(report.to_json())
    if not report.converged:
        log.warning(
            "ADMM did not converge in %d iterations (relative residual %.3g)",
            trace.n_iter, trace.relative_residual,
        )
        if args.strict or cfg.get("strict"):
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_eval(args, cfg):
    a, b = read_image(args.recovered), read_image(args.reference)
    value = psnr(a, b)
    out = {
        "psnr_db": "inf" if math.isinf(value) else value,
        "rse": rse(b / 255.0, a / 255.0),
    }
    text = json.dumps(out, indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_tsvd_dump(args, cfg):
    if args.input.lower().endswith(".npy"):
        try:
            X = TMatrix(np.load(args.input))
        except (OSError, ValueError, TypeError) as exc:
            raise ValidationError(f"cannot load {args.input}: {exc}") from exc
    else:
        nb = parse_shape(args.neighborhood or cfg.get("neighborhood", "1x1"))
        X = lift_image(read_image(args.input) / 255.0, nb, _opt(args, cfg, "boundary"))
    dump_tsvd(tsvd(X), args.out + ".npz", args.out + ".csv")
    log.info("wrote %s.npz and %s.csv", args.out, args.out)
    return EXIT_OK


_COMMANDS = {
    "synth": cmd_synth,
    "complete": cmd_complete,
    "eval": cmd_eval,
    "tsvd-dump": cmd_tsvd_dump,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except ValidationError as exc:
        print(f"htnn: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except np.linalg.LinAlgError as exc:
        print(f"htnn: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
