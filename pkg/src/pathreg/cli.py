"""Command-line front end.

Subcommands: ``analyze`` (symbolic regularity report), ``verify`` (kernel
numerics against the prediction), ``sample`` (seeded draws to CSV plus a
JSON sidecar), ``estimate`` (path exponents from a samples file or an
inline draw), and ``report`` (combined JSON plus plot-ready surface and
sample files).

Exit codes are a stable contract: 0 success (including a log-flagged
verification), 1 verification failure, 2 parse or usage error, 3 runtime
or domain error.  All outputs are deterministic given the flags and seed;
files are written atomically.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .dsl import ParseError, parse_kernel, print_kernel
from .kernels import Kernel, KernelError, ParameterError, pairwise
from .regularity import infer_regularity, report_to_dict
from .sampling import (
    Axis,
    Grid,
    PathSamples,
    read_samples_csv,
    sample_paths,
    write_samples_csv,
    write_sidecar,
)
from .structure import (
    EstimateConfig,
    EstimateResult,
    axiswise_regularity,
    estimate_path_regularity,
)
from .verify import VerifyConfig, verify_regularity, verify_to_dict

__all__ = ["main"]

_DESK_SEED = 42
_DESK_COUNT_1D = 200
_DESK_COUNT_2D = 100
_DESK_GRID_1D = "0.25:1.25:4097"
_DESK_GRID_2D = "0:1:128,0:1:128"


def _parse_grid(text: str) -> Grid:
    axes = []
    for part in text.split(","):
        pieces = part.split(":")
        if len(pieces) != 3:
            raise ValueError(f"grid axis {part!r} is not of the form start:stop:count")
        start, stop, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
        axes.append(Axis(start, stop, count))
    return Grid(tuple(axes))


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return
    writer = csv.writer(sys.stdout)
    for key, value in _flatten(payload):
        writer.writerow([key, value])


def _flatten(obj, prefix=""):
    rows = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows.extend(_flatten(v, f"{prefix}{k}." if isinstance(v, (dict, list)) else f"{prefix}{k}"))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}{i}." if isinstance(v, (dict, list)) else f"{prefix}{i}"))
    else:
        rows.append((prefix, obj))
    return rows


def _atomic_json(payload: dict, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _analyze_payload(expr: Kernel) -> dict:
    return {"kernel": print_kernel(expr), **report_to_dict(infer_regularity(expr))}


def _estimate_payload(result: EstimateResult, axis=None) -> dict:
    out: dict = {"m_used": result.m_used}
    if axis is not None:
        out["axis"] = axis
    if result.degenerate:
        out["degenerate"] = True
        return out
    if result.s_hat is not None:
        out["s_hat"] = result.s_hat
    else:
        out["lower_bound"] = result.lower_bound
    if result.fit is not None:
        out.update(
            slope=result.fit.slope,
            r2=result.fit.r_squared,
            lags=list(result.fit.scales),
        )
    return out


def _estimate_samples(samples: PathSamples, cfg: EstimateConfig) -> dict:
    if samples.grid.dim == 1:
        return _estimate_payload(estimate_path_regularity(samples, cfg))
    first, second = axiswise_regularity(samples, cfg)
    return {
        "axes": [_estimate_payload(first, axis=0), _estimate_payload(second, axis=1)]
    }


def _desk_defaults(args, expr: Kernel | None) -> None:
    if args.profile != "desk":
        return
    if getattr(args, "seed", None) is None:
        args.seed = _DESK_SEED
    dim = expr.dim if expr is not None else 1
    if getattr(args, "grid", None) is None:
        args.grid = _DESK_GRID_1D if dim == 1 else _DESK_GRID_2D
    if getattr(args, "count", None) is None:
        args.count = _DESK_COUNT_1D if dim == 1 else _DESK_COUNT_2D


def _require(args, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise _UsageError(f"missing required flags: {', '.join('--' + n for n in missing)}")


class _UsageError(Exception):
    pass


def _cmd_analyze(args) -> int:
    expr = parse_kernel(args.kernel)
    _emit(_analyze_payload(expr), args.format)
    return 0


def _cmd_verify(args) -> int:
    expr = parse_kernel(args.kernel)
    cfg = VerifyConfig()
    if args.tol is not None:
        cfg = replace(cfg, tol=args.tol, log_tol=max(args.tol, cfg.log_tol))
    if args.max_order is not None:
        cfg = replace(cfg, max_order=args.max_order)
    report = verify_regularity(expr, cfg=cfg)
    payload = {"kernel": print_kernel(expr), **verify_to_dict(report)}
    _emit(payload, args.format)
    return 0 if report.verdict in ("pass", "log-flagged") else 1


def _cmd_sample(args) -> int:
    expr = parse_kernel(args.kernel)
    _desk_defaults(args, expr)
    _require(args, ["grid", "count", "seed", "out"])
    grid = _parse_grid(args.grid)
    samples = sample_paths(expr, grid, args.count, args.seed)
    csv_path = args.out if args.out.endswith(".csv") else f"{args.out}.csv"
    write_samples_csv(samples, csv_path)
    sidecar = f"{os.path.splitext(csv_path)[0]}.json"
    write_sidecar(samples, sidecar)
    print(csv_path)
    print(sidecar)
    return 0


def _cmd_estimate(args) -> int:
    cfg = EstimateConfig()
    if args.samples is not None:
        samples = read_samples_csv(args.samples)
        payload = {"samples": args.samples, **_estimate_samples(samples, cfg)}
    else:
        if args.kernel is None:
            raise _UsageError("estimate needs --samples or --kernel with a grid request")
        expr = parse_kernel(args.kernel)
        _desk_defaults(args, expr)
        _require(args, ["grid", "count", "seed"])
        samples = sample_paths(expr, _parse_grid(args.grid), args.count, args.seed)
        payload = {"kernel": print_kernel(expr), **_estimate_samples(samples, cfg)}
    _emit(payload, args.format)
    return 0


def _cmd_report(args) -> int:
    expr = parse_kernel(args.kernel)
    _desk_defaults(args, expr)
    analyze = _analyze_payload(expr)
    vreport = verify_regularity(expr)
    payload: dict = {
        "kernel": print_kernel(expr),
        "analyze": analyze,
        "verify": verify_to_dict(vreport),
    }
    files: dict = {}
    prefix = args.out or "report"
    if args.no_sample:
        payload["estimate"] = None
        payload["estimate_skipped"] = "sampling disabled by --no-sample"
    else:
        _require(args, ["grid", "count", "seed"])
        grid = _parse_grid(args.grid)
        samples = sample_paths(expr, grid, args.count, args.seed)
        payload["estimate"] = _estimate_samples(samples, EstimateConfig())
        samples_csv = f"{prefix}_samples.csv"
        write_samples_csv(samples, samples_csv)
        write_sidecar(samples, f"{prefix}_samples.json")
        files["samples"] = samples_csv
        files["surface"] = f"{prefix}_surface.csv"
        _write_surface(expr, grid, files["surface"])
    payload["files"] = files
    _atomic_json(payload, f"{prefix}.json")
    _emit(payload, args.format)
    return 0 if vreport.verdict in ("pass", "log-flagged") else 1


def _write_surface(expr: Kernel, grid: Grid, path: str) -> None:
    """Kernel values against the grid centre, one grid point per row."""
    pts = grid.points()
    centre = np.array([(a.start + a.stop) / 2.0 for a in grid.axes])
    values = pairwise(expr, pts, centre[None, :])[:, 0]
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow((["x"] if grid.dim == 1 else ["x", "y"]) + ["k"])
        for r in range(pts.shape[0]):
            w.writerow([f"{v:.17g}" for v in pts[r]] + [f"{values[r]:.17g}"])
    os.replace(tmp, path)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathreg",
        description="Sample-path regularity of Gaussian processes from covariance kernels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, kernel_required=True):
        p.add_argument("--kernel", "-k", required=kernel_required, help="kernel DSL expression")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--profile", choices=("desk",), default=None)

    p = sub.add_parser("analyze", help="symbolic regularity report")
    add_common(p)

    p = sub.add_parser("verify", help="numeric verification of the prediction")
    add_common(p)
    p.add_argument("--tol", type=float, default=None, help="exponent tolerance (default 0.15)")
    p.add_argument("--max-order", dest="max_order", type=int, default=None)

    p = sub.add_parser("sample", help="draw seeded sample paths to CSV")
    add_common(p)
    p.add_argument("--grid", help="start:stop:count[,start:stop:count]")
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output CSV path (sidecar JSON alongside)")

    p = sub.add_parser("estimate", help="estimate path regularity from draws")
    add_common(p, kernel_required=False)
    p.add_argument("--samples", help="CSV produced by the sample command")
    p.add_argument("--grid")
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("report", help="combined analyze+verify+estimate report")
    add_common(p)
    p.add_argument("--grid")
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output prefix for the report files")
    p.add_argument("--no-sample", dest="no_sample", action="store_true")
    return parser


_COMMANDS = {
    "analyze": _cmd_analyze,
    "verify": _cmd_verify,
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ParameterError, _UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KernelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
