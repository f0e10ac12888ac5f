"""Seeded GP sample-path generation on 1-D and 2-D grids.

Draws are rows L z where L is the jittered Cholesky factor of the Gram
matrix and z comes from a counter-based generator: draw i of seed s uses a
Philox4x64 bit generator keyed by SeedSequence(entropy=s, spawn_key=(i,))
feeding numpy's standard normal.  The per-draw keying makes output
independent of evaluation order, so parallel and serial generation agree
bitwise, and identical (seed, kernel, grid, count) inputs reproduce the same
matrix on one platform.

Top-level tensor-product kernels on matching 2-D grids are factorised per
axis: the Gram is the Kronecker product of the per-axis Grams, so its
Cholesky factor is the Kronecker product of the per-axis factors and a draw
is the two-sided product L1 Z L2^T.  This is an exact algebraic identity,
not an approximation; it exists because a dense 16384^2 factorisation does
not fit the acceptance-time budget on one core.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .dsl import print_kernel
from .kernels import Kernel, KernelError, TensorProduct, pairwise
from .regularity import infer_regularity
from .verify import derivative_kernel_matrix, _as_multiindex

__all__ = [
    "Axis",
    "Grid",
    "PathSamples",
    "FactorizationError",
    "build_gram",
    "cholesky_with_jitter",
    "sample_paths",
    "sample_derivative_paths",
    "write_samples_csv",
    "write_sidecar",
    "read_samples_csv",
]

MAX_GRID_POINTS = 128 * 128
_GRAM_BLOCK_ROWS = 1024


class FactorizationError(KernelError):
    """The Gram matrix stayed indefinite within the jitter budget."""


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if not (self.start < self.stop):
            raise ValueError(f"axis needs start < stop, got [{self.start}, {self.stop}]")
        if self.count < 2:
            raise ValueError(f"axis needs at least 2 points, got {self.count}")

    @property
    def spacing(self) -> float:
        return (self.stop - self.start) / (self.count - 1)

    def ticks(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class Grid:
    """Evaluation grid; 2-D grids flatten row-major (first axis outer)."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if len(self.axes) not in (1, 2):
            raise ValueError("grids are 1-D or 2-D")
        if self.n_points > MAX_GRID_POINTS:
            raise ValueError(
                f"grid has {self.n_points} points; the dense-sampling cap is {MAX_GRID_POINTS}"
            )

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def n_points(self) -> int:
        n = 1
        for a in self.axes:
            n *= a.count
        return n

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    def points(self) -> np.ndarray:
        if self.dim == 1:
            return self.axes[0].ticks()[:, None]
        t0 = self.axes[0].ticks()
        t1 = self.axes[1].ticks()
        xx, yy = np.meshgrid(t0, t1, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])


@dataclass(frozen=True)
class PathSamples:
    """Draws on a grid, one row per sample, with generation provenance."""

    grid: Grid
    samples: np.ndarray  # (count, n_points)
    kernel: str
    seed: int
    jitter_used: float
    alpha: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.samples.shape[1] != self.grid.n_points:
            raise ValueError("sample matrix does not match the grid size")
        alpha = tuple(int(a) for a in self.alpha) or tuple(0 for _ in range(self.grid.dim))
        if len(alpha) != self.grid.dim:
            raise ValueError("derivative multi-index does not match the grid dimension")
        object.__setattr__(self, "alpha", alpha)

    @property
    def count(self) -> int:
        return self.samples.shape[0]


def build_gram(expr: Kernel, grid: Grid) -> np.ndarray:
    """Gram matrix G[i, j] = k(p_i, p_j) on the grid points.

    Assembled in row blocks to bound temporary memory; the strict upper
    triangle is mirrored so symmetry is exact bitwise.
    """
    if expr.dim != grid.dim:
        raise KernelError(
            f"kernel has dimension {expr.dim} but the grid is {grid.dim}-D"
        )
    pts = grid.points()
    n = pts.shape[0]
    gram = np.empty((n, n))
    for lo in range(0, n, _GRAM_BLOCK_ROWS):
        hi = min(lo + _GRAM_BLOCK_ROWS, n)
        gram[lo:hi] = pairwise(expr, pts[lo:hi], pts)
    upper = np.triu(gram)
    return upper + np.triu(gram, 1).T


def cholesky_with_jitter(matrix: np.ndarray, max_rel_jitter: float = 1e-6):
    """Cholesky factorisation with an escalating diagonal jitter.

    Tries jitter lambda in {0, l0, 10 l0, ...} with l0 = 1e-12 trace/N and
    fails once lambda would exceed max_rel_jitter * trace/N, which signals a
    kernel or domain bug rather than ordinary rounding indefiniteness.
    Returns (lower factor, jitter_used).
    """
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    scale = float(np.trace(matrix)) / n
    if scale <= 0.0:
        raise FactorizationError("matrix has non-positive trace; not a Gram matrix")
    base = 1e-12 * scale
    jitter = 0.0
    while True:
        try:
            shifted = matrix if jitter == 0.0 else matrix + jitter * np.eye(n)
            return np.linalg.cholesky(shifted), jitter
        except np.linalg.LinAlgError:
            jitter = base if jitter == 0.0 else 10.0 * jitter
            if jitter > max_rel_jitter * scale:
                raise FactorizationError(
                    f"jitter budget exceeded ({jitter:.3e} > {max_rel_jitter * scale:.3e}); "
                    "matrix is effectively indefinite"
                ) from None


def _draw_normals(seed: int, index: int, n: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss)).standard_normal(n)


def _tensor_factors(expr: Kernel, grid: Grid):
    # exact per-axis factorisation applies to a top-level tensor product of
    # 1-D factors on a matching 2-D grid
    if (
        isinstance(expr, TensorProduct)
        and grid.dim == 2
        and len(expr.factors) == 2
        and all(c.dim == 1 for c in expr.factors)
    ):
        return expr.factors
    return None


def sample_paths(expr: Kernel, grid: Grid, count: int, seed: int) -> PathSamples:
    """Draw centred GP sample paths on the grid; rows are independent draws."""
    if count < 1:
        raise ValueError("count must be >= 1")
    factors = _tensor_factors(expr, grid)
    if factors is not None:
        subgrids = [Grid((axis,)) for axis in grid.axes]
        ls = []
        jitters = []
        for f, g in zip(factors, subgrids):
            l, j = cholesky_with_jitter(build_gram(f, g))
            ls.append(l)
            jitters.append(j)
        n1, n2 = grid.shape
        rows = np.empty((count, n1 * n2))
        for i in range(count):
            z = _draw_normals(seed, i, n1 * n2).reshape(n1, n2)
            rows[i] = (ls[0] @ z @ ls[1].T).ravel()
        return PathSamples(
            grid=grid,
            samples=rows,
            kernel=print_kernel(expr),
            seed=int(seed),
            jitter_used=max(jitters),
        )
    gram = build_gram(expr, grid)
    lower, jitter = cholesky_with_jitter(gram)
    n = gram.shape[0]
    rows = np.empty((count, n))
    for i in range(count):
        rows[i] = lower @ _draw_normals(seed, i, n)
    return PathSamples(
        grid=grid,
        samples=rows,
        kernel=print_kernel(expr),
        seed=int(seed),
        jitter_used=jitter,
    )


def sample_derivative_paths(
    expr: Kernel, alpha, grid: Grid, count: int, seed: int, step: float | None = None
) -> PathSamples:
    """Draw from the derivative process GP(0, d^(alpha,alpha) k).

    The sample-path order inferred for the kernel must exceed |alpha|, else
    the requested derivative outruns the differentiability of the paths.
    The derivative kernel is built by finite differences on shifted grids,
    not by differencing sampled paths.
    """
    alpha = tuple(int(a) for a in np.atleast_1d(np.asarray(alpha, dtype=int)))
    _as_multiindex(alpha, expr.dim)
    if count < 1:
        raise ValueError("count must be >= 1")
    report = infer_regularity(expr)
    total = sum(alpha)
    if not (report.order > total):
        raise KernelError(
            f"derivative order |alpha|={total} is not below the sample-path order "
            f"{report.order}; the derivative process does not exist"
        )
    if expr.dim != grid.dim:
        raise KernelError(f"kernel has dimension {expr.dim} but the grid is {grid.dim}-D")
    gram = derivative_kernel_matrix(expr, alpha, grid.points(), step=step)
    gram = np.triu(gram) + np.triu(gram, 1).T
    lower, jitter = cholesky_with_jitter(gram)
    n = gram.shape[0]
    rows = np.empty((count, n))
    for i in range(count):
        rows[i] = lower @ _draw_normals(seed, i, n)
    return PathSamples(
        grid=grid,
        samples=rows,
        kernel=print_kernel(expr),
        seed=int(seed),
        jitter_used=jitter,
        alpha=alpha,
    )


# --- serialisation ----------------------------------------------------------


def write_samples_csv(samples: PathSamples, path: str) -> None:
    """CSV with one grid point per row: coordinates, then one column per draw.

    Floats carry 17 significant digits so values round-trip exactly.
    Written atomically (temp file + rename).
    """
    pts = samples.grid.points()
    header = (["x"] if samples.grid.dim == 1 else ["x", "y"]) + [
        f"s{i}" for i in range(samples.count)
    ]
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in range(pts.shape[0]):
            row = [f"{v:.17g}" for v in pts[r]]
            row.extend(f"{v:.17g}" for v in samples.samples[:, r])
            writer.writerow(row)
    os.replace(tmp, path)


def write_sidecar(samples: PathSamples, path: str) -> None:
    """Metadata JSON describing how the samples were generated."""
    meta = {
        "kernel": samples.kernel,
        "seed": samples.seed,
        "grid": {
            "dim": samples.grid.dim,
            "axes": [
                {"start": a.start, "stop": a.stop, "count": a.count}
                for a in samples.grid.axes
            ],
        },
        "jitter_used": samples.jitter_used,
        "alpha": list(samples.alpha),
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def read_samples_csv(path: str) -> PathSamples:
    """Rebuild PathSamples from a CSV written by write_samples_csv.

    The grid is reconstructed from the coordinate columns, which must form
    a uniform row-major 1-D or 2-D grid.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    if header[:2] == ["x", "y"]:
        coord_cols = 2
    elif header[:1] == ["x"]:
        coord_cols = 1
    else:
        raise ValueError(f"unrecognised samples header {header[:2]}")
    if data.size == 0:
        raise ValueError("samples file contains no rows")
    coords = data[:, :coord_cols]
    values = data[:, coord_cols:].T.copy()
    if coord_cols == 1:
        axis = _axis_from_ticks(coords[:, 0])
        grid = Grid((axis,))
    else:
        x0 = coords[:, 0]
        x1 = coords[:, 1]
        n1 = len(np.unique(x1[x0 == x0[0]]))
        if coords.shape[0] % n1 != 0:
            raise ValueError("coordinates do not form a row-major grid")
        n0 = coords.shape[0] // n1
        axis0 = _axis_from_ticks(x0.reshape(n0, n1)[:, 0])
        axis1 = _axis_from_ticks(x1.reshape(n0, n1)[0, :])
        grid = Grid((axis0, axis1))
        expected = grid.points()
        if not np.allclose(expected, coords, rtol=0, atol=1e-9):
            raise ValueError("coordinates do not form a row-major grid")
    return PathSamples(
        grid=grid,
        samples=values,
        kernel="",
        seed=-1,
        jitter_used=float("nan"),
    )


def _axis_from_ticks(ticks: np.ndarray) -> Axis:
    if len(ticks) < 2:
        raise ValueError("an axis needs at least 2 points")
    spacing = np.diff(ticks)
    if np.any(spacing <= 0) or not np.allclose(spacing, spacing[0], rtol=1e-6, atol=1e-12):
        raise ValueError("grid ticks are not uniformly increasing")
    return Axis(float(ticks[0]), float(ticks[-1]), len(ticks))
