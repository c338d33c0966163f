"""Per-cell grid-quality measures and grid-level aggregation.

Two measures are computed from each cell's least-squares gradient stencil:

* F-measure: s / ||A^T A||_F with s = sum_k w_k^2 d_k. Units 1/length;
  a smaller value predicts faster implicit-solver convergence.
* G-measure: magnitude of the least-squares gradient of the isotropic bump
  exp(-(x~^2 + y~^2)) evaluated in offsets normalized by the farthest
  neighbor distance. Dimensionless, ideal value 0 (reached on centrally
  symmetric stencils).

``analyze`` evaluates both for every cell and aggregates min/max/avg over
the non-degenerate cells. Worker count for the per-cell sweep is capped by
the GRIDGAUGE_THREADS environment variable (default: all cores).
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateGridError,
    DegenerateStencilError,
    SingularStencilError,
)
from .grid import _require_geometry, build_stencil
from .lsq import apply_gradient, build_system

CSV_HEADER = (
    "grid_name,ncells,p,stencil_mode,"
    "F_min,F_max,F_avg,G_min,G_max,G_avg,degenerate_count"
)


class MeasureValues(NamedTuple):
    f: float
    g: float
    degenerate: bool


@dataclass
class MeasureReport:
    """Per-cell measure arrays (NaN where degenerate) plus aggregates."""

    grid_name: str
    n_cells: int
    p: int
    stencil_mode: str
    f_values: np.ndarray
    g_values: np.ndarray
    degenerate: np.ndarray
    f_min: float
    f_max: float
    f_avg: float
    g_min: float
    g_max: float
    g_avg: float
    degenerate_count: int

    def cell(self, j):
        return MeasureValues(
            float(self.f_values[j]),
            float(self.g_values[j]),
            bool(self.degenerate[j]),
        )

    def csv_row(self):
        return (
            f"{self.grid_name},{self.n_cells},{self.p},{self.stencil_mode},"
            f"{self.f_min:.17g},{self.f_max:.17g},{self.f_avg:.17g},"
            f"{self.g_min:.17g},{self.g_max:.17g},{self.g_avg:.17g},"
            f"{self.degenerate_count}"
        )


def f_measure(stencil, system):
    """Stencil quality ratio s / ||A^T A||_F, s = sum of w^2 * distance."""
    s = 0.0
    for k in range(len(stencil.d)):
        wk = system.weights[k]
        s += wk * wk * stencil.d[k]
    return s / system.frobenius_norm


def g_measure(stencil, system):
    """Gradient magnitude of the unit bump in farthest-distance-normalized
    offsets.

    The cached coefficients are per physical length; multiplying the
    gradient magnitude by s_max converts it to the normalized frame, which
    makes G dimensionless and invariant under uniform scaling.
    """
    smax = max(stencil.d)
    du = []
    for k in range(len(stencil.d)):
        xk = stencil.dx[k] / smax
        yk = stencil.dy[k] / smax
        du.append(math.exp(-(xk * xk + yk * yk)) - 1.0)
    gx, gy = apply_gradient(system, du)
    return smax * math.hypot(gx, gy)


def worker_count():
    """Worker cap from GRIDGAUGE_THREADS, defaulting to all cores."""
    env = os.environ.get("GRIDGAUGE_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(
                f"GRIDGAUGE_THREADS must be an integer, got {env!r}"
            ) from None
        return max(1, n)
    return os.cpu_count() or 1


def _measure_range(grid, p, stencil_mode, lo, hi, f_out, g_out, bad_out):
    for j in range(lo, hi):
        try:
            stencil = build_stencil(grid, j, stencil_mode)
            system = build_system(stencil, p)
        except (DegenerateStencilError, SingularStencilError):
            f_out[j] = math.nan
            g_out[j] = math.nan
            bad_out[j] = True
            continue
        f_out[j] = f_measure(stencil, system)
        g_out[j] = g_measure(stencil, system)


def analyze(grid, p=0, stencil_mode="face"):
    """Evaluate F and G for every cell and aggregate.

    Cells whose stencil is degenerate or singular are flagged, carry NaN in
    the per-cell arrays, and are excluded from the aggregates.

    Raises
    ------
    DegenerateGridError
        More than half of the cells are degenerate.
    """
    _require_geometry(grid)
    n = grid.n_cells
    if n == 0:
        raise DegenerateGridError("grid has no cells")
    f_values = np.empty(n)
    g_values = np.empty(n)
    degenerate = np.zeros(n, dtype=bool)

    workers = min(worker_count(), n) or 1
    if workers <= 1 or n < 256:
        _measure_range(grid, p, stencil_mode, 0, n, f_values, g_values, degenerate)
    else:
        # Adjacency caches are built once up front so the worker threads
        # only read the (immutable) grid.
        try:
            build_stencil(grid, 0, stencil_mode)
        except DegenerateStencilError:
            pass
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            jobs = [
                pool.submit(
                    _measure_range, grid, p, stencil_mode,
                    int(lo), int(hi), f_values, g_values, degenerate,
                )
                for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
            for job in jobs:
                job.result()

    n_bad = int(degenerate.sum())
    if n_bad * 2 > n:
        raise DegenerateGridError(
            f"{n_bad} of {n} cells have degenerate stencils "
            f"({stencil_mode} mode)"
        )

    good_f = f_values[~degenerate]
    good_g = g_values[~degenerate]
    return MeasureReport(
        grid_name=grid.name,
        n_cells=n,
        p=p,
        stencil_mode=stencil_mode,
        f_values=f_values,
        g_values=g_values,
        degenerate=degenerate,
        f_min=float(good_f.min()),
        f_max=float(good_f.max()),
        f_avg=float(good_f.sum() / len(good_f)),
        g_min=float(good_g.min()),
        g_max=float(good_g.max()),
        g_avg=float(good_g.sum() / len(good_g)),
        degenerate_count=n_bad,
    )
