"""Deterministic generators for the four structured test-grid families.

All families live on the unit square (height 1/aspect_ratio for the
high-aspect-ratio family) with ``nx`` by ``ny`` nodes:

* ``quad``          uniform quadrilateral lattice
* ``quad_ar``       uniform lattice on [0,1] x [0,1/AR], so dx/dy = AR
* ``tri_regular``   every quad split along the same (lower-left to
                    upper-right) diagonal
* ``tri_irregular`` interior nodes jittered, each quad split along a
                    randomly chosen diagonal

Randomness (tri_irregular only) comes from ``numpy.random.default_rng(seed)``
and is consumed in a fixed order: first one uniform [-1, 1) pair per node
(row-major; boundary rows and columns are zeroed afterwards, then scaled by
perturb * spacing per axis), then one integer in {0, 1} per quad cell
(row-major) selecting the split diagonal. When the drawn diagonal would cut
a non-convex perturbed quad the wrong way (inverted triangle), the other
diagonal is used instead; for perturb < 0.5 the perturbed quad is always
simple, so one of the two diagonals is always valid. Identical specs
therefore yield bit-identical grids.
"""

from dataclasses import dataclass

import numpy as np

from .grid import Cell, Grid, derive_geometry

KINDS = ("quad", "quad_ar", "tri_regular", "tri_irregular")


@dataclass(frozen=True)
class GenSpec:
    kind: str
    nx: int
    ny: int
    aspect_ratio: float = 4.0
    perturb: float = 0.3
    seed: int = 0

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.nx < 2 or self.ny < 2:
            raise ValueError(f"need nx >= 2 and ny >= 2, got {self.nx}x{self.ny}")
        if not 0.0 <= self.perturb < 0.5:
            raise ValueError(f"perturb must be in [0, 0.5), got {self.perturb}")
        if self.aspect_ratio <= 0.0:
            raise ValueError(f"aspect_ratio must be positive, got {self.aspect_ratio}")

    @property
    def grid_name(self):
        base = f"{self.kind}_{self.nx}x{self.ny}"
        if self.kind == "quad_ar":
            base = f"quad_ar{self.aspect_ratio:g}_{self.nx}x{self.ny}"
        elif self.kind == "tri_irregular":
            base += f"_b{self.perturb:g}_s{self.seed}"
        return base


def _lattice(nx, ny, width, height):
    xs = np.linspace(0.0, width, nx)
    ys = np.linspace(0.0, height, ny)
    nodes = np.empty((nx * ny, 2), dtype=float)
    for j in range(ny):
        nodes[j * nx:(j + 1) * nx, 0] = xs
        nodes[j * nx:(j + 1) * nx, 1] = ys[j]
    return nodes


def _quad_cells(nx, ny):
    cells = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            n00 = j * nx + i
            cells.append(Cell(vertices=(n00, n00 + 1, n00 + 1 + nx, n00 + nx)))
    return cells


def _tri_cells(nodes, nx, ny, diagonals):
    """Split each quad in two; diagonals[j, i] = 0 asks for the lower-left to
    upper-right diagonal, 1 for the other one. A choice that would invert a
    triangle (non-convex perturbed quad) falls back to the other diagonal."""

    def ccw(a, b, c):
        ax, ay = nodes[a]
        bx, by = nodes[b]
        cx, cy = nodes[c]
        return (bx - ax) * (cy - ay) - (cx - ax) * (by - ay) > 0.0

    cells = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            n00 = j * nx + i
            n10 = n00 + 1
            n01 = n00 + nx
            n11 = n01 + 1
            splits = (
                ((n00, n10, n11), (n00, n11, n01)),
                ((n00, n10, n01), (n10, n11, n01)),
            )
            t1, t2 = splits[diagonals[j, i]]
            if not (ccw(*t1) and ccw(*t2)):
                t1, t2 = splits[1 - diagonals[j, i]]
            cells.append(Cell(vertices=t1))
            cells.append(Cell(vertices=t2))
    return cells


def generate(spec):
    """Build the grid described by ``spec``, geometry already derived."""
    spec.validate()
    nx, ny = spec.nx, spec.ny
    height = 1.0 / spec.aspect_ratio if spec.kind == "quad_ar" else 1.0
    nodes = _lattice(nx, ny, 1.0, height)

    if spec.kind in ("quad", "quad_ar"):
        cells = _quad_cells(nx, ny)
    elif spec.kind == "tri_regular":
        diagonals = np.zeros((ny - 1, nx - 1), dtype=int)
        cells = _tri_cells(nodes, nx, ny, diagonals)
    else:
        rng = np.random.default_rng(spec.seed)
        disp = rng.uniform(-1.0, 1.0, size=(ny * nx, 2))
        mask = np.ones((ny, nx, 1))
        mask[0, :, 0] = 0.0
        mask[-1, :, 0] = 0.0
        mask[:, 0, 0] = 0.0
        mask[:, -1, 0] = 0.0
        hx = 1.0 / (nx - 1)
        hy = height / (ny - 1)
        nodes = nodes + disp * mask.reshape(-1, 1) * np.array(
            [spec.perturb * hx, spec.perturb * hy]
        )
        diagonals = rng.integers(0, 2, size=(ny - 1, nx - 1))
        cells = _tri_cells(nodes, nx, ny, diagonals)

    grid = Grid(name=spec.grid_name, nodes=nodes, cells=cells)
    return derive_geometry(grid)
