"""Model implicit solver: steady linear advection on an unstructured grid.

The discretization is a second-order cell-centered finite-volume scheme.
Face states are reconstructed to face midpoints with the cached
least-squares gradients and fed to the scalar upwind flux

    flux(uL, uR, n) = 0.5 (a.n)(uL + uR) - 0.5 |a.n| (uR - uL)

with advection direction a = (cos theta, sin theta). The manufactured field
sin(pi x) sin(pi y) supplies the source term a.grad(u*) and the Dirichlet
inflow data, so the exact steady solution is known.

The implicit iteration is defect correction: the nonlinear update solves
J du = -R(u) where R is the second-order residual but J is the exact
Jacobian of the *first-order* residual (zero gradients). The linear systems
are relaxed with symmetric point-implicit (forward/backward) sweeps until
the inner residual drops tenfold or the sweep cap is hit.

Costs are reported in work units: 1 per outer residual evaluation plus 0.5
per symmetric sweep, which stands in for CPU time normalized by the cost of
one residual evaluation.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateStencilError, SingularStencilError
from .grid import _require_geometry, build_stencil
from .lsq import build_system

DIVERGENCE_FACTOR = 1e6
INNER_REDUCTION = 0.1


def exact_solution(x, y):
    """Manufactured field; doubles as the Dirichlet inflow data."""
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def source_term(x, y, theta):
    """Advective derivative a.grad(u*) of the manufactured field."""
    t = math.radians(theta)
    return np.pi * (
        math.cos(t) * np.cos(np.pi * x) * np.sin(np.pi * y)
        + math.sin(t) * np.sin(np.pi * x) * np.cos(np.pi * y)
    )


@dataclass
class ProblemSpec:
    theta: float = 30.0
    tolerance: float = 1e-10
    max_outer: int = 200
    max_sweeps: int = 30
    first_order: bool = False

    def validate(self):
        if self.tolerance <= 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_outer < 1 or self.max_sweeps < 1:
            raise ValueError("iteration caps must be at least 1")


@dataclass
class SolveReport:
    residual_history: list
    work_history: list
    iterations_to_tol: int | None
    work_units: float
    converged: bool
    diverged: bool
    solution: np.ndarray

    def write_history_csv(self, stream):
        stream.write("iter,residual_norm,work_units\n")
        for i, (r, w) in enumerate(zip(self.residual_history, self.work_history)):
            stream.write(f"{i},{r:.17g},{w:.17g}\n")


def gradient_systems(grid, p=0, stencil_mode="face"):
    """Per-cell stencils and solved systems for the reconstruction.

    Cells whose stencil is degenerate or singular get None entries; the
    residual treats them as locally first-order (zero gradient).
    """
    stencils = []
    systems = []
    for j in range(grid.n_cells):
        try:
            stencil = build_stencil(grid, j, stencil_mode)
            system = build_system(stencil, p)
        except (DegenerateStencilError, SingularStencilError):
            stencil = None
            system = None
        stencils.append(stencil)
        systems.append(system)
    return stencils, systems


def _gradient_operators(grid, stencils, systems):
    """Sparse Gx, Gy with rows summing to zero, so grad = (Gx u, Gy u)."""
    rows, cols, vx, vy = [], [], [], []
    for stencil, system in zip(stencils, systems):
        if stencil is None:
            continue
        j = stencil.cell
        sx = sy = 0.0
        for k, nb in enumerate(stencil.neighbors):
            rows.append(j)
            cols.append(nb)
            vx.append(system.cx[k])
            vy.append(system.cy[k])
            sx += system.cx[k]
            sy += system.cy[k]
        rows.append(j)
        cols.append(j)
        vx.append(-sx)
        vy.append(-sy)
    n = grid.n_cells
    gx = sp.csr_matrix((vx, (rows, cols)), shape=(n, n))
    gy = sp.csr_matrix((vy, (rows, cols)), shape=(n, n))
    return gx, gy


class _Advection:
    """Packed face arrays and residual/Jacobian evaluation for one setup."""

    def __init__(self, grid, theta, stencils=None, systems=None,
                 first_order=False, source=source_term, inflow=exact_solution):
        _require_geometry(grid)
        self.grid = grid
        self.theta = theta
        self.first_order = first_order
        n = grid.n_cells

        t = math.radians(theta)
        ax, ay = math.cos(t), math.sin(t)

        interior = [f for f in grid.faces if f.neighbor != -1]
        boundary = [f for f in grid.faces if f.neighbor == -1]

        self.own = np.array([f.owner for f in interior], dtype=np.intp)
        self.nb = np.array([f.neighbor for f in interior], dtype=np.intp)
        self.an = np.array(
            [ax * f.normal[0] + ay * f.normal[1] for f in interior]
        )
        self.ln = np.array([f.length for f in interior])
        self.mx = np.array([f.midpoint[0] for f in interior])
        self.my = np.array([f.midpoint[1] for f in interior])

        self.bown = np.array([f.owner for f in boundary], dtype=np.intp)
        self.ban = np.array(
            [ax * f.normal[0] + ay * f.normal[1] for f in boundary]
        )
        self.bln = np.array([f.length for f in boundary])
        bmx = np.array([f.midpoint[0] for f in boundary])
        bmy = np.array([f.midpoint[1] for f in boundary])
        self.bmx = bmx
        self.bmy = bmy
        self.ub = np.asarray(inflow(bmx, bmy), dtype=float)

        cx = grid.centroids[:, 0]
        cy = grid.centroids[:, 1]
        self.cx = cx
        self.cy = cy
        self.fv = np.array(
            [source(cx[j], cy[j], theta) * grid.areas[j] for j in range(n)]
        )

        if first_order:
            self.gx_op = None
            self.gy_op = None
        else:
            self.gx_op, self.gy_op = _gradient_operators(grid, stencils, systems)

    def residual(self, u):
        n = self.grid.n_cells
        if self.first_order:
            gx = gy = np.zeros(n)
        else:
            gx = self.gx_op @ u
            gy = self.gy_op @ u

        res = np.zeros(n)
        own, nb = self.own, self.nb
        if len(own):
            ul = u[own] + gx[own] * (self.mx - self.cx[own]) \
                + gy[own] * (self.my - self.cy[own])
            ur = u[nb] + gx[nb] * (self.mx - self.cx[nb]) \
                + gy[nb] * (self.my - self.cy[nb])
            an = self.an
            flux = (0.5 * an * (ul + ur) - 0.5 * np.abs(an) * (ur - ul)) * self.ln
            res += np.bincount(own, weights=flux, minlength=n)
            res -= np.bincount(nb, weights=flux, minlength=n)

        bown = self.bown
        if len(bown):
            ul = u[bown] + gx[bown] * (self.bmx - self.cx[bown]) \
                + gy[bown] * (self.bmy - self.cy[bown])
            ban = self.ban
            bflux = (0.5 * ban * (ul + self.ub)
                     - 0.5 * np.abs(ban) * (self.ub - ul)) * self.bln
            res += np.bincount(bown, weights=bflux, minlength=n)

        return res - self.fv

    def jacobian(self):
        """Exact Jacobian of the first-order (zero-gradient) residual."""
        n = self.grid.n_cells
        own, nb, an, ln = self.own, self.nb, self.an, self.ln
        dplus = 0.5 * (an + np.abs(an)) * ln
        dminus = 0.5 * (an - np.abs(an)) * ln
        rows = np.concatenate([own, own, nb, nb, self.bown])
        cols = np.concatenate([own, nb, nb, own, self.bown])
        vals = np.concatenate([
            dplus,                                     # outflow part, owner
            dminus,                                    # inflow from neighbor
            0.5 * (-an + np.abs(an)) * ln,             # same face, seen from nb
            0.5 * (-an - np.abs(an)) * ln,
            0.5 * (self.ban + np.abs(self.ban)) * self.bln,
        ])
        return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def residual_second_order(grid, stencils, systems, u, theta, *,
                          first_order=False, source=source_term,
                          inflow=exact_solution):
    """Second-order residual of state u (per cell, integral form).

    ``source`` and ``inflow`` default to the manufactured problem; tests may
    override them (e.g. with zeros) to probe conservation.
    """
    op = _Advection(grid, theta, stencils, systems,
                    first_order=first_order, source=source, inflow=inflow)
    return op.residual(np.asarray(u, dtype=float))


def jacobian_low_order(grid, theta):
    """Sparse exact Jacobian of the first-order residual (CSR)."""
    op = _Advection(grid, theta, first_order=True)
    return op.jacobian()


def defect_correction_solve(grid, spec, p=0, stencil_mode="face"):
    """Drive the second-order residual to spec.tolerance (relative L1).

    Outer loop: evaluate R(u); stop on convergence; otherwise relax
    J du = -R with symmetric sweeps and update u. The returned report
    carries the normalized residual history (entry 0 is 1) and cumulative
    work units per entry.
    """
    spec.validate()
    _require_geometry(grid)

    if spec.first_order:
        op = _Advection(grid, spec.theta, first_order=True)
    else:
        stencils, systems = gradient_systems(grid, p, stencil_mode)
        op = _Advection(grid, spec.theta, stencils, systems)

    n = grid.n_cells
    u = np.zeros(n)
    res = op.residual(u)
    work = 1.0
    r0 = float(np.abs(res).sum())
    history = [1.0]
    work_history = [work]

    if r0 == 0.0:
        return SolveReport(history, work_history, 0, work, True, False, u)

    jac = op.jacobian()
    lower = spla.splu(sp.tril(jac, format="csc"),
                      permc_spec="NATURAL", diag_pivot_thresh=0.0)
    upper = spla.splu(sp.triu(jac, format="csc"),
                      permc_spec="NATURAL", diag_pivot_thresh=0.0)

    converged = False
    diverged = False
    iterations = None
    for it in range(1, spec.max_outer + 1):
        b = -res
        bnorm = float(np.abs(b).sum())
        delta = np.zeros(n)
        r = b.copy()
        for _ in range(spec.max_sweeps):
            delta += lower.solve(r)
            r = b - jac @ delta
            delta += upper.solve(r)
            r = b - jac @ delta
            work += 0.5
            if float(np.abs(r).sum()) <= INNER_REDUCTION * bnorm:
                break

        u = u + delta
        res = op.residual(u)
        work += 1.0
        rnorm = float(np.abs(res).sum())
        history.append(rnorm / r0)
        work_history.append(work)
        if rnorm / r0 <= spec.tolerance:
            converged = True
            iterations = it
            break
        if rnorm > DIVERGENCE_FACTOR * r0:
            diverged = True
            break

    return SolveReport(
        residual_history=history,
        work_history=work_history,
        iterations_to_tol=iterations,
        work_units=work,
        converged=converged,
        diverged=diverged,
        solution=u,
    )
