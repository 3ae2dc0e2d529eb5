"""Assembly of stiffness/mass matrices and load vectors.

Element integrals use a tensor Gauss-Legendre rule with (p+2)^2 points per
cell, which is exact for all polynomial pairings at p <= 4; high-order
variants serve the error quadrature.  Local blocks come from the kernel
backend (compiled or numpy); scatter into sparse matrices is vectorized
and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .basistab import basis_tab
from .coefficients import Constant
from .space import Space, injection_matrix


@dataclass(frozen=True)
class SubdomainBox:
    """Axis-aligned open box used as the region omega."""

    x0: float
    x1: float
    y0: float
    y1: float

    def classify_cells(self, space: Space) -> np.ndarray:
        """True per cell if inside the box; error on partial overlap."""
        mesh = space.mesh
        inside = np.zeros(len(mesh.cells), dtype=bool)
        for ci, cell in enumerate(mesh.cells):
            cx, cy, s = mesh.cell_box(cell)
            tol = 1e-12 * s
            if (cx >= self.x0 - tol and cx + s <= self.x1 + tol
                    and cy >= self.y0 - tol and cy + s <= self.y1 + tol):
                inside[ci] = True
            elif cx + s <= self.x0 + tol or cx >= self.x1 - tol \
                    or cy + s <= self.y0 + tol or cy >= self.y1 - tol:
                inside[ci] = False
            else:
                raise ValueError(
                    f"region {self} is not a union of cells of this mesh")
        return inside

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


def cell_geometry(space: Space):
    """Lower-left corners (ncells, 2) and sides (ncells,) of all leaves."""
    mesh = space.mesh
    boxes = np.array([mesh.cell_box(c) for c in mesh.cells])
    return boxes[:, :2], boxes[:, 2]


def quad_points(space: Space, tab):
    """Physical quadrature points per cell, shape (ncells, nq, 2)."""
    corners, sides = cell_geometry(space)
    xs = corners[:, 0, None] + sides[:, None] * tab.qx[None, :]
    ys = corners[:, 1, None] + sides[:, None] * tab.qy[None, :]
    return xs, ys


def _scatter(space_row: Space, space_col: Space, local) -> sp.csr_matrix:
    """Condense per-cell blocks into a real-dof sparse matrix."""
    nb = local.shape[1]
    cn = space_row.cell_nodes
    rows = np.repeat(cn, nb, axis=1).ravel()
    cols = np.tile(cn, (1, nb)).ravel()
    A_nodes = sp.csr_matrix((local.ravel(), (rows, cols)),
                            shape=(space_row.n_nodes, space_row.n_nodes))
    A = space_row.T.T @ A_nodes @ space_col.T
    A.sum_duplicates()
    return sp.csr_matrix(A)


def _resolve_pair(space_row: Space, space_col: Space):
    """Shared fine space plus injections for a (possibly nested) pair."""
    if space_row.mesh == space_col.mesh:
        if space_row.p != space_col.p:
            raise ValueError("spaces on one mesh must share the degree")
        return space_row, None, None
    if space_row.mesh.max_level >= space_col.mesh.max_level:
        fine, inj_row, inj_col = space_row, None, injection_matrix(space_col, space_row)
    else:
        fine, inj_row, inj_col = space_col, injection_matrix(space_row, space_col), None
    return fine, inj_row, inj_col


def assemble_bilinear(space_row: Space, space_col: Space | None = None,
                      eps=None) -> sp.csr_matrix:
    """Stiffness matrix of a_eps over real dofs (constraints condensed)."""
    if space_col is None:
        space_col = space_row
    if eps is None:
        eps = Constant(1.0)
    fine, inj_row, inj_col = _resolve_pair(space_row, space_col)
    tab = basis_tab(fine.p, fine.p + 2)
    if isinstance(eps, Constant):
        evals = np.full((len(fine.mesh.cells), len(tab.w)), eps.value)
    else:
        xs, ys = quad_points(fine, tab)
        evals = np.ascontiguousarray(eps(xs, ys), dtype=float)
    local = kernels.local_stiffness(tab.w, tab.Gx, tab.Gy, evals)
    A = _scatter(fine, fine, np.asarray(local))
    if inj_row is not None:
        A = sp.csr_matrix(inj_row.T @ A)
    if inj_col is not None:
        A = sp.csr_matrix(A @ inj_col)
    return A


def assemble_l2(space_row: Space, space_col: Space | None = None,
                region: SubdomainBox | str = "all") -> sp.csr_matrix:
    """Mass matrix (phi_j, chi_omega phi_i) over real dofs."""
    if space_col is None:
        space_col = space_row
    fine, inj_row, inj_col = _resolve_pair(space_row, space_col)
    tab = basis_tab(fine.p, fine.p + 2)
    _, sides = cell_geometry(fine)
    areas = sides * sides
    if region == "all":
        mask = np.ones(len(areas), dtype=bool)
    else:
        mask = region.classify_cells(fine)
    areas = np.where(mask, areas, 0.0)
    local = kernels.local_mass(tab.w, tab.B, np.ascontiguousarray(areas))
    M = _scatter(fine, fine, np.asarray(local))
    if inj_row is not None:
        M = sp.csr_matrix(inj_row.T @ M)
    if inj_col is not None:
        M = sp.csr_matrix(M @ inj_col)
    return M


def assemble_load(space: Space, f) -> np.ndarray:
    """Load vector int_Omega f phi_i over real dofs."""
    tab = basis_tab(space.p, space.p + 2)
    xs, ys = quad_points(space, tab)
    _, sides = cell_geometry(space)
    fvals = np.array(np.broadcast_to(f(xs, ys), xs.shape), dtype=float)
    local = kernels.local_load(tab.w, tab.B, fvals, np.ascontiguousarray(sides * sides))
    vec = np.zeros(space.n_nodes)
    np.add.at(vec, space.cell_nodes.ravel(), np.asarray(local).ravel())
    return space.T.T @ vec


def integrate(space: Space, coeffs: np.ndarray, func=None,
              region: SubdomainBox | str = "all", order_boost: int = 2,
              power: int = 2) -> float:
    """High-order quadrature of |u_h - func|^power over a cell-union region.

    With func=None integrates |u_h|^power.  Uses (p + order_boost)^2 Gauss
    points per cell; order_boost=4 gives the error-quadrature rule.
    """
    tab = basis_tab(space.p, space.p + order_boost)
    if region == "all":
        mask = np.ones(len(space.mesh.cells), dtype=bool)
    else:
        mask = region.classify_cells(space)
    xs, ys = quad_points(space, tab)
    _, sides = cell_geometry(space)
    vals = space.cell_values(coeffs) @ tab.B.T  # (ncells, nq)
    if func is not None:
        vals = vals - func(xs, ys)
    contrib = (np.abs(vals) ** power) @ tab.w
    return float(np.sum(contrib[mask] * sides[mask] ** 2))
