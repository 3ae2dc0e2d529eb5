"""Conforming tensor-product Lagrange spaces on quadtree meshes.

Global nodes are merged through exact integer keys: a node at fraction
(i*p + a) / (p*2^L) of the bounding square is keyed by the integer
(i*p + a) * 2^(Lmax - L) on the common scale D = p * 2^Lmax.  Nodes sitting
mid-edge of a coarser neighbor (hanging nodes) are constrained to the p+1
nodes of the coarse edge with weights given by the coarse 1D basis, which
makes the constrained space H1-conforming.

A Space owns the node/constraint tables; Dirichlet tagging is a cheap
overlay (``retag``), so the same assembled operators can serve several
homogeneous subspaces of one mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basistab import lagrange_1d, tensor_eval
from .mesh import Mesh, _parent

_EDGE_LOCAL = {
    # local 1D index along the edge -> (a, b) tensor indices
    "west": lambda k, p: (0, k),
    "east": lambda k, p: (p, k),
    "south": lambda k, p: (k, 0),
    "north": lambda k, p: (k, p),
}


@dataclass(frozen=True)
class BoundaryRegion:
    """Named part of the domain boundary.

    kind 'all' is the whole boundary; 'edges' selects closed edges of a
    square domain by name ('left','right','bottom','top').
    """

    kind: str
    edges: frozenset = frozenset()

    @staticmethod
    def all() -> "BoundaryRegion":
        return BoundaryRegion("all")

    @staticmethod
    def square_edges(*names: str) -> "BoundaryRegion":
        valid = {"left", "right", "bottom", "top"}
        bad = set(names) - valid
        if bad:
            raise ValueError(f"unknown edges {sorted(bad)}")
        return BoundaryRegion("edges", frozenset(names))

    def complement_edges(self) -> "BoundaryRegion":
        if self.kind != "edges":
            raise ValueError("complement only defined for edge regions")
        return BoundaryRegion(
            "edges", frozenset({"left", "right", "bottom", "top"}) - self.edges)

    def mask(self, space: "Space") -> np.ndarray:
        """Boolean mask over the space's real dofs."""
        kx = space.real_keys[:, 0]
        ky = space.real_keys[:, 1]
        D = space.key_scale
        if self.kind == "all":
            return space.real_on_boundary
        if space.mesh.domain.kind != "square":
            raise ValueError("edge regions require a square domain")
        m = np.zeros(len(kx), dtype=bool)
        if "left" in self.edges:
            m |= kx == 0
        if "right" in self.edges:
            m |= kx == D
        if "bottom" in self.edges:
            m |= ky == 0
        if "top" in self.edges:
            m |= ky == D
        return m


class Space:
    """Degree-p Lagrange space on a mesh, with hanging-node constraints."""

    def __init__(self, mesh: Mesh, p: int, dirichlet: BoundaryRegion | None = None,
                 _shared=None) -> None:
        if not 1 <= p <= 4:
            raise ValueError("degree must be in [1, 4]")
        self.mesh = mesh
        self.p = p
        self.dirichlet = dirichlet
        if _shared is None:
            self._build_tables()
        else:
            for k, v in _shared.items():
                setattr(self, k, v)
        self._tag_dirichlet()

    # -- construction -----------------------------------------------------

    def _build_tables(self) -> None:
        mesh, p = self.mesh, self.p
        Lmax = mesh.max_level
        self.key_scale = p << Lmax  # D = p * 2^Lmax
        D = self.key_scale
        big = D + 1

        cells = mesh.cells
        nb = (p + 1) ** 2
        keys = np.empty((len(cells), nb), dtype=np.int64)
        for ci, (L, i, j) in enumerate(cells):
            step = 1 << (Lmax - L)
            kx = (i * p + np.arange(p + 1)) * step
            ky = (j * p + np.arange(p + 1)) * step
            KX, KY = np.meshgrid(kx, ky, indexing="xy")
            keys[ci] = (KX * big + KY).ravel()

        flat = np.unique(keys.ravel())
        self.node_keys = np.column_stack([flat // big, flat % big])
        lookup = {int(k): n for n, k in enumerate(flat)}
        self.n_nodes = len(flat)
        self.cell_nodes = np.searchsorted(flat, keys).astype(np.int64)
        self._cell_lookup = {c: i for i, c in enumerate(mesh.cells)}

        dom = mesh.domain
        frac = self.node_keys / D
        self.node_xy = np.column_stack([dom.x0 + dom.side * frac[:, 0],
                                        dom.y0 + dom.side * frac[:, 1]])

        self._build_constraints(lookup, big)
        self._classify_nodes()
        self._build_expansion()

    def _build_constraints(self, lookup, big) -> None:
        """Hanging-node weights from coarse-edge basis evaluation."""
        mesh, p = self.mesh, self.p
        Lmax = mesh.max_level
        raw: dict[int, list[tuple[int, float]]] = {}
        for L, i, j in mesh.cells:
            for direction in ("west", "east", "south", "north"):
                nbs = mesh.neighbor_leaves((L, i, j), direction)
                if len(nbs) != 1 or nbs[0][0] != L - 1:
                    continue
                coarse = nbs[0]
                cl, ci, cj = coarse
                step_f = 1 << (Lmax - L)
                step_c = step_f * 2
                if direction in ("west", "east"):
                    # shared vertical edge: coordinate along edge is y
                    kx_edge = (i * p + (0 if direction == "west" else p)) * step_f
                    fine_k = (j * p + np.arange(p + 1)) * step_f
                    coarse_k = (cj * p + np.arange(p + 1)) * step_c
                    mykeys = kx_edge * big + fine_k
                    mkeys = kx_edge * big + coarse_k
                else:
                    ky_edge = (j * p + (0 if direction == "south" else p)) * step_f
                    fine_k = (i * p + np.arange(p + 1)) * step_f
                    coarse_k = (ci * p + np.arange(p + 1)) * step_c
                    mykeys = fine_k * big + ky_edge
                    mkeys = coarse_k * big + ky_edge
                masters = [lookup[int(k)] for k in mkeys]
                # parameter along the coarse edge in [0, 1]
                t = (fine_k - coarse_k[0]) / (coarse_k[-1] - coarse_k[0])
                W = lagrange_1d(p, t)
                coarse_set = set(coarse_k.tolist())
                for loc in range(p + 1):
                    if int(fine_k[loc]) in coarse_set:
                        continue  # coincides with a coarse node
                    node = lookup[int(mykeys[loc])]
                    if node in raw:
                        continue
                    raw[node] = [(m, float(w)) for m, w in zip(masters, W[loc])
                                 if abs(w) > 1e-14]

        # resolve chains so that masters are always unconstrained
        resolved: dict[int, list[tuple[int, float]]] = {}

        def resolve(node, seen):
            if node in resolved:
                return resolved[node]
            if node in seen:
                raise RuntimeError("cyclic hanging-node constraints")
            seen = seen | {node}
            acc: dict[int, float] = {}
            for m, w in raw[node]:
                if m in raw:
                    for mm, ww in resolve(m, seen):
                        acc[mm] = acc.get(mm, 0.0) + w * ww
                else:
                    acc[m] = acc.get(m, 0.0) + w
            out = sorted(acc.items())
            resolved[node] = out
            return out

        for node in raw:
            resolve(node, frozenset())
        self.constraints = resolved

    def _classify_nodes(self) -> None:
        D = self.key_scale
        kx = self.node_keys[:, 0]
        ky = self.node_keys[:, 1]
        on_bd = (kx == 0) | (kx == D) | (ky == 0) | (ky == D)
        if self.mesh.domain.kind == "lshape":
            half = D // 2
            on_bd |= (ky == half) & (kx >= half)  # reentrant edge y = 0
            on_bd |= (kx == half) & (ky <= half)  # reentrant edge x = 0
        self.node_on_boundary = on_bd

        hanging = np.zeros(self.n_nodes, dtype=bool)
        if self.constraints:
            hanging[list(self.constraints)] = True
        self.is_hanging = hanging
        self.real_of_node = np.cumsum(~hanging) - 1
        self.real_of_node[hanging] = -1
        self.real_nodes = np.flatnonzero(~hanging)
        self.n_real = len(self.real_nodes)
        self.real_keys = self.node_keys[self.real_nodes]
        self.real_xy = self.node_xy[self.real_nodes]
        self.real_on_boundary = on_bd[self.real_nodes]

    def _build_expansion(self) -> None:
        """T: (n_nodes x n_real) mapping real coefficients to node values."""
        rows = list(self.real_nodes)
        cols = list(range(self.n_real))
        vals = [1.0] * self.n_real
        for node, terms in self.constraints.items():
            for m, w in terms:
                rows.append(node)
                cols.append(int(self.real_of_node[m]))
                vals.append(w)
        self.T = sp.csr_matrix((vals, (rows, cols)),
                               shape=(self.n_nodes, self.n_real))

    def _tag_dirichlet(self) -> None:
        if self.dirichlet is None:
            self.dirichlet_mask = np.zeros(self.n_real, dtype=bool)
        else:
            self.dirichlet_mask = self.dirichlet.mask(self)
        self.free_idx = np.flatnonzero(~self.dirichlet_mask)
        self.n_free = len(self.free_idx)

    # -- derived views ----------------------------------------------------

    _SHARED_ATTRS = (
        "key_scale", "node_keys", "n_nodes", "cell_nodes", "node_xy",
        "constraints", "node_on_boundary", "is_hanging", "real_of_node",
        "real_nodes", "n_real", "real_keys", "real_xy", "real_on_boundary",
        "T", "_cell_lookup",
    )

    def retag(self, dirichlet: BoundaryRegion | None) -> "Space":
        """Same space with a different essential-boundary tagging."""
        shared = {k: getattr(self, k) for k in self._SHARED_ATTRS}
        return Space(self.mesh, self.p, dirichlet, _shared=shared)

    # -- evaluation -------------------------------------------------------

    def node_values(self, coeffs: np.ndarray) -> np.ndarray:
        """Expand real-dof coefficients to all node values."""
        return self.T @ coeffs

    def cell_values(self, coeffs: np.ndarray) -> np.ndarray:
        """(ncells, nb) node values per cell."""
        return self.node_values(coeffs)[self.cell_nodes]

    def locate_key(self, kx: int, ky: int) -> int:
        """Index of a leaf cell containing the point with the given keys.

        Keys on a cell interface belong to several cells; all adjacent
        candidates are tried (needed along the L-shape reentrant edges).
        """
        p = self.p
        Lmax = self.mesh.max_level
        for L in range(Lmax, self.mesh.domain.min_level - 1, -1):
            denom = p << (Lmax - L)
            top = (1 << L) - 1
            cand_i = {min(kx // denom, top)}
            if kx % denom == 0 and kx > 0:
                cand_i.add(kx // denom - 1)
            cand_j = {min(ky // denom, top)}
            if ky % denom == 0 and ky > 0:
                cand_j.add(ky // denom - 1)
            for i in sorted(cand_i):
                for j in sorted(cand_j):
                    cell = (L, int(i), int(j))
                    if self.mesh.is_leaf(cell):
                        return self._cell_index(cell)
        raise ValueError("point outside mesh")

    def _cell_index(self, cell) -> int:
        return self._cell_lookup[cell]

    def locate_point(self, x: float, y: float) -> tuple[int, float, float]:
        """Leaf cell index plus reference coordinates of a domain point."""
        dom = self.mesh.domain
        fx = (x - dom.x0) / dom.side
        fy = (y - dom.y0) / dom.side
        tol = 1e-12
        for L in range(self.mesh.max_level, dom.min_level - 1, -1):
            n = 1 << L
            i0 = min(max(int(fx * n), 0), n - 1)
            j0 = min(max(int(fy * n), 0), n - 1)
            cand_i = {i0}
            if fx * n - i0 < tol and i0 > 0:
                cand_i.add(i0 - 1)
            cand_j = {j0}
            if fy * n - j0 < tol and j0 > 0:
                cand_j.add(j0 - 1)
            for i in sorted(cand_i, reverse=True):
                for j in sorted(cand_j, reverse=True):
                    cell = (L, i, j)
                    if self.mesh.is_leaf(cell):
                        return self._cell_lookup[cell], fx * n - i, fy * n - j
        raise ValueError(f"point ({x}, {y}) outside mesh")

    def eval(self, coeffs: np.ndarray, xs, ys) -> np.ndarray:
        """Point evaluation of the function with the given coefficients."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        vals = np.empty(len(xs))
        nodevals = self.node_values(coeffs)
        for k in range(len(xs)):
            ci, rx, ry = self.locate_point(xs[k], ys[k])
            B = tensor_eval(self.p, [rx], [ry])
            vals[k] = B[0] @ nodevals[self.cell_nodes[ci]]
        return vals


def build_space(mesh: Mesh, p: int,
                dirichlet: BoundaryRegion | None = None) -> Space:
    return Space(mesh, p, dirichlet)


def injection_matrix(coarse: Space, fine: Space) -> sp.csr_matrix:
    """Exact embedding of a coarse space into a nested fine space.

    Returns Inj (fine.n_real x coarse.n_real): fine real-dof values of the
    injected coarse function.  Requires the fine mesh to refine the coarse
    mesh cell-wise (uniform_refine lineage).
    """
    if coarse.p != fine.p:
        raise ValueError("injection requires equal degree")
    p = coarse.p
    rows, cols, vals = [], [], []
    Dc = coarse.key_scale
    Df = fine.key_scale
    if Df % Dc != 0:
        raise ValueError("spaces are not nested")
    nodevals_cache: dict[int, np.ndarray] = {}
    for r, node in enumerate(fine.real_nodes):
        kxf, kyf = fine.node_keys[node]
        # exact rational position on the coarse key scale
        num_x, num_y = int(kxf) * Dc, int(kyf) * Dc
        ci = coarse.locate_key(num_x // Df, num_y // Df)
        L, i, j = coarse.mesh.cells[ci]
        denom = Df * (coarse.p << (coarse.mesh.max_level - L)) // Dc
        rx = (kxf - i * denom) / denom * 1.0
        ry = (kyf - j * denom) / denom * 1.0
        B = nodevals_cache.get((round(rx * 10**12), round(ry * 10**12)))
        if B is None:
            B = tensor_eval(p, [rx], [ry])[0]
            nodevals_cache[(round(rx * 10**12), round(ry * 10**12))] = B
        for loc, b in enumerate(B):
            if abs(b) < 1e-14:
                continue
            node_c = coarse.cell_nodes[ci][loc]
            if coarse.is_hanging[node_c]:
                for m, w in coarse.constraints[node_c]:
                    rows.append(r)
                    cols.append(int(coarse.real_of_node[m]))
                    vals.append(b * w)
            else:
                rows.append(r)
                cols.append(int(coarse.real_of_node[node_c]))
                vals.append(b)
    Inj = sp.csr_matrix((vals, (rows, cols)),
                        shape=(fine.n_real, coarse.n_real))
    Inj.sum_duplicates()
    return Inj
