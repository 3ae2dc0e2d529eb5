"""Solve-Estimate-Mark-Refine adaptive loop.

Marking is function-based: a minimal set of fine basis functions captures a
(1 - zeta) fraction of the total indicator mass, and the coarse elements
covering their supports get refined.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .estimator import (EstimateReport, LevelPair, dual_solve_supporting,
                        dwr_estimate, flux_estimates, indicator_decompose,
                        reference_estimate, solve_lift_phi, solve_q)
from .mesh import Mesh, refine, uniform_refine
from .solve import SolverError
from .space import Space, build_space


@dataclass(frozen=True)
class MarkingParams:
    """Dörfler-style bulk-chasing parameters: keep (1 - zeta) of the mass."""

    zeta: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.zeta < 1.0:
            raise ValueError("zeta must lie in [0, 1)")


def mark_functions(ids: np.ndarray, eta: np.ndarray,
                   params: MarkingParams) -> np.ndarray:
    """Minimal id set with sum(eta) >= (1 - zeta) * total.

    Greedy: descending indicator value, ties broken by ascending id, take
    the shortest qualifying prefix.  A zero total marks nothing.
    """
    ids = np.asarray(ids)
    eta = np.asarray(eta, dtype=float)
    total = float(eta.sum())
    if total <= 0.0:
        return ids[:0]
    order = np.lexsort((ids, -eta))
    csum = np.cumsum(eta[order])
    k = int(np.searchsorted(csum, (1.0 - params.zeta) * total - 1e-14 * total)) + 1
    return ids[order[:k]]


def select_elements(pair: LevelPair, marked_ids: np.ndarray) -> list:
    """Coarse leaves covering the supports of the marked fine functions.

    The support of a fine basis function is the union of fine cells touching
    its node, plus — for weights routed through hanging-node constraints —
    the cells of its master nodes.  Each fine cell maps to its coarse leaf.
    """
    fine = pair.fine
    coarse_mesh = pair.coarse.mesh
    if len(marked_ids) == 0:
        return []
    marked_nodes = set(int(fine.real_nodes[i]) for i in np.asarray(marked_ids))
    # nodes whose constraint rows reference a marked master also carry mass
    extra = set()
    for node, terms in fine.constraints.items():
        masters = {int(fine.real_nodes[fine.real_of_node[m]]) for m, _ in terms}
        if masters & marked_nodes:
            extra.add(node)
    touched = marked_nodes | extra
    cells: set = set()
    cell_nodes = fine.cell_nodes
    for ci, cell in enumerate(fine.mesh.cells):
        if touched.intersection(cell_nodes[ci].tolist()):
            cells.add(cell)
    out = set()
    for cell in cells:
        parent = (cell[0] - 1, cell[1] >> 1, cell[2] >> 1)
        if coarse_mesh.is_leaf(parent):
            out.add(parent)
        elif coarse_mesh.is_leaf(cell):
            out.add(cell)
        else:
            raise RuntimeError(f"fine cell {cell} has no coarse leaf")
    return sorted(out)


@dataclass
class ConvergenceHistory:
    reports: list = dc_field(default_factory=list)
    meshes: list = dc_field(default_factory=list)
    failed: bool = False
    failure: str | None = None

    def append(self, report: EstimateReport, mesh: Mesh) -> None:
        self.reports.append(report)
        self.meshes.append(mesh)


def _estimate_on(pair: LevelPair, case, u_h, u_fine) -> EstimateReport:
    obj = case.objective
    rep = EstimateReport()
    if obj.kind == "operator_ball_l2":
        z, zero = dual_solve_supporting(pair, u_h, u_fine, obj.region)
        if zero:
            rep.est2 = 0.0
            rep.zero_estimate = True
        else:
            rep.est2 = dwr_estimate(pair, u_h, z)
            ids, eta, sigma = indicator_decompose(pair, u_h, z)
            rep.indicator_ids, rep.indicators, rep.sigma = ids, eta, sigma
        return rep
    if obj.kind == "boundary_flux":
        q = solve_q(pair, u_h, u_fine)
        l_phi = solve_lift_phi(pair, u_h, u_fine, q, obj.flux_region)
        fe = flux_estimates(pair, u_h, u_fine, q, l_phi, obj.flux_region)
        rep.est1, rep.est2 = fe.est1, fe.est2
        rep.bnd1, rep.bnd2 = fe.bnd1, fe.bnd2
        rep.indicator_ids = fe.indicator_ids
        rep.indicators = fe.indicators
        rep.sigma = fe.sigma
        rep.zero_estimate = fe.zero_estimate
        return rep
    raise ValueError(f"no estimation pipeline for objective {obj.kind!r}")


def semr_run(case, p: int, mode: str = "adaptive", max_iters: int = 10,
             dof_budget: int | None = None, params: MarkingParams | None = None,
             tol: float = 0.0, rel_tol: float = 1e-10,
             reference_levels: int = 0,
             initial_mesh: Mesh | None = None) -> ConvergenceHistory:
    """Adaptive (or uniform) estimation loop for a benchmark case.

    Each iteration solves on V^h and its quadrisection V^(h/2), estimates
    the worst-case objective error, and either refines uniformly or marks
    functions and refines the covering elements.  Stops on max_iters, the
    dof budget, the estimate tolerance, or an empty marked set.  A solver
    failure ends the run with the partial history flagged.
    """
    from .cases import exact_error
    from .mesh import uniform_mesh

    if mode not in ("adaptive", "uniform"):
        raise ValueError(f"unknown mode {mode!r}")
    if params is None:
        params = MarkingParams()
    mesh = initial_mesh if initial_mesh is not None \
        else uniform_mesh(case.domain, case.initial_level)
    history = ConvergenceHistory()

    for it in range(max_iters):
        space = build_space(mesh, p, case.dirichlet)
        if dof_budget is not None and space.n_free > dof_budget:
            break
        try:
            pair = LevelPair(space, eps=case.eps, f=case.f, rel_tol=rel_tol)
            u_h, u_fine = pair.solve_both(g=case.g)
            rep = _estimate_on(pair, case, u_h, u_fine)
            if reference_levels > 0:
                ref_mesh = mesh
                for _ in range(reference_levels):
                    ref_mesh = uniform_refine(ref_mesh)
                ref_space = build_space(ref_mesh, p, case.dirichlet)
                rep.reference = reference_estimate(case, u_h, ref_space,
                                                   eps=case.eps,
                                                   rel_tol=rel_tol)
        except SolverError as err:
            history.failed = True
            history.failure = str(err)
            break
        rep.iteration = it
        rep.dof = space.n_free
        rep.h_min = case.domain.side / (1 << mesh.max_level)
        rep.exact = exact_error(case, u_h)
        history.append(rep, mesh)

        est = rep.est2 if rep.est2 is not None else 0.0
        if tol > 0.0 and abs(est) <= tol:
            break
        if it == max_iters - 1:
            break
        if mode == "uniform":
            mesh = uniform_refine(mesh)
        else:
            marked = mark_functions(rep.indicator_ids, rep.indicators, params)
            cells = select_elements(pair, marked)
            if not cells:
                break
            mesh = refine(mesh, cells)
    return history
