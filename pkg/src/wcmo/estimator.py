"""Worst-case multi-objective error estimates in dual-weighted-residual form.

Two pipelines share one two-level workspace:

* operator-ball objectives (L2 on a subregion): surrogate error from the
  uniformly refined space drives an approximate supporting functional, the
  associated dual solve, the DWR estimate and basis-function indicators;
* boundary-flux objectives with incompatible Dirichlet data: the interior
  correction q and the discrete minimal-energy lift l_phi yield the paired
  estimates est1/est2, the bounds bnd1/bnd2 and the marking indicators.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .assembly import assemble_bilinear, assemble_l2, assemble_load
from .coefficients import Constant
from .mesh import uniform_refine
from .solve import Field, SolverError, inject, l2_project, solve_primal, solve_sym
from .space import BoundaryRegion, Space, build_space, injection_matrix

ZERO_GUARD = 1e-14


@dataclass
class EstimateReport:
    """Per-iteration record of estimates, bounds and indicators."""

    iteration: int = 0
    dof: int = 0
    h_min: float = 0.0
    est1: float | None = None
    est2: float | None = None
    bnd1: float | None = None
    bnd2: float | None = None
    reference: float | None = None
    exact: float | None = None
    indicator_ids: np.ndarray = dc_field(default_factory=lambda: np.zeros(0, dtype=int))
    indicators: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))
    sigma: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))
    zero_estimate: bool = False


class LevelPair:
    """Coarse space, its uniform quadrisection, and shared operators."""

    def __init__(self, coarse: Space, eps=None, f=None,
                 rel_tol: float = 1e-10) -> None:
        self.coarse = coarse
        self.eps = eps if eps is not None else Constant(1.0)
        self.f = f
        self.rel_tol = rel_tol
        fine_mesh = uniform_refine(coarse.mesh)
        self.fine = build_space(fine_mesh, coarse.p, coarse.dirichlet)
        self.Inj = injection_matrix(coarse, self.fine)
        self.A = assemble_bilinear(self.fine, eps=self.eps)
        self.b = assemble_load(self.fine, f) if f is not None \
            else np.zeros(self.fine.n_real)
        self._M_fine = None
        self._M_coarse = None

    @property
    def M_fine(self):
        if self._M_fine is None:
            self._M_fine = assemble_l2(self.fine)
        return self._M_fine

    @property
    def M_coarse(self):
        if self._M_coarse is None:
            self._M_coarse = assemble_l2(self.coarse)
        return self._M_coarse

    def solve_both(self, g=None):
        """Primal Galerkin solutions on the coarse and fine spaces."""
        A_c = self.Inj.T @ self.A @ self.Inj
        b_c = self.Inj.T @ self.b
        u_h = solve_primal(self.coarse, g=g, A=A_c, b=b_c, rel_tol=self.rel_tol)
        u_fine = solve_primal(self.fine, g=g, A=self.A, b=self.b,
                              rel_tol=self.rel_tol)
        return u_h, u_fine

    def surrogate_error(self, u_h: Field, u_fine: Field) -> np.ndarray:
        """Fine coefficients of u^(h/2) - u^h."""
        return u_fine.coeffs - self.Inj @ u_h.coeffs

    def residual_vector(self, u_h: Field) -> np.ndarray:
        """<r(u_h), phi_i> over all fine real dofs."""
        return self.b - self.A @ (self.Inj @ u_h.coeffs)


# -- support functions --------------------------------------------------


def support_finite_hull(functionals, error: Field):
    """Support function of a finite convex hull: (max value, argmax index).

    The index is 1-based and ties break to the smallest index.
    """
    if not functionals:
        raise ValueError("finite hull requires at least one functional")
    values = [f.apply(error) for f in functionals]
    idx = int(np.argmax(values))
    return float(values[idx]), idx + 1


def support_unit_ball(error: Field, inner_product: str = "H1", eps=None) -> float:
    """Support function of the dual-norm unit ball: the error's norm."""
    from .solve import norm
    if inner_product == "H1":
        return norm(error, "H1")
    if inner_product == "energy":
        return norm(error, "energy", eps=eps)
    raise ValueError(f"unknown inner product {inner_product!r}")


# -- operator-ball (L2 on omega) pipeline --------------------------------


def dual_solve_supporting(pair: LevelPair, u_h: Field, u_fine: Field,
                          omega) -> tuple[Field, bool]:
    """Dual solution for the approximate supporting functional on omega.

    Solves a_eps(v, z) = (chi_omega e_s, v) / ||chi_omega e_s||_L2 over the
    fine homogeneous subspace, with e_s = u^(h/2) - u^h.  A vanishing
    surrogate error short-circuits to the zero field (flag True).
    """
    fine = pair.fine
    e = pair.surrogate_error(u_h, u_fine)
    M_omega = assemble_l2(fine, region=omega if omega is not None else "all")
    Me = M_omega @ e
    nrm = float(np.sqrt(max(e @ Me, 0.0)))
    scale = float(np.sqrt(max(u_fine.coeffs @ (pair.M_fine @ u_fine.coeffs), 0.0)))
    if nrm <= ZERO_GUARD * max(scale, 1.0):
        return Field.zero(fine), True
    free = fine.free_idx
    x = solve_sym(pair.A[free][:, free], Me[free] / nrm, rel_tol=pair.rel_tol)
    coeffs = np.zeros(fine.n_real)
    coeffs[free] = x
    return Field(fine, coeffs), False


def dwr_estimate(pair: LevelPair, u_h: Field, z_fine: Field) -> float:
    """DWR pairing <r(u_h), z^(h/2)>."""
    return float(pair.residual_vector(u_h) @ z_fine.coeffs)


def indicator_decompose(pair: LevelPair, u_h: Field, z_fine: Field):
    """Basis-function indicators from z^(h/2) minus its coarse projection.

    Expands d = z - Pi z over the fine nodal basis; eta_i =
    |sigma_i <r(u_h), psi_i>|.  Returns (dof ids, eta, sigma).
    """
    Pi_z = l2_project(z_fine, pair.coarse, rel_tol=pair.rel_tol,
                      M_fine=pair.M_fine, Inj=pair.Inj, M_coarse=pair.M_coarse)
    d = z_fine.coeffs - pair.Inj @ Pi_z.coeffs
    r = pair.residual_vector(u_h)
    sigma = d
    eta = np.abs(sigma * r)
    ids = np.arange(pair.fine.n_real)
    return ids, eta, sigma


# -- boundary-flux pipeline ----------------------------------------------


def solve_q(pair: LevelPair, u_h: Field, u_fine: Field) -> Field:
    """Interior correction: a_eps(q, v) = -a_eps(u^(h/2)-u^h, v), v in V0."""
    zero_space = pair.fine.retag(BoundaryRegion.all())
    e = pair.surrogate_error(u_h, u_fine)
    free = zero_space.free_idx
    rhs = -(pair.A @ e)[free]
    x = solve_sym(pair.A[free][:, free], rhs, rel_tol=pair.rel_tol)
    coeffs = np.zeros(pair.fine.n_real)
    coeffs[free] = x
    return Field(pair.fine, coeffs)


def solve_lift_phi(pair: LevelPair, u_h: Field, u_fine: Field, q: Field,
                   flux_constraint: BoundaryRegion) -> Field:
    """Discrete minimal-energy lift of the worst-case trace.

    Solves a_eps(l_phi, v) = a_eps(u^(h/2)-u^h+q, v) over the fine space
    vanishing on the complement of omega (``flux_constraint`` region).
    """
    flux_space = pair.fine.retag(flux_constraint)
    e = pair.surrogate_error(u_h, u_fine)
    free = flux_space.free_idx
    rhs = (pair.A @ (e + q.coeffs))[free]
    x = solve_sym(pair.A[free][:, free], rhs, rel_tol=pair.rel_tol)
    coeffs = np.zeros(pair.fine.n_real)
    coeffs[free] = x
    return Field(pair.fine, coeffs)


def trace_halfnorm(l_phi: Field, eps=None, A=None) -> float:
    """Trace half-norm of the lift's boundary values: sqrt(a_eps(l, l))."""
    if A is None:
        A = assemble_bilinear(l_phi.space, eps=eps)
    return float(np.sqrt(max(l_phi.coeffs @ (A @ l_phi.coeffs), 0.0)))


@dataclass
class FluxEstimates:
    est1: float
    est2: float
    bnd1: float
    bnd2: float
    bnd2_alt: float      # from the q-corrected expression; coincides with bnd2
    indicator_ids: np.ndarray
    indicators: np.ndarray
    sigma: np.ndarray
    zero_estimate: bool = False


def flux_estimates(pair: LevelPair, u_h: Field, u_fine: Field, q: Field,
                   l_phi: Field, flux_constraint: BoundaryRegion) -> FluxEstimates:
    """Worst-case flux estimates est1/est2, bounds bnd1/bnd2, indicators.

    sigma expands l_phi / |||l_phi||| over the fine basis of the space
    vanishing on the flux-constraint region; the indicators are the bnd2
    summands.
    """
    flux_space = pair.fine.retag(flux_constraint)
    free = flux_space.free_idx
    e = pair.surrogate_error(u_h, u_fine)
    Al = pair.A @ l_phi.coeffs
    nrm2 = float(max(l_phi.coeffs @ Al, 0.0))
    nrm = float(np.sqrt(nrm2))
    scale = float(np.sqrt(max(u_fine.coeffs @ (pair.A @ u_fine.coeffs), 0.0)))
    if nrm <= ZERO_GUARD * max(scale, 1.0):
        z = np.zeros(len(free))
        return FluxEstimates(0.0, 0.0, 0.0, 0.0, 0.0, free, z, z, True)
    sigma = l_phi.coeffs[free] / nrm
    est1 = abs(float(e @ Al)) / nrm
    est2 = nrm2 / nrm
    Ae = (pair.A @ e)[free]
    bnd1 = float(np.sum(np.abs(sigma * Ae)))
    bnd2 = float(np.sum(np.abs(sigma * Al[free])))
    Aeq = (pair.A @ (e + q.coeffs))[free]
    bnd2_alt = float(np.sum(np.abs(sigma * Aeq)))
    eta = np.abs(sigma * Al[free])
    return FluxEstimates(est1, est2, bnd1, bnd2, bnd2_alt, free, eta, sigma)


# -- alternative representations -----------------------------------------


def solve_dual_pair(pair: LevelPair, j) -> tuple[Field, Field]:
    """Galerkin dual solutions z^h and z^(h/2) for a fixed functional j."""
    jv_f = j.dual_vector(pair.fine)
    jv_c = pair.Inj.T @ jv_f
    free_f = pair.fine.free_idx
    free_c = pair.coarse.free_idx
    A_c = pair.Inj.T @ pair.A @ pair.Inj
    zc = np.zeros(pair.coarse.n_real)
    zc[free_c] = solve_sym(A_c[free_c][:, free_c], jv_c[free_c],
                           rel_tol=pair.rel_tol)
    zf = np.zeros(pair.fine.n_real)
    zf[free_f] = solve_sym(pair.A[free_f][:, free_f], jv_f[free_f],
                           rel_tol=pair.rel_tol)
    return Field(pair.coarse, zc), Field(pair.fine, zf)


def alt_representations(pair: LevelPair, u_h: Field, u_fine: Field,
                        z_h: Field, z_fine: Field, j):
    """Primal, dual and symmetric error representations for a fixed j.

    primal = <r(u_h), z^(h/2)>; dual = <rho(z^h), u^(h/2) - u^h>;
    symmetric = 1/2 <r(u_h), z^(h/2) - z^h> + 1/2 dual.
    """
    r = pair.residual_vector(u_h)
    primal = float(r @ z_fine.coeffs)
    e = pair.surrogate_error(u_h, u_fine)
    jv = j.dual_vector(pair.fine)
    zh_f = pair.Inj @ z_h.coeffs
    dual = float(jv @ e - e @ (pair.A @ zh_f))
    symmetric = 0.5 * float(r @ (z_fine.coeffs - zh_f)) + 0.5 * dual
    return primal, dual, symmetric


# -- reference estimates --------------------------------------------------


def reference_estimate(case, u_h: Field, ref_space: Space,
                       eps=None, rel_tol: float = 1e-10) -> float:
    """Estimate recomputed against a much finer nested reference space."""
    coarse = u_h.space
    if ref_space.mesh.max_level <= coarse.mesh.max_level:
        raise ValueError("reference space must refine the working space")
    pair = RefPair(coarse, ref_space, eps=eps, f=case.f, rel_tol=rel_tol)
    u_ref = solve_primal(ref_space, g=case.g, A=pair.A, b=pair.b,
                         rel_tol=rel_tol)
    obj = case.objective
    if obj.kind == "operator_ball_l2":
        z, zero = dual_solve_supporting(pair, u_h, u_ref, obj.region)
        return 0.0 if zero else dwr_estimate(pair, u_h, z)
    if obj.kind == "boundary_flux":
        q = solve_q(pair, u_h, u_ref)
        l_phi = solve_lift_phi(pair, u_h, u_ref, q, obj.flux_region)
        fe = flux_estimates(pair, u_h, u_ref, q, l_phi, obj.flux_region)
        return fe.est1
    raise ValueError(f"no reference pipeline for objective {obj.kind!r}")


class RefPair(LevelPair):
    """LevelPair variant with an explicitly provided fine space."""

    def __init__(self, coarse: Space, fine: Space, eps=None, f=None,
                 rel_tol: float = 1e-10) -> None:
        self.coarse = coarse
        self.eps = eps if eps is not None else Constant(1.0)
        self.f = f
        self.rel_tol = rel_tol
        self.fine = fine
        self.Inj = injection_matrix(coarse, fine)
        self.A = assemble_bilinear(fine, eps=self.eps)
        self.b = assemble_load(fine, f) if f is not None \
            else np.zeros(fine.n_real)
        self._M_fine = None
        self._M_coarse = None
