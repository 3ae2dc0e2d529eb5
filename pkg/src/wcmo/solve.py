"""Fields, linear solvers, Galerkin solves, norms and pairings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (SubdomainBox, assemble_bilinear, assemble_l2,
                       assemble_load, integrate)
from .coefficients import Constant
from .space import Space, injection_matrix


class SolverError(RuntimeError):
    """Iterative solver failed to reach the requested residual."""

    def __init__(self, residual: float, tol: float) -> None:
        super().__init__(
            f"linear solver stalled: residual {residual:.3e} > tol {tol:.3e}")
        self.residual = residual
        self.tol = tol


@dataclass
class Field:
    """Discrete function: real-dof coefficient vector over a Space."""

    space: Space
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.space.n_real,):
            raise ValueError(
                f"coefficient length {self.coeffs.shape} != ({self.space.n_real},)")

    def __call__(self, xs, ys):
        return self.space.eval(self.coeffs, xs, ys)

    @staticmethod
    def zero(space: Space) -> "Field":
        return Field(space, np.zeros(space.n_real))


def solve_sym(matrix, rhs, rel_tol: float = 1e-10, max_iter: int | None = None,
              method: str = "auto") -> np.ndarray:
    """Solve an SPD system to ||Ax - b|| <= rel_tol * ||b||.

    method='cg' runs Jacobi-preconditioned conjugate gradients; 'direct'
    uses a sparse LU factorization; 'auto' tries the factorization first
    and falls back to CG, verifying the residual contract either way.
    """
    matrix = sp.csr_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    n = matrix.shape[0]
    if n == 0:
        return np.zeros(0)
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros(n)

    def residual(x):
        return float(np.linalg.norm(matrix @ x - rhs))

    if method in ("auto", "direct"):
        x = None
        try:
            x = spla.splu(sp.csc_matrix(matrix)).solve(rhs)
        except RuntimeError:
            pass
        if x is not None and residual(x) <= rel_tol * bnorm:
            return x
        if method == "direct":
            raise SolverError(residual(x) if x is not None else np.inf,
                              rel_tol * bnorm)

    diag = matrix.diagonal()
    if np.any(diag <= 0):
        raise ValueError("matrix is not positive definite on the diagonal")
    M = sp.diags(1.0 / diag)
    if max_iter is None:
        max_iter = 10 * n
    x, _ = spla.cg(matrix, rhs, rtol=0.1 * rel_tol, atol=0.0, M=M,
                   maxiter=max_iter)
    res = residual(x)
    if res > rel_tol * bnorm:
        raise SolverError(res, rel_tol * bnorm)
    return x


def discrete_lift(space: Space, g) -> Field:
    """Nodal interpolation of boundary data at Dirichlet-tagged dofs."""
    coeffs = np.zeros(space.n_real)
    if g is not None:
        mask = space.dirichlet_mask
        xy = space.real_xy[mask]
        if len(xy):
            vals = np.asarray(g(xy[:, 0], xy[:, 1]), dtype=float)
            if not np.isfinite(vals).all():
                raise ValueError("boundary data is not finite at a mesh node")
            coeffs[mask] = vals
    return Field(space, coeffs)


def solve_primal(space: Space, f=None, g=None, eps=None,
                 rel_tol: float = 1e-10, A: sp.csr_matrix | None = None,
                 b: np.ndarray | None = None) -> Field:
    """Galerkin solution u_h = lift(g) + u_0 of the Dirichlet problem."""
    if eps is None:
        eps = Constant(1.0)
    if A is None:
        A = assemble_bilinear(space, eps=eps)
    if b is None:
        b = assemble_load(space, f) if f is not None else np.zeros(space.n_real)
    lift = discrete_lift(space, g)
    free = space.free_idx
    rhs = b[free] - (A @ lift.coeffs)[free]
    x = solve_sym(A[free][:, free], rhs, rel_tol=rel_tol)
    coeffs = lift.coeffs.copy()
    coeffs[free] = x
    return Field(space, coeffs)


def solve_dual(space: Space, j_vec: np.ndarray, eps=None,
               rel_tol: float = 1e-10, A: sp.csr_matrix | None = None) -> Field:
    """Riesz representer in the homogeneous subspace: a(v, z) = j(v)."""
    if A is None:
        A = assemble_bilinear(space, eps=eps)
    free = space.free_idx
    x = solve_sym(A[free][:, free], j_vec[free], rel_tol=rel_tol)
    coeffs = np.zeros(space.n_real)
    coeffs[free] = x
    return Field(space, coeffs)


def inject(field: Field, fine: Space, Inj=None) -> Field:
    """Exact representation of a coarse field in a nested fine space."""
    if field.space is fine or field.space.mesh == fine.mesh:
        return Field(fine, field.coeffs)
    if Inj is None:
        Inj = injection_matrix(field.space, fine)
    return Field(fine, Inj @ field.coeffs)


def residual_pair(u_h: Field, v: Field, f=None, eps=None,
                  A: sp.csr_matrix | None = None,
                  b: np.ndarray | None = None, Inj=None) -> float:
    """<r(u_h), v> = b(v) - a_eps(u_h, v), with v in a refining space."""
    fine = v.space
    if A is None:
        A = assemble_bilinear(fine, eps=eps)
    if b is None:
        b = assemble_load(fine, f) if f is not None else np.zeros(fine.n_real)
    u = inject(u_h, fine, Inj)
    return float(b @ v.coeffs - u.coeffs @ (A @ v.coeffs))


def l2_project(fine_field: Field, coarse: Space, rel_tol: float = 1e-10,
               M_fine=None, Inj=None, M_coarse=None) -> Field:
    """L2-projection onto the span of the coarse space's free dofs."""
    fine = fine_field.space
    if fine.mesh == coarse.mesh:
        return Field(coarse, fine_field.coeffs)
    if M_fine is None:
        M_fine = assemble_l2(fine)
    if Inj is None:
        Inj = injection_matrix(coarse, fine)
    if M_coarse is None:
        M_coarse = assemble_l2(coarse)
    free = coarse.free_idx
    rhs = (Inj.T @ (M_fine @ fine_field.coeffs))[free]
    x = solve_sym(M_coarse[free][:, free], rhs, rel_tol=rel_tol)
    coeffs = np.zeros(coarse.n_real)
    coeffs[free] = x
    return Field(coarse, coeffs)


def flux_functional(u: Field, theta: Field, f=None, eps=None) -> float:
    """Variationally consistent boundary flux: a_eps(u, theta) - b(theta)."""
    fine = theta.space if theta.space.mesh.max_level >= u.space.mesh.max_level \
        else u.space
    A = assemble_bilinear(fine, eps=eps)
    b = assemble_load(fine, f) if f is not None else np.zeros(fine.n_real)
    uc = inject(u, fine).coeffs
    tc = inject(theta, fine).coeffs
    return float(uc @ (A @ tc) - b @ tc)


def norm(field: Field, kind: str = "L2", eps=None,
         region: SubdomainBox | str = "all") -> float:
    """L2 (optionally on omega), energy sqrt(a_eps(u,u)), or full H1 norm."""
    c = field.coeffs
    if kind == "L2":
        M = assemble_l2(field.space, region=region)
        return float(np.sqrt(max(c @ (M @ c), 0.0)))
    if kind == "energy":
        A = assemble_bilinear(field.space, eps=eps)
        return float(np.sqrt(max(c @ (A @ c), 0.0)))
    if kind == "H1":
        A = assemble_bilinear(field.space)
        M = assemble_l2(field.space)
        return float(np.sqrt(max(c @ (A @ c) + c @ (M @ c), 0.0)))
    raise ValueError(f"unknown norm kind {kind!r}")


# -- linear functionals -------------------------------------------------


class VolumeLoad:
    """j(v) = int_Omega f v."""

    def __init__(self, f) -> None:
        self.f = f

    def apply(self, v: Field) -> float:
        return float(assemble_load(v.space, self.f) @ v.coeffs)

    def dual_vector(self, space: Space) -> np.ndarray:
        return assemble_load(space, self.f)


class L2PairOnRegion:
    """j(v) = (v, chi_omega w) for a weight field w."""

    def __init__(self, weight: Field, region: SubdomainBox | str = "all") -> None:
        self.weight = weight
        self.region = region

    def apply(self, v: Field) -> float:
        return float(self.dual_vector(v.space) @ v.coeffs)

    def dual_vector(self, space: Space) -> np.ndarray:
        M = assemble_l2(space, self.weight.space, region=self.region)
        return M @ self.weight.coeffs

    def scaled(self, factor: float) -> "L2PairOnRegion":
        return L2PairOnRegion(
            Field(self.weight.space, factor * self.weight.coeffs), self.region)


class FormPairing:
    """j(v) = a_eps(v, theta)."""

    def __init__(self, theta: Field, eps=None) -> None:
        self.theta = theta
        self.eps = eps

    def apply(self, v: Field) -> float:
        return float(self.dual_vector(v.space) @ v.coeffs)

    def dual_vector(self, space: Space) -> np.ndarray:
        A = assemble_bilinear(space, self.theta.space, eps=self.eps)
        return A @ self.theta.coeffs


class ResidualOf:
    """j(v) = <r(u), v> = b(v) - a_eps(u, v)."""

    def __init__(self, u: Field, f=None, eps=None) -> None:
        self.u = u
        self.f = f
        self.eps = eps

    def apply(self, v: Field) -> float:
        return residual_pair(self.u, v, f=self.f, eps=self.eps)

    def dual_vector(self, space: Space) -> np.ndarray:
        b = assemble_load(space, self.f) if self.f is not None \
            else np.zeros(space.n_real)
        A = assemble_bilinear(space, self.u.space, eps=self.eps)
        return b - A @ self.u.coeffs
