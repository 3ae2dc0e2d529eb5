"""Tensor-product Lagrange shape functions and Gauss-Legendre tabulation.

Degree-p bases use equispaced nodes a/p on [0,1] per axis; local node
ordering is lexicographic, ``n = a + (p+1)*b`` for node ``(a/p, b/p)``.
On axis-aligned square cells reference gradients only need the 1/s scale,
so all tabulated arrays are geometry-free.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _coeffs_1d(p: int) -> np.ndarray:
    """Monomial coefficients of the p+1 Lagrange polynomials on [0,1].

    Column a holds the coefficients of basis function a (node a/p),
    lowest order first.
    """
    t = np.arange(p + 1) / p if p > 0 else np.array([0.0])
    V = np.vander(t, p + 1, increasing=True)
    return np.linalg.inv(V)


def lagrange_1d(p: int, x) -> np.ndarray:
    """Values of the 1D degree-p Lagrange basis, shape (len(x), p+1)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    X = np.vander(x, p + 1, increasing=True)
    return X @ _coeffs_1d(p)


def lagrange_1d_deriv(p: int, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    C = _coeffs_1d(p)
    D = C[1:, :] * np.arange(1, p + 1)[:, None]
    X = np.vander(x, p, increasing=True) if p > 0 else np.zeros((len(x), 0))
    return X @ D


def gauss_1d(nq: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points/weights on [0,1]."""
    x, w = np.polynomial.legendre.leggauss(nq)
    return 0.5 * (x + 1.0), 0.5 * w


def tensor_eval(p: int, xs, ys, deriv: bool = False):
    """Evaluate the 2D tensor basis at points (xs[k], ys[k]) in [0,1]^2.

    Returns B of shape (npts, (p+1)^2); with deriv=True also reference
    gradients Gx, Gy of the same shape.
    """
    lx = lagrange_1d(p, xs)
    ly = lagrange_1d(p, ys)
    n = len(lx)
    # index [k, b, a]; C-order flatten of (b, a) makes a fastest:
    # local node n = a + (p+1)*b
    B = np.einsum("ka,kb->kba", lx, ly).reshape(n, -1)
    if not deriv:
        return B
    dx = lagrange_1d_deriv(p, xs)
    dy = lagrange_1d_deriv(p, ys)
    Gx = np.einsum("ka,kb->kba", dx, ly).reshape(n, -1)
    Gy = np.einsum("ka,kb->kba", lx, dy).reshape(n, -1)
    return B, Gx, Gy


class BasisTab:
    """Tabulated basis values/gradients at a tensor Gauss rule.

    Attributes
    ----------
    qx, qy : flattened tensor quadrature points in [0,1]^2, length nq^2
    w : tensor weights (unit reference cell)
    B, Gx, Gy : (nq^2, (p+1)^2) tables
    """

    def __init__(self, p: int, nq: int) -> None:
        self.p = p
        self.nq1 = nq
        g, w1 = gauss_1d(nq)
        QX, QY = np.meshgrid(g, g, indexing="xy")
        self.qx = QX.ravel()
        self.qy = QY.ravel()
        self.w = np.outer(w1, w1).ravel()
        self.B, self.Gx, self.Gy = tensor_eval(p, self.qx, self.qy, deriv=True)

    @property
    def nb(self) -> int:
        return (self.p + 1) ** 2


@lru_cache(maxsize=None)
def basis_tab(p: int, nq: int) -> BasisTab:
    return BasisTab(p, nq)
