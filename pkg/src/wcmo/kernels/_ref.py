"""Pure-numpy element kernels (fallback for the compiled extension)."""

from __future__ import annotations

import numpy as np


def local_stiffness(w, Gx, Gy, eps):
    """Per-cell stiffness blocks, shape (ncells, nb, nb).

    ``eps`` holds the diffusion coefficient at the quadrature points of each
    cell, shape (ncells, nq).  Square cells make the stiffness integrand
    scale-invariant, so no geometry enters.
    """
    we = eps * w[None, :]
    return (np.einsum("cq,qi,qj->cij", we, Gx, Gx, optimize=True)
            + np.einsum("cq,qi,qj->cij", we, Gy, Gy, optimize=True))


def local_mass(w, B, areas):
    """Per-cell mass blocks, shape (ncells, nb, nb)."""
    M = np.einsum("q,qi,qj->ij", w, B, B)
    return areas[:, None, None] * M[None, :, :]


def local_load(w, B, fvals, areas):
    """Per-cell load vectors int f*phi, shape (ncells, nb)."""
    return areas[:, None] * np.einsum("cq,q,qi->ci", fvals, w, B, optimize=True)
