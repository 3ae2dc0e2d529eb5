"""Conforming spaces on 1-irregular meshes: dofs, constraints, injection."""

import numpy as np
import pytest

from wcmo.mesh import Domain, refine, uniform_mesh, uniform_refine
from wcmo.solve import Field
from wcmo.space import BoundaryRegion, build_space, injection_matrix


def lerp_nodes(space, func):
    """Nodal interpolant of a function (real-dof coefficients)."""
    xy = space.real_xy
    return np.asarray(func(xy[:, 0], xy[:, 1]), dtype=float)


def test_dof_counts_2x2_p1(space_2x2_p1):
    assert space_2x2_p1.n_real == 9
    assert space_2x2_p1.n_free == 1


def test_dof_counts_uniform():
    for level, p in [(2, 1), (2, 2), (1, 3)]:
        mesh = uniform_mesh(Domain.unit_square(), level)
        space = build_space(mesh, p, BoundaryRegion.all())
        n = p * (1 << level) + 1
        assert space.n_real == n * n
        assert space.n_free == (n - 2) * (n - 2)


def test_dirichlet_edge_tagging():
    mesh = uniform_mesh(Domain.unit_square(), 2)
    space = build_space(mesh, 1, BoundaryRegion.square_edges("top", "right"))
    xy = space.real_xy[space.dirichlet_mask]
    assert np.all((np.abs(xy[:, 1] - 1) < 1e-12) | (np.abs(xy[:, 0] - 1) < 1e-12))
    # 5 nodes on each tagged edge, one shared corner
    assert space.dirichlet_mask.sum() == 9


@pytest.mark.parametrize("p", [1, 2, 3])
def test_polynomial_reproduction_on_hanging_mesh(p, rng):
    mesh = refine(uniform_mesh(Domain.unit_square(), 2), [(2, 1, 1), (2, 2, 2)])
    space = build_space(mesh, p, None)

    def poly(x, y):
        return (np.asarray(x) + 0.5 * np.asarray(y)) ** p + 2.0

    coeffs = lerp_nodes(space, poly)
    xs = rng.uniform(0, 1, 50)
    ys = rng.uniform(0, 1, 50)
    assert np.allclose(space.eval(coeffs, xs, ys), poly(xs, ys), atol=1e-12)


def test_hanging_constraints_exist():
    mesh = refine(uniform_mesh(Domain.unit_square(), 1), [(1, 0, 0)])
    space = build_space(mesh, 1, None)
    # the two fine edge midpoints hanging on coarse edges are constrained
    assert len(space.constraints) == 2
    for terms in space.constraints.values():
        weights = sorted(w for _, w in terms)
        assert weights == pytest.approx([0.5, 0.5])


@pytest.mark.parametrize("p", [1, 2])
def test_injection_reproduces_coarse_field(p, rng):
    mesh = refine(uniform_mesh(Domain.lshape(), 2), [(2, 0, 3)])
    coarse = build_space(mesh, p, BoundaryRegion.all())
    fine = build_space(uniform_refine(mesh), p, BoundaryRegion.all())
    Inj = injection_matrix(coarse, fine)
    c = rng.standard_normal(coarse.n_real)
    xs = rng.uniform(-1, 1, 80)
    ys = rng.uniform(0, 1, 80)  # upper half lies inside the L-shape
    assert np.allclose(fine.eval(Inj @ c, xs, ys), coarse.eval(c, xs, ys),
                       atol=1e-11)


def test_retag_shares_tables(space_4x4_p2):
    flux = space_4x4_p2.retag(BoundaryRegion.square_edges("top", "right"))
    assert flux.n_real == space_4x4_p2.n_real
    assert flux.cell_nodes is space_4x4_p2.cell_nodes
    assert flux.n_free > space_4x4_p2.n_free


def test_field_shape_validation(space_2x2_p1):
    with pytest.raises(ValueError):
        Field(space_2x2_p1, np.zeros(3))
