"""Quadtree mesh construction, refinement and 1-irregularity."""

import pytest
from hypothesis import given, settings, strategies as st

from wcmo.mesh import (Domain, Mesh, check_one_irregular, parse_mesh, refine,
                       uniform_mesh, uniform_refine)


def test_uniform_mesh_counts():
    for level in (0, 1, 2, 3):
        m = uniform_mesh(Domain.unit_square(), level)
        assert len(m) == 4 ** level


def test_lshape_min_level_and_counts():
    dom = Domain.lshape()
    assert dom.min_level == 1
    m = uniform_mesh(dom, 1)
    assert len(m) == 3
    m2 = uniform_mesh(dom, 3)
    assert len(m2) == 3 * 4 ** 2


def test_lshape_rejects_level_zero():
    with pytest.raises(ValueError):
        uniform_mesh(Domain.lshape(), 0)


def test_lshape_removed_quadrant_not_admitted():
    dom = Domain.lshape()
    assert not dom.admits((1, 1, 0))
    assert dom.admits((1, 0, 0))
    assert not dom.admits((2, 2, 1))  # descendant of the removed quadrant


def test_cell_box_biunit():
    dom = Domain.biunit_square()
    x, y, s = dom.cell_box((1, 0, 1))
    assert (x, y, s) == (-1.0, 0.0, 1.0)


def test_uniform_refine_quadruples():
    m = uniform_mesh(Domain.unit_square(), 2)
    mf = uniform_refine(m)
    assert len(mf) == 4 * len(m)
    assert mf.max_level == m.max_level + 1


def test_refine_empty_marking_is_identity():
    m = uniform_mesh(Domain.unit_square(), 2)
    assert refine(m, []) is m


def test_refine_rejects_non_leaves():
    m = uniform_mesh(Domain.unit_square(), 2)
    with pytest.raises(ValueError):
        refine(m, [(5, 0, 0)])


def test_refine_single_cell_closure():
    # splitting one cell twice forces closure splits on its neighbors
    m = uniform_mesh(Domain.unit_square(), 2)
    m = refine(m, [(2, 0, 0)])
    m = refine(m, [(3, 0, 0)])
    assert check_one_irregular(m)
    assert m.max_level == 4


def test_serialize_roundtrip():
    m = uniform_mesh(Domain.lshape(), 2)
    m = refine(m, [(2, 0, 0), (2, 1, 3)])
    again = parse_mesh(m.domain, m.serialize())
    assert again == m


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=1000), min_size=1,
                max_size=6),
       st.sampled_from(["square", "lshape"]))
def test_refine_preserves_one_irregularity(picks, kind):
    dom = Domain.unit_square() if kind == "square" else Domain.lshape()
    m = uniform_mesh(dom, 2)
    for pick in picks:
        m = refine(m, [m.cells[pick % len(m.cells)]])
    assert check_one_irregular(m)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=1000), min_size=1,
                max_size=5))
def test_refine_covers_area(picks):
    dom = Domain.lshape()
    m = uniform_mesh(dom, 1)
    for pick in picks:
        m = refine(m, [m.cells[pick % len(m.cells)]])
    area = sum(s * s for _, _, s in (m.cell_box(c) for c in m.cells))
    assert area == pytest.approx(dom.area, rel=1e-12)


def test_neighbor_leaves_uniform():
    m = uniform_mesh(Domain.unit_square(), 2)
    assert m.neighbor_leaves((2, 1, 1), "east") == [(2, 2, 1)]
    assert m.neighbor_leaves((2, 0, 0), "west") == []


def test_neighbor_leaves_across_levels():
    m = refine(uniform_mesh(Domain.unit_square(), 1), [(1, 0, 0)])
    # the coarse cell east of the split one sees both fine edge children
    assert m.neighbor_leaves((1, 1, 0), "west") == [(2, 1, 0), (2, 1, 1)]
    assert m.neighbor_leaves((2, 1, 0), "east") == [(1, 1, 0)]
