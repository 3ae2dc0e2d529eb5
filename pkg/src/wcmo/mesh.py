"""Hierarchical quadrilateral meshes over square and L-shaped domains.

Cells are identified by ``(level, i, j)``: at refinement level ``L`` the
bounding square is divided into a virtual ``2^L x 2^L`` grid and ``(i, j)``
are the column/row indices of the cell in that grid.  A mesh is the set of
leaf cells of a quadtree over that grid, kept 1-irregular: edge-adjacent
leaves differ by at most one level.

Meshes are immutable; refinement returns a new mesh.
"""

from __future__ import annotations

from dataclasses import dataclass

Cell = tuple[int, int, int]

EDGE_DIRS = ("west", "east", "south", "north")


@dataclass(frozen=True)
class Domain:
    """Square domain, or the L-shape (-1,1)^2 minus [0,1)x(-1,0]."""

    kind: str  # 'square' | 'lshape'
    x0: float
    y0: float
    side: float

    @staticmethod
    def square(lo=(0.0, 0.0), hi=(1.0, 1.0)) -> "Domain":
        sx = hi[0] - lo[0]
        sy = hi[1] - lo[1]
        if not (sx > 0 and sy > 0):
            raise ValueError("domain bounds must satisfy lo < hi per axis")
        if abs(sx - sy) > 1e-14 * max(sx, sy):
            raise ValueError("square domain requires equal extents per axis")
        return Domain("square", float(lo[0]), float(lo[1]), float(sx))

    @staticmethod
    def unit_square() -> "Domain":
        return Domain.square((0.0, 0.0), (1.0, 1.0))

    @staticmethod
    def biunit_square() -> "Domain":
        return Domain.square((-1.0, -1.0), (1.0, 1.0))

    @staticmethod
    def lshape() -> "Domain":
        return Domain("lshape", -1.0, -1.0, 2.0)

    @property
    def min_level(self) -> int:
        # The L-shape root straddles the removed quadrant; its coarsest
        # tiling consists of the three admissible level-1 quadrants.
        return 1 if self.kind == "lshape" else 0

    def admits(self, cell: Cell) -> bool:
        """Whether the cell lies inside the domain."""
        level, i, j = cell
        if level < 0 or not (0 <= i < 1 << level) or not (0 <= j < 1 << level):
            return False
        if self.kind == "lshape":
            if level < 1:
                return False
            shift = level - 1
            if (i >> shift, j >> shift) == (1, 0):
                return False
        return True

    def cell_box(self, cell: Cell) -> tuple[float, float, float]:
        """Lower-left corner and side length of a cell."""
        level, i, j = cell
        s = self.side / (1 << level)
        return self.x0 + i * s, self.y0 + j * s, s

    @property
    def area(self) -> float:
        a = self.side * self.side
        return 0.75 * a if self.kind == "lshape" else a


def _children(cell: Cell) -> list[Cell]:
    level, i, j = cell
    return [(level + 1, 2 * i + di, 2 * j + dj)
            for dj in (0, 1) for di in (0, 1)]


def _parent(cell: Cell) -> Cell:
    level, i, j = cell
    return (level - 1, i >> 1, j >> 1)


def _same_level_neighbor(cell: Cell, direction: str) -> Cell:
    level, i, j = cell
    if direction == "west":
        return (level, i - 1, j)
    if direction == "east":
        return (level, i + 1, j)
    if direction == "south":
        return (level, i, j - 1)
    if direction == "north":
        return (level, i, j + 1)
    raise ValueError(f"unknown direction {direction!r}")


# Children of a cell adjacent to the given edge of that cell.
_EDGE_CHILDREN = {
    "west": ((0, 0), (0, 1)),
    "east": ((1, 0), (1, 1)),
    "south": ((0, 0), (1, 0)),
    "north": ((0, 1), (1, 1)),
}

_OPPOSITE = {"west": "east", "east": "west", "south": "north", "north": "south"}


class Mesh:
    """Leaf cells of a 1-irregular quadtree over a Domain."""

    def __init__(self, domain: Domain, cells) -> None:
        self.domain = domain
        self.cells: tuple[Cell, ...] = tuple(sorted(cells))
        self._leafset = frozenset(self.cells)
        if not self.cells:
            raise ValueError("mesh has no cells")
        self.max_level = max(c[0] for c in self.cells)
        self.min_level = min(c[0] for c in self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Mesh) and self.domain == other.domain
                and self.cells == other.cells)

    def __hash__(self) -> int:
        return hash((self.domain, self.cells))

    def is_leaf(self, cell: Cell) -> bool:
        return cell in self._leafset

    def cell_box(self, cell: Cell) -> tuple[float, float, float]:
        return self.domain.cell_box(cell)

    def neighbor_leaves(self, cell: Cell, direction: str) -> list[Cell]:
        """Leaves sharing (part of) the given edge of ``cell``."""
        target = _same_level_neighbor(cell, direction)
        if not self.domain.admits(target):
            return []
        if target in self._leafset:
            return [target]
        # coarser neighbor: walk up
        anc = target
        while anc[0] > self.domain.min_level:
            anc = _parent(anc)
            if anc in self._leafset:
                return [anc]
        # finer neighbors: collect descendants along the shared edge
        out: list[Cell] = []
        near = _OPPOSITE[direction]
        stack = [target]
        while stack:
            c = stack.pop()
            if c in self._leafset:
                out.append(c)
                continue
            if c[0] >= self.max_level:
                continue
            stack.extend((c[0] + 1, 2 * c[1] + di, 2 * c[2] + dj)
                         for di, dj in _EDGE_CHILDREN[near])
        return sorted(out)

    def serialize(self) -> str:
        """Plain-text cell list, one ``level i j`` per line."""
        return "\n".join(f"{l} {i} {j}" for (l, i, j) in self.cells) + "\n"


def parse_mesh(domain: Domain, text: str) -> Mesh:
    cells = []
    for line in text.strip().splitlines():
        l, i, j = (int(t) for t in line.split())
        cells.append((l, i, j))
    return Mesh(domain, cells)


def uniform_mesh(domain: Domain, level: int) -> Mesh:
    """Uniform mesh with all leaves at the given level."""
    if level < domain.min_level:
        raise ValueError(
            f"level {level} below minimum {domain.min_level} for {domain.kind}")
    n = 1 << level
    cells = [(level, i, j) for j in range(n) for i in range(n)
             if domain.admits((level, i, j))]
    return Mesh(domain, cells)


def uniform_refine(mesh: Mesh) -> Mesh:
    """Replace every leaf by its four children."""
    cells = [kid for c in mesh.cells for kid in _children(c)]
    return Mesh(mesh.domain, cells)


def refine(mesh: Mesh, marked) -> Mesh:
    """Split the marked leaves, then restore 1-irregularity by closure.

    Closure splits any leaf with an edge neighbor two or more levels finer;
    violating cells are processed in ascending (level, i, j) order, which
    makes the result deterministic.
    """
    marked = set(marked)
    unknown = marked - set(mesh.cells)
    if unknown:
        raise ValueError(f"marked cells are not leaves: {sorted(unknown)[:4]}")
    if not marked:
        return mesh
    current = mesh
    to_split = marked
    while to_split:
        cells = []
        for c in current.cells:
            if c in to_split:
                cells.extend(_children(c))
            else:
                cells.append(c)
        current = Mesh(mesh.domain, cells)
        to_split = set()
        for c in sorted(current.cells):
            for d in EDGE_DIRS:
                for nb in current.neighbor_leaves(c, d):
                    if nb[0] - c[0] >= 2:
                        to_split.add(c)
                        break
    return current


def check_one_irregular(mesh: Mesh) -> bool:
    """Exhaustive 1-irregularity check over all edge-adjacent leaf pairs."""
    for c in mesh.cells:
        for d in EDGE_DIRS:
            for nb in mesh.neighbor_leaves(c, d):
                if abs(nb[0] - c[0]) > 1:
                    return False
    return True
