"""Oriented square lattice on a torus.

Coordinates are ``(x, y)`` with ``0 <= x < cols`` and ``0 <= y < rows``.
Vertex ``(x, y)`` has index ``y*cols + x``; the face whose south-west corner is
``(x, y)`` carries the same index. Cell ``(x, y)`` owns two edges: the
horizontal edge ``2*(y*cols + x)`` from ``(x, y)`` to ``(x+1, y)`` and the
vertical edge ``2*(y*cols + x) + 1`` from ``(x, y)`` to ``(x, y+1)``. Every
edge points right or up.

Role names follow the operator pictures: a vertex star has ``a`` (north,
outgoing), ``b`` (east, outgoing), ``c`` (south, incoming), ``d`` (west,
incoming); a face boundary has ``r`` (top), ``s`` (right), ``t`` (bottom),
``u`` (left). For an edge, ``p1`` is the face on the left of its direction of
travel and ``p2`` the one on its right.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, NamedTuple

__all__ = [
    "TorusLattice",
    "EdgeRef",
    "StarIncidence",
    "BoundaryIncidence",
    "Path",
    "DualPath",
    "build_torus",
    "vertex_star",
    "face_boundary",
    "edge_faces",
    "straight_path",
    "straight_dual_path",
]

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

Direction = Literal["+x", "-x", "+y", "-y"]
_STEPS = {"+x": (1, 0), "-x": (-1, 0), "+y": (0, 1), "-y": (0, -1)}


class EdgeRef(NamedTuple):
    id: int
    axis: str
    x: int
    y: int


class StarIncidence(NamedTuple):
    """Edges around a vertex in role order ``(a, b, c, d)``.

    ``signs[k]`` is +1 for an outgoing edge and -1 for an incoming one.
    """

    vertex: int
    edges: tuple[int, int, int, int]
    signs: tuple[int, int, int, int] = (1, 1, -1, -1)

    @property
    def a(self) -> int:
        return self.edges[0]

    @property
    def b(self) -> int:
        return self.edges[1]

    @property
    def c(self) -> int:
        return self.edges[2]

    @property
    def d(self) -> int:
        return self.edges[3]


class BoundaryIncidence(NamedTuple):
    """Edges around a face in role order ``(r, s, t, u)`` = top, right, bottom, left."""

    face: int
    edges: tuple[int, int, int, int]

    @property
    def r(self) -> int:
        return self.edges[0]

    @property
    def s(self) -> int:
        return self.edges[1]

    @property
    def t(self) -> int:
        return self.edges[2]

    @property
    def u(self) -> int:
        return self.edges[3]


@dataclass(frozen=True)
class Path:
    """A walk along primal edges.

    ``signs[k]`` is +1 when ``edges[k]`` is traversed along its orientation.
    ``vertices`` has one more entry than ``edges``.
    """

    edges: tuple[int, ...]
    signs: tuple[int, ...]
    vertices: tuple[int, ...]
    winding: tuple[int, int] = (0, 0)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def closed(self) -> bool:
        return len(self.edges) > 0 and self.vertices[0] == self.vertices[-1]


@dataclass(frozen=True)
class DualPath:
    """A walk from face to face crossing one primal edge per step.

    ``signs[k]`` is +1 when the step crosses ``edges[k]`` from its left face
    (``p1``) to its right face (``p2``).
    """

    edges: tuple[int, ...]
    signs: tuple[int, ...]
    faces: tuple[int, ...]
    winding: tuple[int, int] = (0, 0)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def closed(self) -> bool:
        return len(self.edges) > 0 and self.faces[0] == self.faces[-1]


@dataclass(frozen=True)
class TorusLattice:
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ValueError(f"degenerate lattice: {self.rows}x{self.cols} (need at least 2x2)")

    @property
    def n_vertices(self) -> int:
        return self.rows * self.cols

    @property
    def n_faces(self) -> int:
        return self.rows * self.cols

    @property
    def n_edges(self) -> int:
        return 2 * self.rows * self.cols

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self) -> int:
        return 1

    # -- indexing -----------------------------------------------------------------

    def vertex_index(self, x: int, y: int) -> int:
        return (y % self.rows) * self.cols + (x % self.cols)

    def vertex_coords(self, v: int) -> tuple[int, int]:
        self._check(v, self.n_vertices, "vertex")
        return v % self.cols, v // self.cols

    face_index = vertex_index

    def face_coords(self, p: int) -> tuple[int, int]:
        self._check(p, self.n_faces, "face")
        return p % self.cols, p // self.cols

    def h_edge(self, x: int, y: int) -> int:
        return 2 * self.vertex_index(x, y)

    def v_edge(self, x: int, y: int) -> int:
        return 2 * self.vertex_index(x, y) + 1

    def edge(self, j: int) -> EdgeRef:
        self._check(j, self.n_edges, "edge")
        cell, vertical = divmod(j, 2)
        return EdgeRef(j, VERTICAL if vertical else HORIZONTAL, cell % self.cols, cell // self.cols)

    def endpoints(self, j: int) -> tuple[int, int]:
        """``(tail, head)`` vertices of edge ``j``."""
        e = self.edge(j)
        tail = self.vertex_index(e.x, e.y)
        if e.axis == HORIZONTAL:
            return tail, self.vertex_index(e.x + 1, e.y)
        return tail, self.vertex_index(e.x, e.y + 1)

    @staticmethod
    def _check(i: int, n: int, kind: str) -> None:
        if not 0 <= i < n:
            raise IndexError(f"invalid {kind} id {i} (have {n})")

    # -- incidence ------------------------------------------------------------------

    def vertex_star(self, v: int) -> StarIncidence:
        x, y = self.vertex_coords(v)
        return StarIncidence(
            v,
            (self.v_edge(x, y), self.h_edge(x, y), self.v_edge(x, y - 1), self.h_edge(x - 1, y)),
        )

    def face_boundary(self, p: int) -> BoundaryIncidence:
        x, y = self.face_coords(p)
        return BoundaryIncidence(
            p,
            (self.h_edge(x, y + 1), self.v_edge(x + 1, y), self.h_edge(x, y), self.v_edge(x, y)),
        )

    def edge_faces(self, j: int, swap: bool = False) -> tuple[int, int]:
        """``(p1, p2)`` = (left, right) of the edge's direction; reversed if ``swap``."""
        e = self.edge(j)
        if e.axis == HORIZONTAL:
            left, right = self.face_index(e.x, e.y), self.face_index(e.x, e.y - 1)
        else:
            left, right = self.face_index(e.x - 1, e.y), self.face_index(e.x, e.y)
        return (right, left) if swap else (left, right)

    @cached_property
    def stars(self) -> tuple[StarIncidence, ...]:
        return tuple(self.vertex_star(v) for v in range(self.n_vertices))

    @cached_property
    def boundaries(self) -> tuple[BoundaryIncidence, ...]:
        return tuple(self.face_boundary(p) for p in range(self.n_faces))

    # -- paths ----------------------------------------------------------------------

    def step_edge(self, v: int, direction: Direction) -> tuple[int, int, int]:
        """Edge leaving ``v`` in ``direction``: ``(edge, sign, next_vertex)``."""
        x, y = self.vertex_coords(v)
        dx, dy = _STEPS[direction]
        nxt = self.vertex_index(x + dx, y + dy)
        if direction == "+x":
            return self.h_edge(x, y), 1, nxt
        if direction == "-x":
            return self.h_edge(x - 1, y), -1, nxt
        if direction == "+y":
            return self.v_edge(x, y), 1, nxt
        return self.v_edge(x, y - 1), -1, nxt

    def dual_step_edge(self, p: int, direction: Direction) -> tuple[int, int, int]:
        """Edge crossed leaving face ``p`` in ``direction``: ``(edge, sign, next_face)``."""
        x, y = self.face_coords(p)
        dx, dy = _STEPS[direction]
        nxt = self.face_index(x + dx, y + dy)
        bnd = self.face_boundary(p)
        crossed = {"+x": bnd.s, "-x": bnd.u, "+y": bnd.r, "-y": bnd.t}[direction]
        p1, _ = self.edge_faces(crossed)
        return crossed, (1 if p1 == p else -1), nxt

    def path(self, start: int, directions) -> Path:
        """Primal walk from vertex ``start`` following a sequence of directions."""
        edges, signs, verts = [], [], [start]
        wx = wy = 0
        v = start
        for d in directions:
            j, s, v = self.step_edge(v, d)
            edges.append(j)
            signs.append(s)
            verts.append(v)
            wx += _STEPS[d][0]
            wy += _STEPS[d][1]
        return Path(tuple(edges), tuple(signs), tuple(verts), (int(wx / self.cols), int(wy / self.rows)))

    def dual_path(self, start: int, directions) -> DualPath:
        edges, signs, faces = [], [], [start]
        wx = wy = 0
        p = start
        for d in directions:
            j, s, p = self.dual_step_edge(p, d)
            edges.append(j)
            signs.append(s)
            faces.append(p)
            wx += _STEPS[d][0]
            wy += _STEPS[d][1]
        return DualPath(tuple(edges), tuple(signs), tuple(faces), (int(wx / self.cols), int(wy / self.rows)))

    def is_valid_path(self, path: Path) -> bool:
        v = path.vertices[0]
        for j, s, nxt in zip(path.edges, path.signs, path.vertices[1:]):
            tail, head = self.endpoints(j)
            if (s == 1 and (tail, head) != (v, nxt)) or (s == -1 and (head, tail) != (v, nxt)):
                return False
            v = nxt
        return True

    def is_valid_dual_path(self, path: DualPath) -> bool:
        p = path.faces[0]
        for j, s, nxt in zip(path.edges, path.signs, path.faces[1:]):
            p1, p2 = self.edge_faces(j)
            if (s == 1 and (p1, p2) != (p, nxt)) or (s == -1 and (p2, p1) != (p, nxt)):
                return False
            p = nxt
        return True


def build_torus(rows: int, cols: int) -> TorusLattice:
    return TorusLattice(rows, cols)


def vertex_star(lattice: TorusLattice, v: int) -> StarIncidence:
    return lattice.vertex_star(v)


def face_boundary(lattice: TorusLattice, p: int) -> BoundaryIncidence:
    return lattice.face_boundary(p)


def edge_faces(lattice: TorusLattice, j: int, swap: bool = False) -> tuple[int, int]:
    return lattice.edge_faces(j, swap)


def straight_path(lattice: TorusLattice, start: int, direction: Direction, length: int) -> Path:
    if length < 1:
        raise ValueError("path length must be at least 1")
    return lattice.path(start, [direction] * length)


def straight_dual_path(
    lattice: TorusLattice, start: int, direction: Direction, length: int
) -> DualPath:
    if length < 1:
        raise ValueError("path length must be at least 1")
    return lattice.dual_path(start, [direction] * length)
