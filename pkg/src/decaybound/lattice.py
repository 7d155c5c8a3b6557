"""Finite graphs, graph distances and the perimeter constant.

Vertices are the integers ``0..n-1``. Lattice generators number them
row-major (``y * Lx + x``, times the number of sublattice sites per cell),
so Hilbert-space orderings built on top of a graph are reproducible.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InputError

UNREACHABLE = -1

LATTICE_KINDS = ("square", "triangular", "hexagonal", "kagome", "chain", "ring", "edge_list")


@dataclass(frozen=True)
class Shell:
    center: int
    radius: int
    members: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph.

    ``edges`` holds sorted pairs ``(u, v)`` with ``u < v``. All-pairs
    distances are computed once on construction by breadth-first search;
    unreachable pairs are stored as ``UNREACHABLE``.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    name: str = ""
    _dist: np.ndarray = field(init=False, repr=False)
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n_vertices)
        if n < 0:
            raise InputError("negative vertex count")
        seen = set()
        clean = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InputError(f"self-edge at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) has a vertex outside 0..{n - 1}")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise InputError(f"duplicate edge {e}")
            seen.add(e)
            clean.append(e)
        clean.sort()
        adj = [[] for _ in range(n)]
        for u, v in clean:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "edges", tuple(clean))
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))
        object.__setattr__(self, "_dist", _bfs_all_pairs(self._adj))
        self._dist.setflags(write=False)

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[Sequence[int]], name: str = "") -> "Graph":
        return cls(n_vertices, tuple(tuple(e) for e in edges), name)

    @property
    def vertices(self) -> range:
        return range(self.n_vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def distances(self) -> np.ndarray:
        """Read-only ``(n, n)`` integer matrix; ``-1`` marks unreachable pairs."""
        return self._dist

    def neighbors(self, x: int) -> tuple[int, ...]:
        self._check(x)
        return self._adj[x]

    def degree(self, x: int) -> int:
        return len(self.neighbors(x))

    def distance(self, x: int, y: int) -> int | None:
        """Graph distance, or ``None`` when ``y`` cannot be reached from ``x``."""
        self._check(x)
        self._check(y)
        d = int(self._dist[x, y])
        return None if d == UNREACHABLE else d

    def is_connected(self) -> bool:
        return self.n_vertices == 0 or bool(np.all(self._dist >= 0))

    def diameter(self) -> int:
        return int(self._dist.max()) if self.n_vertices else 0

    def shells(self, x: int) -> list[Shell]:
        """Nonempty spheres ``{y : d(x, y) = l}`` for ``l = 1, 2, ...``."""
        self._check(x)
        row = self._dist[x]
        out = []
        for radius in range(1, int(row.max()) + 1):
            members = tuple(int(y) for y in np.flatnonzero(row == radius))
            if members:
                out.append(Shell(x, radius, members))
        return out

    def _check(self, x):
        if not isinstance(x, (int, np.integer)) or not 0 <= x < self.n_vertices:
            raise InputError(f"unknown vertex {x!r}")

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n_vertices == other.n_vertices and self.edges == other.edges

    def __hash__(self):
        return hash((self.n_vertices, self.edges))

    def __repr__(self):
        label = f"{self.name!r}, " if self.name else ""
        return f"Graph({label}n={self.n_vertices}, edges={self.n_edges})"


def _bfs_all_pairs(adj) -> np.ndarray:
    n = len(adj)
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for src in range(n):
        row = dist[src]
        row[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            du = row[u] + 1
            for v in adj[u]:
                if row[v] == UNREACHABLE:
                    row[v] = du
                    queue.append(v)
    return dist


def graph_distance(g: Graph, x: int, y: int) -> int | None:
    return g.distance(x, y)


def perimeter_constant(g: Graph, return_argmax: bool = False):
    """Exact perimeter constant ``max_{x, l >= 1} |{y : d(x,y) = l}| / l``.

    Returns a ``Fraction``. With ``return_argmax=True`` also returns the
    first maximising ``(x, l)`` in vertex/radius order (``None`` for a graph
    without any pair at positive distance).
    """
    if g.n_vertices == 0:
        raise InputError("perimeter constant of an empty graph")
    best = Fraction(0)
    arg = None
    for x in g.vertices:
        row = g.distances[x]
        counts = np.bincount(row[row > 0])
        for radius in range(1, len(counts)):
            ratio = Fraction(int(counts[radius]), radius)
            if ratio > best:
                best, arg = ratio, (x, radius)
    return (best, arg) if return_argmax else best


def subset_diameter(g: Graph, subset: Iterable[int]) -> int:
    """Largest pairwise distance within ``subset``, measured in all of ``g``."""
    members = sorted(set(subset))
    if not members:
        raise InputError("diameter of an empty vertex set")
    for x in members:
        g._check(x)
    if len(members) == 1:
        return 0
    block = g.distances[np.ix_(members, members)]
    if np.any(block == UNREACHABLE):
        raise InputError(f"vertex set {members} is not connected in the graph")
    return int(block.max())


def make_lattice(kind: str, dims, boundary: str = "open", edges=None) -> Graph:
    """Standard finite lattices.

    ``dims`` is ``(Lx, Ly)`` for the two-dimensional kinds (counted in unit
    cells for ``hexagonal`` and ``kagome``), ``L`` or ``(L,)`` for ``chain``
    and ``ring``, and the vertex count for ``edge_list`` (with ``edges``).
    ``boundary="periodic"`` wraps the 2D lattices; wrapped edges that would
    duplicate or self-loop on tiny tori are dropped.
    """
    if boundary not in ("open", "periodic"):
        raise InputError(f"unknown boundary {boundary!r}")
    dims = (dims,) if isinstance(dims, (int, np.integer)) else tuple(int(d) for d in dims)
    if not dims or any(d <= 0 for d in dims):
        raise InputError(f"dimensions must be positive, got {dims}")
    periodic = boundary == "periodic"

    if kind == "edge_list":
        if edges is None:
            raise InputError("edge_list lattice needs an explicit edge list")
        return Graph.from_edges(dims[0], edges, name="edge_list")
    if kind in ("chain", "ring"):
        (n,) = dims[:1]
        pairs = [(i, i + 1) for i in range(n - 1)]
        if kind == "ring" or periodic:
            if n < 3:
                raise InputError("a ring needs at least 3 sites")
            pairs.append((0, n - 1))
        return Graph.from_edges(n, pairs, name=f"{kind}{n}")
    if len(dims) != 2:
        raise InputError(f"{kind} lattice needs dims (Lx, Ly), got {dims}")

    lx, ly = dims
    if kind == "square":
        cell, bonds = 1, [((1, 0), 0, 0), ((0, 1), 0, 0)]
    elif kind == "triangular":
        cell, bonds = 1, [((1, 0), 0, 0), ((0, 1), 0, 0), ((1, 1), 0, 0)]
    elif kind == "hexagonal":
        # two sites per cell (A=0, B=1); bonds A-B in-cell, A-B(x-1), A-B(y-1)
        cell, bonds = 2, [((0, 0), 0, 1), ((-1, 0), 0, 1), ((0, -1), 0, 1)]
    elif kind == "kagome":
        # sites 0, 1=0+a1/2, 2=0+a2/2
        cell, bonds = 3, [
            ((0, 0), 0, 1), ((0, 0), 0, 2), ((0, 0), 1, 2),
            ((1, 0), 1, 0), ((0, 1), 2, 0), ((1, -1), 1, 2),
        ]
    else:
        raise InputError(f"unsupported lattice kind {kind!r}")

    def vid(x, y, sub):
        return (y * lx + x) * cell + sub

    seen = set()
    pairs = []
    for y in range(ly):
        for x in range(lx):
            for (dx, dy), a, b in bonds:
                x2, y2 = x + dx, y + dy
                if periodic:
                    x2, y2 = x2 % lx, y2 % ly
                elif not (0 <= x2 < lx and 0 <= y2 < ly):
                    continue
                u, v = vid(x, y, a), vid(x2, y2, b)
                if u == v:
                    continue
                e = (min(u, v), max(u, v))
                if e not in seen:
                    seen.add(e)
                    pairs.append(e)
    return Graph.from_edges(lx * ly * cell, pairs, name=f"{kind}{lx}x{ly}{'p' if periodic else ''}")


def read_edge_list(path) -> Graph:
    """Parse the plain-text interchange format.

    The first non-blank, non-comment line is ``n <vertex_count>``; every
    further line is a ``u v`` pair. Errors carry the offending line number.
    """
    text = Path(path).read_text()
    return parse_edge_list(text, source=str(path))


def parse_edge_list(text: str, source: str = "<string>") -> Graph:
    n = None
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise InputError(f"{source}:{lineno}: expected header 'n <vertex_count>'")
            try:
                n = int(parts[1])
            except ValueError:
                raise InputError(f"{source}:{lineno}: bad vertex count {parts[1]!r}") from None
            continue
        if len(parts) != 2:
            raise InputError(f"{source}:{lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"{source}:{lineno}: non-integer vertex in {line!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise InputError(f"{source}:{lineno}: vertex out of range 0..{n - 1}")
        pairs.append((u, v))
    if n is None:
        raise InputError(f"{source}: missing header 'n <vertex_count>'")
    try:
        return Graph.from_edges(n, pairs, name=Path(source).stem)
    except InputError as exc:
        raise InputError(f"{source}: {exc}") from None


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n_vertices}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"
