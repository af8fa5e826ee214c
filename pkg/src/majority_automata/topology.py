"""Graphs the automata run on: tori, grids, cycles and edge lists.

Lattice cell ``(i, j)`` of an ``n x n`` lattice is vertex ``i * n + j``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class NeighborhoodKind(str, Enum):
    NEUMANN = "neumann"
    MOORE = "moore"

    @classmethod
    def parse(cls, value: "str | NeighborhoodKind") -> "NeighborhoodKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown neighborhood kind {value!r}") from None


_OFFSETS = {
    NeighborhoodKind.NEUMANN: ((-1, 0), (0, -1), (0, 1), (1, 0)),
    NeighborhoodKind.MOORE: tuple(
        (di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)
    ),
}


class DisconnectedError(ValueError):
    """Raised when a distance is asked between unreachable vertices."""


@dataclass(frozen=True)
class LatticeMeta:
    n: int
    kind: NeighborhoodKind
    wrap: bool


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable undirected simple graph in CSR form.

    ``indices[indptr[v]:indptr[v + 1]]`` holds the sorted neighbors of ``v``.
    """

    vertex_count: int
    indptr: np.ndarray
    indices: np.ndarray
    lattice: LatticeMeta | None = None
    _padded: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    @classmethod
    def from_adjacency(
        cls, adjacency: Sequence[Iterable[int]], lattice: LatticeMeta | None = None
    ) -> "Topology":
        V = len(adjacency)
        if V < 1:
            raise ValueError("a topology needs at least one vertex")
        rows = [sorted(set(nb)) for nb in adjacency]
        for v, nb in enumerate(rows):
            if v in nb:
                raise ValueError(f"self-loop at vertex {v}")
            for u in nb:
                if not 0 <= u < V:
                    raise ValueError(f"neighbor {u} of vertex {v} out of range")
        for v, nb in enumerate(rows):
            for u in nb:
                # symmetric by construction for lattices; checked for edge lists
                if v not in rows[u]:
                    raise ValueError(f"asymmetric adjacency between {v} and {u}")
        indptr = np.zeros(V + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(nb) for nb in rows])
        indices = np.fromiter(
            (u for nb in rows for u in nb), dtype=np.int32, count=int(indptr[-1])
        )
        return cls(V, indptr, indices, lattice)

    @classmethod
    def from_edges(cls, vertex_count: int, edges: Iterable[tuple[int, int]]) -> "Topology":
        if vertex_count < 1:
            raise ValueError("a topology needs at least one vertex")
        adjacency: list[set[int]] = [set() for _ in range(vertex_count)]
        for u, v in edges:
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u}, {v}) out of range for {vertex_count} vertices")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            adjacency[u].add(v)
            adjacency[v].add(u)
        return cls.from_adjacency(adjacency)

    # queries

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1]) // 2

    @property
    def n(self) -> int:
        if self.lattice is None:
            raise ValueError("not a lattice topology")
        return self.lattice.n

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def closed_neighbors(self, v: int) -> set[int]:
        """``N(v)`` together with ``v`` itself."""
        return {v, *self.neighbors(v).tolist()}

    def edges(self) -> list[tuple[int, int]]:
        return [
            (v, int(u))
            for v in range(self.vertex_count)
            for u in self.neighbors(v)
            if v < u
        ]

    def index(self, i: int, j: int) -> int:
        n = self.n
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"cell ({i}, {j}) outside the {n}x{n} lattice")
        return i * n + j

    def cell(self, v: int) -> tuple[int, int]:
        return divmod(v, self.n)

    def padded_neighbors(self) -> np.ndarray:
        """``(V, max_degree)`` neighbor table padded with the sentinel ``V``."""
        if self._padded is None:
            deg = self.degrees
            width = int(deg.max()) if self.vertex_count else 0
            table = np.full((self.vertex_count, width), self.vertex_count, dtype=np.int64)
            for v in range(self.vertex_count):
                table[v, : deg[v]] = self.neighbors(v)
            table.setflags(write=False)
            object.__setattr__(self, "_padded", table)
        return self._padded

    def bfs_lengths(self, source: int) -> np.ndarray:
        """Edge counts of shortest paths from ``source``; ``-1`` if unreachable."""
        dist = np.full(self.vertex_count, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for u in self.neighbors(v):
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    queue.append(int(u))
        return dist

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return (
            self.vertex_count == other.vertex_count
            and self.lattice == other.lattice
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self) -> int:
        return hash((self.vertex_count, self.lattice, self.indices.tobytes()))

    def describe(self) -> str:
        if self.lattice is None:
            return f"graph(V={self.vertex_count}, E={self.edge_count})"
        meta = self.lattice
        shape = "torus" if meta.wrap else "grid"
        return f"{shape}(n={meta.n}, {meta.kind.value})"


def build_lattice(n: int, kind: NeighborhoodKind | str, wrap: bool) -> Topology:
    """Grid (``wrap=False``) or torus (``wrap=True``) on ``n x n`` cells."""
    kind = NeighborhoodKind.parse(kind)
    if n < 1:
        raise ValueError("lattice side must be positive")
    if wrap and n < 3:
        raise ValueError("a torus needs n >= 3")
    adjacency = []
    for i in range(n):
        for j in range(n):
            nb = []
            for di, dj in _OFFSETS[kind]:
                a, b = i + di, j + dj
                if wrap:
                    a, b = a % n, b % n
                elif not (0 <= a < n and 0 <= b < n):
                    continue
                nb.append(a * n + b)
            adjacency.append(nb)
    return Topology.from_adjacency(adjacency, LatticeMeta(n, kind, wrap))


def lattice_size(n: int, kind: NeighborhoodKind | str, wrap: bool) -> tuple[int, int]:
    """``(|V|, |E|)`` of the lattice ``build_lattice`` would return, without building it."""
    kind = NeighborhoodKind.parse(kind)
    if n < 1 or (wrap and n < 3):
        raise ValueError("lattice side too small")
    if wrap:
        per_cell = 2 if kind is NeighborhoodKind.NEUMANN else 4
        return n * n, per_cell * n * n
    edges = 2 * n * (n - 1)
    if kind is NeighborhoodKind.MOORE:
        edges += 2 * (n - 1) ** 2
    return n * n, edges


def build_cycle(n: int) -> Topology:
    if n < 3:
        raise ValueError("a cycle needs n >= 3")
    return Topology.from_adjacency([((v - 1) % n, (v + 1) % n) for v in range(n)])


def vertex_distance(t: Topology, u: int, v: int) -> int:
    """Shortest-path edge count minus one; ``0`` for ``u == v``.

    Adjacent vertices are therefore at distance 0.
    """
    for w in (u, v):
        if not 0 <= w < t.vertex_count:
            raise ValueError(f"vertex {w} out of range")
    if u == v:
        return 0
    if t.lattice is not None:
        meta = t.lattice
        (ui, uj), (vi, vj) = divmod(u, meta.n), divmod(v, meta.n)
        di, dj = _axis_gap(ui, vi, meta.n, meta.wrap), _axis_gap(uj, vj, meta.n, meta.wrap)
        hops = di + dj if meta.kind is NeighborhoodKind.NEUMANN else max(di, dj)
        return hops - 1
    hops = int(t.bfs_lengths(u)[v])
    if hops < 0:
        raise DisconnectedError(f"vertices {u} and {v} are not connected")
    return hops - 1


def _axis_gap(a: int, b: int, n: int, wrap: bool) -> int:
    d = abs(a - b)
    return min(d, n - d) if wrap else d


def read_edge_list(path: str | Path) -> Topology:
    """Read ``V E`` followed by ``E`` lines ``u v`` (0-based)."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise FormatError(path, 1, 1, "empty edge-list file")
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise FormatError(path, 1, 1, "expected header 'V E'")
    V, E = int(header[0]), int(header[1])
    edges = []
    for lineno in range(2, 2 + E):
        if lineno - 1 >= len(lines):
            raise FormatError(path, lineno, 1, f"expected {E} edges, file ended early")
        parts = lines[lineno - 1].split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise FormatError(path, lineno, 1, "expected 'u v'")
        edges.append((int(parts[0]), int(parts[1])))
    if any(line.strip() for line in lines[1 + E :]):
        raise FormatError(path, 2 + E, 1, "trailing content after the edge list")
    try:
        return Topology.from_edges(V, edges)
    except ValueError as exc:
        raise FormatError(path, 1, 1, str(exc)) from None


def write_edge_list(t: Topology, path: str | Path) -> None:
    edges = t.edges()
    body = [f"{t.vertex_count} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
    Path(path).write_text("\n".join(body) + "\n")


class FormatError(ValueError):
    """Malformed input file, with a 1-based line/column position."""

    def __init__(self, path: str | Path, line: int, column: int, message: str) -> None:
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.line = line
        self.column = column
