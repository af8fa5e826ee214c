"""Clusters, covering rectangles, robust/eternal sets and closed-form bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import _backend
from .dynamics import (
    Color,
    CycleNotFound,
    Generation,
    RuleKind,
    UpdateRule,
    auto_budget,
)
from .topology import NeighborhoodKind, Topology, build_lattice


class InstanceTooLarge(ValueError):
    """Exhaustive verification refused: too many colorings to enumerate."""


class ThresholdsNotEstablished(ValueError):
    pass


# clusters


@dataclass(frozen=True)
class ClusterReport:
    clusters: list[frozenset[int]]
    largest_size: int


@lru_cache(maxsize=32)
def _moore_overlay(n: int, wrap: bool) -> Topology:
    return build_lattice(n, NeighborhoodKind.MOORE, wrap)


def components(t: Topology, vertices: Iterable[int]) -> list[frozenset[int]]:
    """Connected components of the subgraph of ``t`` induced by ``vertices``.

    Ordered by smallest member.
    """
    verts = np.array(sorted(set(vertices)), dtype=np.int64)
    if verts.size == 0:
        return []
    local = np.full(t.vertex_count, -1, dtype=np.int64)
    local[verts] = np.arange(verts.size)
    rows, cols = [], []
    for i, v in enumerate(verts):
        nb = local[t.neighbors(v)]
        nb = nb[nb >= 0]
        rows.extend([i] * nb.size)
        cols.extend(nb.tolist())
    graph = csr_matrix(
        (np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(verts.size, verts.size)
    )
    count, labels = connected_components(graph, directed=False)
    groups: list[list[int]] = [[] for _ in range(count)]
    for v, lab in zip(verts.tolist(), labels):
        groups[lab].append(v)
    return sorted((frozenset(grp) for grp in groups), key=min)


def moore_clusters(t: Topology, g: Generation, c: Color | str) -> ClusterReport:
    """Same-colored cells grouped under Moore adjacency, whatever ``t``'s own kind."""
    if t.lattice is None:
        raise ValueError("clusters are defined on lattice topologies only")
    if len(g) != t.vertex_count:
        raise ValueError("generation does not match the topology")
    c = Color.parse(c)
    overlay = _moore_overlay(t.lattice.n, t.lattice.wrap)
    cells = np.flatnonzero(g.blue == c.bit)
    clusters = components(overlay, cells)
    return ClusterReport(clusters, max((len(k) for k in clusters), default=0))


# rectangles


@dataclass(frozen=True, order=True)
class Rectangle:
    """Cells ``((anchor_i + a) mod n, (anchor_j + b) mod n)``, ``a < l1``, ``b < l2``."""

    anchor_i: int
    anchor_j: int
    l1: int
    l2: int

    def cells(self, n: int) -> set[int]:
        return {
            ((self.anchor_i + a) % n) * n + (self.anchor_j + b) % n
            for a in range(self.l1)
            for b in range(self.l2)
        }

    @property
    def area(self) -> int:
        return self.l1 * self.l2

    def __str__(self) -> str:
        return f"{self.l1}x{self.l2}@({self.anchor_i},{self.anchor_j})"


def _lattice(t: Topology):
    if t.lattice is None:
        raise ValueError("rectangles live on lattice topologies only")
    return t.lattice


def _validate(t: Topology, r: Rectangle) -> None:
    meta = _lattice(t)
    n = meta.n
    ok = 0 <= r.anchor_i < n and 0 <= r.anchor_j < n and 1 <= r.l1 <= n and 1 <= r.l2 <= n
    if ok and not meta.wrap:
        ok = r.anchor_i + r.l1 <= n and r.anchor_j + r.l2 <= n
    if not ok:
        raise ValueError(f"rectangle {r} is not valid on {t.describe()}")


def _axis_cover(points: np.ndarray, n: int, wrap: bool) -> tuple[int, int]:
    """Shortest (anchor, extent) interval covering ``points``; smallest anchor on ties."""
    if not wrap:
        lo, hi = int(points.min()), int(points.max())
        return lo, hi - lo + 1
    anchors = np.arange(n)[:, None]
    extent = ((points[None, :] - anchors) % n).max(axis=1) + 1
    best = int(np.argmin(extent))  # argmin returns the first, i.e. smallest anchor
    return best, int(extent[best])


def _axis_members(anchor: int, extent: int, n: int) -> np.ndarray:
    return (anchor + np.arange(extent)) % n


def smallest_covering_rectangle(t: Topology, s: Iterable[int]) -> Rectangle:
    """Minimum-area rectangle containing every cell of ``s``.

    Rows and columns are independent, so the minimum area is the product of
    the two shortest covering intervals.  Ties go to the smallest anchor.
    """
    meta = _lattice(t)
    cells = np.array(sorted(set(s)), dtype=np.int64)
    if cells.size == 0:
        raise ValueError("cannot cover an empty set")
    if cells.min() < 0 or cells.max() >= t.vertex_count:
        raise ValueError("cell index out of range")
    rows, cols = np.divmod(cells, meta.n)
    ai, l1 = _axis_cover(np.unique(rows), meta.n, meta.wrap)
    aj, l2 = _axis_cover(np.unique(cols), meta.n, meta.wrap)
    return Rectangle(ai, aj, l1, l2)


def combine(t: Topology, r1: Rectangle, r2: Rectangle) -> Rectangle:
    """Smallest rectangle covering both, with the same tie rule."""
    meta = _lattice(t)
    n = meta.n
    rows = np.union1d(_axis_members(r1.anchor_i, r1.l1, n), _axis_members(r2.anchor_i, r2.l1, n))
    cols = np.union1d(_axis_members(r1.anchor_j, r1.l2, n), _axis_members(r2.anchor_j, r2.l2, n))
    ai, l1 = _axis_cover(rows, n, meta.wrap)
    aj, l2 = _axis_cover(cols, n, meta.wrap)
    return Rectangle(ai, aj, l1, l2)


def _axis_gap(a: int, la: int, b: int, lb: int, n: int, wrap: bool) -> int:
    if not wrap:
        return max(0, b - (a + la - 1), a - (b + lb - 1))
    if (b - a) % n < la or (a - b) % n < lb:
        return 0
    return min((b - (a + la - 1)) % n, (a - (b + lb - 1)) % n)


def rectangle_distance(t: Topology, r1: Rectangle, r2: Rectangle) -> int:
    """Least shifted vertex distance between a cell of ``r1`` and one of ``r2``."""
    _validate(t, r1)
    _validate(t, r2)
    meta = t.lattice
    di = _axis_gap(r1.anchor_i, r1.l1, r2.anchor_i, r2.l1, meta.n, meta.wrap)
    dj = _axis_gap(r1.anchor_j, r1.l2, r2.anchor_j, r2.l2, meta.n, meta.wrap)
    hops = di + dj if meta.kind is NeighborhoodKind.NEUMANN else max(di, dj)
    return max(hops - 1, 0)


def rectangulate(t: Topology, m: Iterable[Rectangle]) -> set[Rectangle]:
    """Merge rectangles until every pair is at distance at least 2.

    Each round merges the lexicographically smallest close pair, which makes
    the result independent of input order.
    """
    meta = _lattice(t)
    rects = set(m)
    for r in rects:
        _validate(t, r)
    whole = Rectangle(0, 0, meta.n, meta.n)
    while len(rects) > 1:
        ordered = sorted(rects)
        pair = next(
            (
                (a, b)
                for i, a in enumerate(ordered)
                for b in ordered[i + 1 :]
                if rectangle_distance(t, a, b) <= 1
            ),
            None,
        )
        if pair is None:
            break
        merged = combine(t, *pair)
        rects -= set(pair)
        if merged.l1 == meta.n and merged.l2 == meta.n:
            return {whole}
        rects.add(merged)
    return rects


def covering_rectangles(
    t: Topology, g: Generation, c: Color | str = Color.BLUE, moore: bool = False
) -> set[Rectangle]:
    """Smallest covering rectangles of the ``c``-colored connected components.

    Components use ``t``'s adjacency, or Moore adjacency when ``moore`` is set.
    """
    meta = _lattice(t)
    c = Color.parse(c)
    graph = _moore_overlay(meta.n, meta.wrap) if moore else t
    cells = np.flatnonzero(g.blue == c.bit)
    return {smallest_covering_rectangle(t, comp) for comp in components(graph, cells)}


# robust and eternal sets


def _majority_family(rule: UpdateRule | RuleKind | str) -> RuleKind:
    kind = rule.kind if isinstance(rule, UpdateRule) else RuleKind(str(getattr(rule, "value", rule)))
    if kind not in (RuleKind.MAJORITY, RuleKind.BIASED):
        raise ValueError(f"only the majority and biased rules are supported here, not {kind.value}")
    return kind


def _vertex_set(t: Topology, s: Iterable[int]) -> np.ndarray:
    verts = np.array(sorted(set(int(v) for v in s)), dtype=np.int64)
    if verts.size == 0:
        raise ValueError("the vertex set must be nonempty")
    if verts.min() < 0 or verts.max() >= t.vertex_count:
        raise ValueError("vertex index out of range")
    return verts


def is_robust_set(t: Topology, rule: UpdateRule | RuleKind | str, s: Iterable[int], c: Color | str) -> bool:
    """Whether ``s``, once all ``c``, stays all ``c`` forever.

    It suffices that every member keeps ``c`` when everything outside ``s``
    holds the other color: with ``k`` neighbors inside ``s`` out of ``d``,
    that is ``2k >= d``, or ``2k > d`` for red under the biased rule.
    """
    kind = _majority_family(rule)
    c = Color.parse(c)
    verts = _vertex_set(t, s)
    inside = np.zeros(t.vertex_count, dtype=bool)
    inside[verts] = True
    for v in verts:
        k = int(inside[t.neighbors(v)].sum())
        d = int(t.indptr[v + 1] - t.indptr[v])
        strict = kind is RuleKind.BIASED and c is Color.RED
        if (2 * k <= d) if strict else (2 * k < d):
            return False
    return True


DEFAULT_ETERNAL_BUDGET = 24
_CHUNK = 1 << 13


def is_eternal_set(
    t: Topology,
    rule: UpdateRule | RuleKind | str,
    s: Iterable[int],
    c: Color | str,
    budget: int = DEFAULT_ETERNAL_BUDGET,
) -> bool:
    """Exhaustively decide whether ``c`` survives once ``s`` is all ``c``.

    Every coloring of the remaining vertices is run to its cycle; ``c`` must
    be present in every generation along the way.  ``budget`` caps the
    number of free vertices, so at most ``2**budget`` runs are made.
    """
    kind = _majority_family(rule)
    c = Color.parse(c)
    verts = _vertex_set(t, s)
    free = np.setdiff1d(np.arange(t.vertex_count), verts)
    if free.size > budget:
        raise InstanceTooLarge(
            f"{free.size} vertices outside the set exceed the cap of {budget} "
            f"({2 ** free.size} colorings)"
        )
    code = _backend.RULE_CODES[kind.value]
    max_steps = auto_budget(t)
    total = 1 << free.size
    shifts = np.arange(free.size, dtype=np.uint64)
    V = t.vertex_count
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
        states = np.empty((codes.size, V), dtype=np.uint8)
        states[:, verts] = c.bit
        states[:, free] = ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
        _, period, min_blue, max_blue, _ = _backend.run_batch(t, states, code, max_steps)
        if (period == 0).any():
            raise CycleNotFound(f"{kind.value} rule did not cycle within {max_steps} steps")
        lost = (min_blue == 0) if c is Color.BLUE else (max_blue == V)
        if lost.any():
            return False
    return True


# closed-form bounds


@dataclass(frozen=True)
class BoundReport:
    bound_value: float
    inputs: dict = field(default_factory=dict)
    note: str = ""

    def as_dict(self) -> dict:
        out = {"bound_value": self.bound_value, **self.inputs}
        if self.note:
            out["note"] = self.note
        return out


def survival_bound(
    kind: str, k: int, s: int, p_b: float, a: Sequence[int] | None = None
) -> BoundReport:
    """Upper bound on the probability of ending red-monochromatic.

    ``disjoint``: ``k`` disjoint blue-eternal sets of size at most ``s``.
    ``azuma``: possibly overlapping sets, ``a[i]`` of them containing vertex ``i``.
    """
    if k < 1 or s < 1:
        raise ValueError("k and s must be at least 1")
    if not 0.0 <= p_b <= 1.0:
        raise ValueError(f"p_b={p_b} outside [0, 1]")
    inputs = {"kind": kind, "k": k, "s": s, "p_b": p_b}
    if kind == "disjoint":
        return BoundReport(math.exp(-k * p_b**s), inputs)
    if kind == "azuma":
        if a is None or len(a) == 0:
            raise ValueError("the azuma bound needs the per-vertex multiplicities a")
        sq = sum(int(x) ** 2 for x in a)
        if sq == 0:
            raise ValueError("multiplicities a must not all be zero")
        inputs["a"] = list(a)
        return BoundReport(math.exp(-(k**2) * p_b ** (2 * s) / (2 * sq)), inputs)
    raise ValueError(f"unknown bound kind {kind!r}")


def consensus_time_bound(t: Topology, rule: UpdateRule | RuleKind | str) -> BoundReport:
    """``|E|`` for the majority rule, ``|E| + |V|`` for the biased rule."""
    return consensus_time_bound_for(t.edge_count, t.vertex_count, rule)


def consensus_time_bound_for(E: int, V: int, rule: UpdateRule | RuleKind | str) -> BoundReport:
    """Same bound from the edge and vertex counts alone."""
    kind = _majority_family(rule)
    value = E if kind is RuleKind.MAJORITY else E + V
    return BoundReport(value, {"rule": kind.value, "edges": E, "vertices": V})


LOG_NOTE = "1/sqrt(log n) uses the natural logarithm"


def threshold_values(
    rule: UpdateRule | RuleKind | str, kind: NeighborhoodKind | str, n: int
) -> tuple[float, float]:
    """The two critical densities ``(p1, p2)`` on the ``n x n`` torus.

    For the biased rule ``p2 = 1/sqrt(ln n)``; the logarithm base is a
    convention (see ``LOG_NOTE``).
    """
    rk = _majority_family(rule)
    kind = NeighborhoodKind.parse(kind)
    if n < 3:
        raise ValueError("n must be at least 3")
    if rk is RuleKind.MAJORITY:
        p1 = n ** -0.5 if kind is NeighborhoodKind.NEUMANN else n ** (-1.0 / 6.0)
        return p1, 1.0 - p1
    if kind is NeighborhoodKind.MOORE:
        raise ThresholdsNotEstablished("biased-rule thresholds for the Moore neighborhood are not established")
    return 1.0 / n, 1.0 / math.sqrt(math.log(n))
