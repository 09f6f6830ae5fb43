"""r-line-graphs: sets of r-tuples over disjoint coordinate parts.

Two tuples are adjacent when they differ in exactly one coordinate.  An
r-partite r-graph and its line graph carry the same information; the
correspondence is :func:`from_partite` / :func:`to_hypergraph`.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator

from .hypergraph import Hypergraph, Partition

Coordinate = str
Vertex = tuple  # tuple[Coordinate, ...] with entry i drawn from part i


def make_label(part: int, index: int) -> Coordinate:
    """Coordinate label for hypergraph vertex ``index`` placed in ``part`` (1-based)."""
    return f"{part}:{index}"


def label_vertex(label: Coordinate) -> int:
    return int(label.split(":", 1)[1])


def label_key(label: Coordinate):
    head, _, tail = label.partition(":")
    try:
        return (0, int(head), 0, int(tail), "")
    except ValueError:
        return (1, 0, 1, 0, label)


def vertex_key(x: Vertex):
    return tuple(label_key(c) for c in x)


@dataclass(frozen=True)
class Block:
    direction: int  # 0-based
    members: frozenset

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True, eq=False)
class LineGraph:
    r: int
    parts: tuple  # tuple[frozenset[Coordinate], ...]
    vertices: frozenset

    def __post_init__(self):
        if len(self.parts) != self.r:
            raise ValueError(f"expected {self.r} parts, got {len(self.parts)}")
        seen: set = set()
        for p in self.parts:
            if seen & p:
                raise ValueError(f"parts overlap on {sorted(seen & p)[:5]}")
            seen |= p
        for x in self.vertices:
            if len(x) != self.r:
                raise ValueError(f"tuple {x} does not have {self.r} coordinates")
            for i, c in enumerate(x):
                if c not in self.parts[i]:
                    raise ValueError(f"coordinate {c!r} of {x} is not in part {i + 1}")

    def __eq__(self, other):
        if not isinstance(other, LineGraph):
            return NotImplemented
        return (self.r, self.parts, self.vertices) == (other.r, other.parts, other.vertices)

    def __hash__(self):
        return hash((self.r, self.vertices))

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, x):
        return x in self.vertices

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.order)

    @cached_property
    def order(self) -> tuple:
        """Vertices in canonical order."""
        return tuple(sorted(self.vertices, key=vertex_key))

    @cached_property
    def index(self) -> dict:
        return {x: i for i, x in enumerate(self.order)}

    @cached_property
    def classes(self) -> tuple:
        """Per direction, a map from the tuple with that entry removed to its block."""
        out = []
        for i in range(self.r):
            d = defaultdict(list)
            for x in self.order:
                d[x[:i] + x[i + 1:]].append(x)
            out.append({k: tuple(v) for k, v in d.items()})
        return tuple(out)

    @cached_property
    def memo(self) -> dict:
        # per-instance scratch space for derived search structures
        return {}

    def block_members(self, x: Vertex, i: int) -> tuple:
        return self.classes[i].get(x[:i] + x[i + 1:], ())

    def block(self, x: Vertex, i: int) -> Block:
        return Block(i, frozenset(self.block_members(x, i)))

    def blocks(self) -> Iterator[Block]:
        for i, cls in enumerate(self.classes):
            for members in cls.values():
                yield Block(i, frozenset(members))

    def neighbours_in_direction(self, x: Vertex, i: int) -> set:
        """N^(i)(x): tuples differing from ``x`` in coordinate ``i`` only."""
        return {y for y in self.block_members(x, i) if y != x}

    def neighbours(self, x: Vertex) -> set:
        out = set()
        for i in range(self.r):
            out.update(self.block_members(x, i))
        out.discard(x)
        return out

    def degree(self, x: Vertex, i: int) -> int:
        """The i-degree |N^(i)(x)| + 1, i.e. the size of x's i-block."""
        return len(self.block_members(x, i))

    def total_degree(self, x: Vertex) -> int:
        return sum(self.degree(x, i) - 1 for i in range(self.r))

    def coordinates(self) -> set:
        return {c for x in self.vertices for c in x}

    def induced(self, vertices: Iterable[Vertex]) -> "LineGraph":
        vs = frozenset(vertices)
        if not vs <= self.vertices:
            raise ValueError("induced subgraph on tuples outside the graph")
        return LineGraph(self.r, self.parts, vs)


def from_partite(H: Hypergraph, P: Partition) -> LineGraph:
    """One tuple per edge, entry i being the edge's vertex in part i+1."""
    if P.r != H.r or len(P.assignment) != H.vertex_count:
        raise ValueError("partition does not match the hypergraph")
    r = H.r
    parts = tuple(
        frozenset(make_label(p, v) for v in range(H.vertex_count) if P.part(v) == p)
        for p in range(1, r + 1)
    )
    tuples = set()
    for e in H.sorted_edges():
        slots = [None] * r
        for v in e:
            p = P.part(v)
            if slots[p - 1] is not None:
                raise ValueError(f"edge {list(e)} is not transversal for the partition")
            slots[p - 1] = make_label(p, v)
        tuples.add(tuple(slots))
    return LineGraph(r, parts, frozenset(tuples))


def coordinate_order(G: LineGraph) -> list:
    """All part labels in the dense re-indexing used by :func:`to_hypergraph`."""
    return [c for part in G.parts for c in sorted(part, key=label_key)]


def to_hypergraph(G: LineGraph) -> Hypergraph:
    index = {c: k for k, c in enumerate(coordinate_order(G))}
    edges = [[index[c] for c in x] for x in G.vertices]
    return Hypergraph.from_edges(G.r, len(index), edges)


def block_count(G: LineGraph) -> int:
    """p(G): blocks are counted per direction, so equal member sets in two
    directions are two blocks."""
    return sum(len(cls) for cls in G.classes)


def density(G: LineGraph) -> Fraction:
    if not len(G):
        raise ValueError("density of an empty line graph is undefined")
    return Fraction(G.r * len(G), block_count(G))


def min_degree(G: LineGraph) -> int:
    if not len(G):
        raise ValueError("minimum degree of an empty line graph is undefined")
    return min(len(members) for cls in G.classes for members in cls.values())


def complete_product(sizes: Iterable[int]) -> LineGraph:
    """The full product of parts with the given sizes (labels ``p:k``)."""
    sizes = list(sizes)
    parts = tuple(frozenset(make_label(p + 1, k) for k in range(m)) for p, m in enumerate(sizes))
    labels = [[make_label(p + 1, k) for k in range(m)] for p, m in enumerate(sizes)]
    return LineGraph(len(sizes), parts, frozenset(itertools.product(*labels)))
