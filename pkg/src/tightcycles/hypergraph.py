"""r-uniform hypergraphs, cycle detectors and the classical cycle-free constructions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Optional

import networkx as nx

from ._rng import PARTITION, make_rng


class HypergraphFormatError(ValueError):
    """A hypergraph or partition file failed to parse."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class BudgetExceeded(RuntimeError):
    """A search ran out of its node budget before reaching a verdict."""

    def __init__(self, nodes: int):
        super().__init__(f"node budget exhausted after {nodes} nodes")
        self.nodes = nodes


@dataclass(frozen=True)
class Hypergraph:
    r: int
    vertex_count: int
    edges: frozenset

    def __post_init__(self):
        if self.r < 2:
            raise ValueError(f"uniformity must be at least 2, got {self.r}")
        if self.vertex_count < 0:
            raise ValueError("vertex count must be non-negative")
        for e in self.edges:
            if len(e) != self.r:
                raise ValueError(f"edge {sorted(e)} does not have {self.r} distinct vertices")
            for v in e:
                if not 0 <= v < self.vertex_count:
                    raise ValueError(f"vertex {v} out of range 0..{self.vertex_count - 1}")

    @classmethod
    def from_edges(cls, r: int, vertex_count: int, edges: Iterable[Iterable[int]]) -> "Hypergraph":
        fs = []
        for e in edges:
            e = tuple(e)
            if len(set(e)) != len(e):
                raise ValueError(f"repeated vertex in edge {e}")
            fs.append(frozenset(e))
        if len(set(fs)) != len(fs):
            raise ValueError("duplicate edge")
        return cls(r, vertex_count, frozenset(fs))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, ...]]:
        return sorted(tuple(sorted(e)) for e in self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for e in self.edges:
            for v in e:
                deg[v] += 1
        return deg

    def dumps(self) -> str:
        lines = [f"{self.r} {self.vertex_count} {self.edge_count}"]
        lines.extend(" ".join(map(str, e)) for e in self.sorted_edges())
        return "\n".join(lines) + "\n"

    def with_edges(self, edges: Iterable[frozenset]) -> "Hypergraph":
        return Hypergraph(self.r, self.vertex_count, frozenset(edges))


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _ints(lineno: int, line: str) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise HypergraphFormatError(lineno, f"non-integer token in {line!r}") from None


def load_hypergraph(text: str) -> Hypergraph:
    """Parse the ``r N m`` header format; every error names its line."""
    lines = list(_content_lines(text))
    if not lines:
        raise HypergraphFormatError(1, "missing header 'r N m'")
    lineno, header = lines[0]
    fields = _ints(lineno, header)
    if len(fields) != 3:
        raise HypergraphFormatError(lineno, "malformed header, expected 'r N m'")
    r, n, m = fields
    if r < 2 or n < 0 or m < 0:
        raise HypergraphFormatError(lineno, f"header values out of range: r={r} N={n} m={m}")
    body = lines[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] if body else lineno)
        raise HypergraphFormatError(where, f"header declares {m} edges, found {len(body)}")
    seen: set[frozenset] = set()
    for lineno, line in body:
        vs = _ints(lineno, line)
        if len(vs) != r:
            raise HypergraphFormatError(lineno, f"edge has arity {len(vs)}, expected {r}")
        if len(set(vs)) != r:
            raise HypergraphFormatError(lineno, f"repeated vertex in edge {vs}")
        for v in vs:
            if not 0 <= v < n:
                raise HypergraphFormatError(lineno, f"vertex {v} out of range 0..{n - 1}")
        e = frozenset(vs)
        if e in seen:
            raise HypergraphFormatError(lineno, f"duplicate edge {sorted(vs)}")
        seen.add(e)
    return Hypergraph(r, n, frozenset(seen))


# --------------------------------------------------------------------------
# witnesses and their validators

@dataclass(frozen=True)
class TightCycleWitness:
    vertices: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices)

    def windows(self, r: int) -> list[tuple[int, ...]]:
        k = len(self.vertices)
        return [tuple(self.vertices[(i + j) % k] for j in range(r)) for i in range(k)]


def is_tight_cycle(H: Hypergraph, vertices: Iterable[int]) -> bool:
    vs = tuple(vertices)
    k = len(vs)
    if k < H.r + 1 or len(set(vs)) != k:
        return False
    return all(frozenset(vs[(i + j) % k] for j in range(H.r)) in H.edges for i in range(k))


@dataclass(frozen=True)
class BergeWitness:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return len(self.vertices)


def is_berge_cycle(H: Hypergraph, w: BergeWitness) -> bool:
    k = len(w.vertices)
    if k < 2 or len(w.edges) != k:
        return False
    if len(set(w.vertices)) != k or len({frozenset(e) for e in w.edges}) != k:
        return False
    if any(frozenset(e) not in H.edges for e in w.edges):
        return False
    # v_i lies in e_{i-1} and e_i
    return all(w.vertices[i] in w.edges[i - 1] and w.vertices[i] in w.edges[i] for i in range(k))


@dataclass(frozen=True)
class LooseWitness:
    edges: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return len(self.edges)


def is_loose_cycle(H: Hypergraph, w: LooseWitness) -> bool:
    es = [frozenset(e) for e in w.edges]
    k = len(es)
    if k < 3 or len(set(es)) != k or any(e not in H.edges for e in es):
        return False
    connectors = []
    for i in range(k):
        for j in range(i + 1, k):
            common = es[i] & es[j]
            consecutive = j == i + 1 or (i == 0 and j == k - 1)
            if consecutive and len(common) != 1:
                return False
            if not consecutive and common:
                return False
        connectors.append(next(iter(es[i] & es[(i + 1) % k])))
    return len(set(connectors)) == k


# --------------------------------------------------------------------------
# detectors

class _Counter:
    __slots__ = ("nodes", "budget")

    def __init__(self, budget: Optional[int]):
        self.nodes = 0
        self.budget = budget

    def tick(self):
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise BudgetExceeded(self.nodes)


def find_tight_cycle(
    H: Hypergraph,
    max_length: Optional[int] = None,
    budget: Optional[int] = None,
    required_edge: Optional[Iterable[int]] = None,
) -> Optional[TightCycleWitness]:
    """Return a tight cycle of length at least ``r + 1`` or ``None``.

    Depth-first window extension over bitmask edge sets.  Without
    ``required_edge`` the cycle is rooted at its lowest-ranked vertex, with
    ranks assigned by descending degree.  With ``required_edge`` only cycles
    having that edge as a window are searched.  Raises ``BudgetExceeded``
    once more than ``budget`` nodes have been expanded.
    """
    r = H.r
    if max_length is not None and max_length < r + 1:
        raise ValueError(f"max_length must be at least r+1 = {r + 1}")
    limit = H.vertex_count if max_length is None else min(max_length, H.vertex_count)
    if limit < r + 1 or H.edge_count < r + 1:
        return None

    emask = {sum(1 << v for v in e) for e in H.edges}
    # ext[m]: vertices w with m | w contained in some edge (|m| <= r-1)
    ext: dict[int, set[int]] = {}
    for e in H.edges:
        ev = sorted(e)
        for size in range(1, r):
            for sub in itertools.combinations(ev, size):
                m = sum(1 << v for v in sub)
                bucket = ext.setdefault(m, set())
                bucket.update(v for v in ev if v not in sub)

    deg = H.degrees()
    order = sorted((v for v in range(H.vertex_count) if deg[v] > 0), key=lambda v: (-deg[v], v))
    rank = {v: i for i, v in enumerate(order)}
    counter = _Counter(budget)

    def closes(path: list[int]) -> bool:
        k = len(path)
        for i in range(k - r + 1, k):
            m = 0
            for j in range(r):
                m |= 1 << path[(i + j) % k]
            if m not in emask:
                return False
        return True

    def extend(path: list[int], used: int, floor: int) -> Optional[list[int]]:
        counter.tick()
        k = len(path)
        if k >= r + 1 and closes(path):
            return path
        if k == limit:
            return None
        window = 0
        for v in path[-(r - 1):]:
            window |= 1 << v
        for w in sorted(ext.get(window, ()), key=rank.__getitem__):
            if used >> w & 1 or rank[w] <= floor:
                continue
            path.append(w)
            found = extend(path, used | 1 << w, floor)
            if found:
                return found
            path.pop()
        return None

    if required_edge is not None:
        e = tuple(required_edge)
        if frozenset(e) not in H.edges:
            raise ValueError(f"required edge {sorted(e)} is not in the hypergraph")
        for perm in itertools.permutations(sorted(e)):
            found = extend(list(perm), sum(1 << v for v in perm), -1)
            if found:
                return TightCycleWitness(tuple(found))
        return None

    for s in order:
        found = extend([s], 1 << s, rank[s])
        if found:
            return TightCycleWitness(tuple(found))
    return None


def find_berge_cycle(H: Hypergraph) -> Optional[BergeWitness]:
    """Berge cycles are exactly the cycles of the vertex/edge incidence graph."""
    edges = H.sorted_edges()
    inc = nx.Graph()
    for i, e in enumerate(edges):
        for v in e:
            inc.add_edge(("v", v), ("e", i))
    try:
        cycle = nx.find_cycle(inc)
    except nx.NetworkXNoCycle:
        return None
    nodes = [u for u, _ in cycle]
    start = next(i for i, node in enumerate(nodes) if node[0] == "v")
    nodes = nodes[start:] + nodes[:start]
    vs = tuple(node[1] for node in nodes[0::2])
    # nodes run v_1, e_1, v_2, e_2, ... so v_i lies in e_{i-1} and e_i
    es = tuple(edges[node[1]] for node in nodes[1::2])
    return BergeWitness(vs, es)


def find_loose_cycle(H: Hypergraph, budget: Optional[int] = None) -> Optional[LooseWitness]:
    """Loose cycle with pairwise distinct connector vertices, or ``None``.

    A common apex shared by all edges never counts as a loose triangle.
    """
    edges = H.sorted_edges()
    masks = [sum(1 << v for v in e) for e in edges]
    m = len(masks)
    counter = _Counter(budget)

    def single(x: int) -> int:
        # the vertex of a one-bit mask, or -1
        return x.bit_length() - 1 if x and not x & (x - 1) else -1

    def extend(path: list[int], interior: int, connectors: int) -> Optional[list[int]]:
        # interior: union of e_2..e_{k-1}
        counter.tick()
        first, last = masks[path[0]], masks[path[-1]]
        k = len(path)
        for f in range(path[0] + 1, m):
            if f in path:
                continue
            fm = masks[f]
            c = single(fm & last)
            if c < 0 or connectors >> c & 1 or fm & interior:
                continue
            if k >= 2:
                closing = fm & first
                if closing:
                    c2 = single(closing)
                    if c2 >= 0 and c2 != c and not connectors >> c2 & 1:
                        return path + [f]
                    continue
            new_interior = interior | (last if k >= 2 else 0)
            found = extend(path + [f], new_interior, connectors | 1 << c)
            if found:
                return found
        return None

    for s in range(m):
        found = extend([s], 0, 0)
        if found:
            return LooseWitness(tuple(edges[i] for i in found))
    return None


# --------------------------------------------------------------------------
# constructions and partitions

def construct(kind: str, n: int, r: int) -> Hypergraph:
    """``star``: every r-set through vertex 0.  ``berge_free``: disjoint
    (r-1)-sets each joined to vertex 0."""
    if r < 2 or n < r:
        raise ValueError(f"need n >= r >= 2, got n={n}, r={r}")
    if kind == "star":
        edges = [(0,) + rest for rest in itertools.combinations(range(1, n), r - 1)]
    elif kind == "berge_free":
        count = (n - 1) // (r - 1)
        edges = [(0,) + tuple(range(1 + i * (r - 1), 1 + (i + 1) * (r - 1))) for i in range(count)]
    else:
        raise ValueError(f"unknown construction {kind!r}")
    return Hypergraph.from_edges(r, n, edges)


def complete(n: int, r: int) -> Hypergraph:
    return Hypergraph.from_edges(r, n, itertools.combinations(range(n), r))


@dataclass(frozen=True)
class Partition:
    r: int
    assignment: tuple[int, ...]  # vertex -> part in 1..r

    def __post_init__(self):
        for v, p in enumerate(self.assignment):
            if not 1 <= p <= self.r:
                raise ValueError(f"vertex {v} assigned to part {p} outside 1..{self.r}")

    def part(self, v: int) -> int:
        return self.assignment[v]

    def is_transversal(self, edge: Iterable[int]) -> bool:
        parts = {self.assignment[v] for v in edge}
        return len(parts) == self.r

    def dumps(self) -> str:
        return "".join(f"{v} {p}\n" for v, p in enumerate(self.assignment))


def load_partition(text: str, r: int, vertex_count: int) -> Partition:
    assignment: dict[int, int] = {}
    for lineno, line in _content_lines(text):
        fields = _ints(lineno, line)
        if len(fields) != 2:
            raise HypergraphFormatError(lineno, "expected 'vertex part'")
        v, p = fields
        if not 0 <= v < vertex_count:
            raise HypergraphFormatError(lineno, f"vertex {v} out of range")
        if not 1 <= p <= r:
            raise HypergraphFormatError(lineno, f"part {p} outside 1..{r}")
        if v in assignment:
            raise HypergraphFormatError(lineno, f"vertex {v} assigned twice")
        assignment[v] = p
    missing = [v for v in range(vertex_count) if v not in assignment]
    if missing:
        raise HypergraphFormatError(0, f"vertices without a part: {missing[:10]}")
    return Partition(r, tuple(assignment[v] for v in range(vertex_count)))


def transversal_subgraph(H: Hypergraph, P: Partition) -> Hypergraph:
    return H.with_edges(e for e in H.edges if P.is_transversal(e))


def random_r_partition(H: Hypergraph, seed: int) -> tuple[Partition, Hypergraph]:
    rng = make_rng(seed, PARTITION)
    parts = rng.integers(1, H.r + 1, size=H.vertex_count)
    P = Partition(H.r, tuple(int(p) for p in parts))
    return P, transversal_subgraph(H, P)


def transversal_fraction(r: int) -> float:
    """Probability that a fixed edge survives a uniform random r-partition."""
    from math import factorial

    return factorial(r) / r**r


def star_edge_count(n: int, r: int) -> int:
    return comb(n - 1, r - 1)
