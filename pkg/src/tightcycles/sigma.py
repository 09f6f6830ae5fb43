"""Sigma-neighbours, sigma-paths and sigma-cycles in r-line-graphs.

A permutation ``sigma`` of 1..r is stored as a tuple with ``sigma[i-1] = σ(i)``.
``y`` is a sigma-neighbour of ``x`` when the two tuples share no coordinate and
every interpolation tuple z_0 = x, z_1, ..., z_r = y (coordinate σ(i) switched
from x to y at step i) is a vertex of the line graph.  Sigma-paths and cycles
are sequences of pairwise coordinate-disjoint tuples chained by this relation;
read in sigma-order they spell tight paths and cycles of the corresponding
r-graph.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .expansion import remove_coordinates
from .hypergraph import TightCycleWitness
from .linegraph import LineGraph, Vertex, coordinate_order, label_key
from .parameters import ParameterSet

DEFAULT_BUDGET = 200_000


def identity(r: int) -> tuple[int, ...]:
    return tuple(range(1, r + 1))


def _check_sigma(sigma: Iterable[int], r: int) -> tuple[int, ...]:
    sigma = tuple(int(s) for s in sigma)
    if sorted(sigma) != list(range(1, r + 1)):
        raise ValueError(f"{sigma} is not a permutation of 1..{r}")
    return sigma


def interpolation_tuples(x: Vertex, y: Vertex, sigma: Iterable[int]) -> list[Vertex]:
    """z_0..z_r with (z_i)_j = y_j when σ^{-1}(j) <= i and x_j otherwise."""
    r = len(x)
    sigma = _check_sigma(sigma, r)
    if len(y) != r:
        raise ValueError("tuples of different lengths")
    shared = set(x) & set(y)
    if shared:
        raise ValueError(f"tuples share coordinates {sorted(shared, key=label_key)}")
    position = {s: i for i, s in enumerate(sigma, start=1)}  # σ^{-1}
    return [
        tuple(y[j] if position[j + 1] <= i else x[j] for j in range(r))
        for i in range(r + 1)
    ]


@dataclass(frozen=True)
class NeighbourCheck:
    ok: bool
    tuples: tuple = ()
    missing: Optional[Vertex] = None
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


def is_sigma_neighbour(G: LineGraph, x: Vertex, y: Vertex, sigma) -> NeighbourCheck:
    for v in (x, y):
        if v not in G:
            raise KeyError(f"{v} is not a vertex of the line graph")
    shared = set(x) & set(y)
    if shared:
        return NeighbourCheck(False, reason=f"shared coordinate {sorted(shared, key=label_key)[0]}")
    zs = interpolation_tuples(x, y, sigma)
    for z in zs:
        if z not in G:
            return NeighbourCheck(False, missing=z, reason=f"interpolation tuple {z} missing")
    return NeighbourCheck(True, tuples=tuple(zs))


# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaSequence:
    sigma: tuple
    vertices: tuple
    closed: bool = False

    @property
    def order(self) -> int:
        return len(self.vertices)

    def coordinates(self) -> set:
        return {c for x in self.vertices for c in x}

    def to_json(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "closed": self.closed,
            "vertices": [list(x) for x in self.vertices],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "SigmaSequence":
        return cls(
            tuple(int(s) for s in obj["sigma"]),
            tuple(tuple(x) for x in obj["vertices"]),
            bool(obj.get("closed", False)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "SigmaSequence":
        return cls.from_json(json.loads(text))


@dataclass(frozen=True)
class Validation:
    ok: bool
    reason: Optional[str] = None

    def __bool__(self):
        return self.ok


def validate_sigma_sequence(G: LineGraph, seq: SigmaSequence) -> Validation:
    k = seq.order
    if k == 0:
        return Validation(False, "empty sequence")
    if seq.closed and k < 2:
        return Validation(False, "a closed sequence needs at least two tuples")
    try:
        sigma = _check_sigma(seq.sigma, G.r)
    except ValueError as exc:
        return Validation(False, str(exc))
    owner: dict = {}
    for i, x in enumerate(seq.vertices):
        if x not in G:
            return Validation(False, f"tuple {i} {x} is not a vertex")
        for c in x:
            if c in owner:
                return Validation(False, f"coordinate {c} shared by tuples {owner[c]} and {i}")
            owner[c] = i
    pairs = k if seq.closed else k - 1
    for i in range(pairs):
        check = is_sigma_neighbour(G, seq.vertices[i], seq.vertices[(i + 1) % k], sigma)
        if not check:
            return Validation(False, f"tuples {i} -> {(i + 1) % k}: {check.reason}")
    return Validation(True)


# --------------------------------------------------------------------------
# search structures

class _Structure:
    """Coordinate bitmasks and sigma-successor lists for one (graph, sigma)."""

    def __init__(self, G: LineGraph, sigma: tuple):
        self.G = G
        self.sigma = sigma
        bits = {c: i for i, c in enumerate(coordinate_order(G))}
        self.cmask = {x: sum(1 << bits[c] for c in x) for x in G.order}
        self.succ = {x: self._successors(x) for x in G.order}

    def _successors(self, x: Vertex) -> list:
        G, sigma, r = self.G, self.sigma, self.G.r
        out = []

        def walk(z: Vertex, step: int):
            if step == r:
                out.append(z)
                return
            j = sigma[step] - 1
            for w in G.block_members(z, j):
                if w[j] != x[j]:
                    walk(w, step + 1)

        walk(x, 0)
        out.sort(key=G.index.__getitem__)
        return out

    def path_mask(self, path) -> int:
        m = 0
        for v in path:
            m |= self.cmask[v]
        return m


def _structure(G: LineGraph, sigma) -> _Structure:
    sigma = _check_sigma(sigma, G.r)
    key = ("sigma", sigma)
    if key not in G.memo:
        G.memo[key] = _Structure(G, sigma)
    return G.memo[key]


def sigma_successors(G: LineGraph, x: Vertex, sigma) -> list:
    """All y that are sigma-neighbours of x, in canonical order."""
    return list(_structure(G, sigma).succ[x])


@dataclass
class ReachResult:
    source: Vertex
    paths: dict  # target -> tuple of tuples, source first
    complete: bool
    nodes: int = 0

    @property
    def reached(self) -> set:
        return set(self.paths)


def sigma_reachable(
    G: LineGraph,
    x: Vertex,
    sigma,
    max_order: int,
    budget: Optional[int] = DEFAULT_BUDGET,
) -> ReachResult:
    """Targets reachable from ``x`` by a sigma-path of order at most ``max_order``.

    Layered search over (endpoint, used-coordinates) states, so each target is
    recorded with a path of minimum order.  ``complete`` is False when the
    node budget ran out; the paths found so far are still valid.
    """
    if x not in G:
        raise KeyError(f"{x} is not a vertex of the line graph")
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    st = _structure(G, sigma)
    cm, succ = st.cmask, st.succ
    paths = {x: (x,)}
    frontier = [(x, cm[x], (x,))]
    seen = {(x, cm[x])}
    nodes = 0
    order = 1
    while frontier and order < max_order:
        nxt = []
        for v, used, path in frontier:
            for y in succ[v]:
                nodes += 1
                if budget is not None and nodes > budget:
                    return ReachResult(x, paths, False, nodes)
                ym = cm[y]
                if ym & used:
                    continue
                state = (y, used | ym)
                if state in seen:
                    continue
                seen.add(state)
                p = path + (y,)
                if y not in paths:
                    paths[y] = p
                nxt.append((y, used | ym, p))
        frontier = nxt
        order += 1
    return ReachResult(x, paths, True, nodes)


# --------------------------------------------------------------------------
# robust reachability

@dataclass
class RobustReachResult:
    source: Vertex
    paths: dict
    load: Counter
    cap: int
    max_order: int
    saturated: frozenset
    complete: bool
    rounds: int
    checks: dict = field(default_factory=dict)

    @property
    def reached(self) -> set:
        return set(self.paths)


def recompute_load(source: Vertex, paths: Mapping) -> Counter:
    base = set(source)
    load: Counter = Counter()
    for p in paths.values():
        for w in {c for v in p for c in v} - base:
            load[w] += 1
    return load


def robust_reach(
    G: LineGraph,
    x: Vertex,
    sigma,
    params: ParameterSet,
    budget: Optional[int] = DEFAULT_BUDGET,
) -> RobustReachResult:
    """Grow a family of sigma-paths from ``x`` in which no outside coordinate
    is used by more than floor(n/t) paths.

    Each round removes the saturated coordinates F, searches the remaining
    graph from ``x``, and adopts every newly reached target whose path still
    fits under the cap.  Stops when a round adds nothing.
    """
    if x not in G:
        raise KeyError(f"{x} is not a vertex of the line graph")
    if params.t < 1:
        raise ValueError("robust reachability needs t >= 1")
    n = len(G)
    cap = n // params.t
    ell = params.max_order
    st = _structure(G, sigma)
    base = set(x)
    all_coords = set().union(*G.parts)
    paths: dict = {x: (x,)}
    load: Counter = Counter()
    complete = True
    rounds = 0
    while True:
        rounds += 1
        F = frozenset(w for w in all_coords - base if load[w] >= cap)
        H = remove_coordinates(G, F)
        reach = sigma_reachable(H, x, st.sigma, ell, budget)
        complete = complete and reach.complete
        progress = False
        for y, p in reach.paths.items():
            if y in paths:
                continue
            used = {c for v in p for c in v} - base
            if any(load[w] >= cap for w in used):
                continue
            paths[y] = p
            for w in used:
                load[w] += 1
            progress = True
        if not progress:
            break
    saturated = frozenset(w for w, c in load.items() if c >= cap)
    r = G.r
    load_sum = sum(load.values())
    checks = {
        "max_load": max(load.values(), default=0),
        "cap_ok": all(c <= cap for c in load.values()),
        "saturated": len(saturated),
        "load_sum": load_sum,
        # |F| * cap <= sum of path coordinate counts <= r * ell * n
        "load_chain_ok": len(saturated) * cap <= load_sum <= r * ell * n,
        "bad_coords_bound": str(r * params.ell * params.t),
        "bad_coords_ok": len(saturated) <= r * params.ell * params.t,
        "size_target": float((1 - 2 * params.epsilon) * n),
        "size_ok": len(paths) >= (1 - 2 * params.epsilon) * n,
        "hypotheses": params.robust_hypotheses,
    }
    return RobustReachResult(x, paths, load, cap, ell, saturated, complete, rounds, checks)


# --------------------------------------------------------------------------
# reach digraphs and cycles

def build_reach_digraph(
    G: LineGraph,
    x: Vertex,
    families: Mapping[Vertex, Mapping[Vertex, tuple]],
    sigma,
) -> dict:
    """D(x): y -> z whenever P(x, y) followed by P(y, z) is a sigma-path.

    Only y != x and z != y are considered; the trivial order-1 paths would
    otherwise contribute loops.  Every edge is revalidated.
    """
    if x not in families:
        return {}
    st = _structure(G, sigma)
    cm = st.cmask
    from_x = families[x]
    edges: dict = {}
    for y, pxy in from_x.items():
        if y == x or y not in families:
            continue
        mxy = st.path_mask(pxy)
        out = []
        for z, pyz in families[y].items():
            if z == y:
                continue
            if mxy & st.path_mask(pyz) != cm[y]:
                continue
            seq = SigmaSequence(st.sigma, pxy + pyz[1:])
            check = validate_sigma_sequence(G, seq)
            assert check, f"reach digraph edge {y} -> {z} failed revalidation: {check.reason}"
            out.append(z)
        if out:
            edges[y] = out
    return edges


@dataclass
class CycleSearch:
    cycle: Optional[SigmaSequence]
    conclusive: bool
    route: str
    checks: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.cycle is not None


def _exhaustive_cycle(st: _Structure, max_order: int, budget: Optional[int]) -> tuple[Optional[tuple], bool, int]:
    G = st.G
    cm, succ = st.cmask, st.succ
    succ_sets = {v: set(s) for v, s in succ.items()}
    idx = G.index
    nodes = 0

    class _Out(Exception):
        pass

    for s in G.order:
        si = idx[s]
        depth_seen: dict = {}

        def dfs(v, used, path):
            nonlocal nodes
            nodes += 1
            if budget is not None and nodes > budget:
                raise _Out
            if len(path) >= 2 and s in succ_sets[v]:
                return path
            if len(path) >= max_order:
                return None
            for y in succ[v]:
                if idx[y] <= si or cm[y] & used:
                    continue
                key = (y, used | cm[y])
                d = len(path) + 1
                if depth_seen.get(key, math.inf) <= d:
                    continue
                depth_seen[key] = d
                found = dfs(y, used | cm[y], path + (y,))
                if found:
                    return found
            return None

        try:
            found = dfs(s, cm[s], (s,))
        except _Out:
            return None, False, nodes
        if found:
            return found, True, nodes
    return None, True, nodes


def find_sigma_cycle(
    G: LineGraph,
    sigma,
    params: ParameterSet,
    budget: Optional[int] = DEFAULT_BUDGET,
    exhaustive_fallback: bool = True,
) -> CycleSearch:
    """Build a sigma-cycle P(x,z) P(z,y) Q(y,x) following the expander argument.

    Robust path families P(x, .) are grown from every source; F(y) collects
    coordinates used by more than floor(n/t) paths into y, and return paths
    Q(y, .) are searched in G with F(y) removed.  Pairs (x, y) with Q(y, x)
    defined are tried in order: first those whose in-degree in D(x) is at
    least n/2, then the rest (allowing z = x).  Whatever is returned has been
    revalidated.  If this fails, an exhaustive search settles the question
    when it fits in ``budget``.
    """
    sigma = _check_sigma(sigma, G.r)
    n = len(G)
    ell = params.max_order
    checks: dict = {"order_bound": 3 * ell}
    if n < 2:
        return CycleSearch(None, True, "structural", checks)
    st = _structure(G, sigma)
    if not any(st.succ.values()):
        # no tuple has a sigma-neighbour, so no sigma-cycle can exist
        return CycleSearch(None, True, "structural", checks)

    complete = True
    families = {}
    for x in G.order:
        res = robust_reach(G, x, sigma, params, budget)
        complete = complete and res.complete
        families[x] = res.paths
    cap = n // params.t

    # F(y): outside coordinates on more than cap of the paths P(., y)
    into: dict = {y: Counter() for y in G.order}
    for x, fam in families.items():
        for y, p in fam.items():
            for w in {c for v in p for c in v} - set(y):
                into[y][w] += 1
    forbidden = {y: frozenset(w for w, c in into[y].items() if c > cap) for y in G.order}
    returns = {}
    for y in G.order:
        res = sigma_reachable(remove_coordinates(G, forbidden[y]), y, sigma, ell, budget)
        complete = complete and res.complete
        returns[y] = res.paths
    checks["max_forbidden"] = max((len(f) for f in forbidden.values()), default=0)
    checks["forbidden_bound"] = str(params.u)
    checks["forbidden_ok"] = checks["max_forbidden"] <= params.u

    sources = sorted(G.order, key=lambda v: (-G.total_degree(v), G.index[v]))
    for strict in (True, False):
        for x in sources:
            D = build_reach_digraph(G, x, families, sigma)
            indeg: Counter = Counter()
            preds: dict = {}
            for y, outs in D.items():
                for z in outs:
                    indeg[z] += 1
                    preds.setdefault(z, []).append(y)
            ys = [y for y in G.order if y != x and x in returns[y]]
            if strict:
                ys = [y for y in ys if indeg[y] >= n / 2]
            ys.sort(key=lambda y: (-indeg[y], G.index[y]))
            for y in ys:
                q = returns[y][x]
                S = st.path_mask(q) & ~(st.cmask[x] | st.cmask[y])
                Z = sorted(preds.get(y, ()), key=G.index.__getitem__)
                if not strict:
                    Z.append(x)
                for z in Z:
                    p1 = families[x].get(z)
                    p2 = families[z].get(y)
                    if p1 is None or p2 is None:
                        continue
                    if st.path_mask(p1) & S or st.path_mask(p2) & S:
                        continue
                    seq = SigmaSequence(sigma, p1 + p2[1:] + q[1:-1], closed=True)
                    if validate_sigma_sequence(G, seq):
                        checks["pair_in_degree"] = indeg[y]
                        checks["order_ok"] = seq.order <= 3 * ell
                        return CycleSearch(seq, True, "proof" if strict else "relaxed", checks)

    if exhaustive_fallback:
        found, done, nodes = _exhaustive_cycle(st, 3 * ell, budget)
        checks["exhaustive_nodes"] = nodes
        if found:
            seq = SigmaSequence(sigma, found, closed=True)
            assert validate_sigma_sequence(G, seq)
            checks["order_ok"] = seq.order <= 3 * ell
            return CycleSearch(seq, True, "exhaustive", checks)
        return CycleSearch(None, done, "exhaustive", checks)
    return CycleSearch(None, False, "proof", checks)


def sigma_cycle_labels(seq: SigmaSequence) -> list:
    """Coordinates of the tuples listed in sigma-order, tuple after tuple."""
    return [x[s - 1] for x in seq.vertices for s in seq.sigma]


def sigma_cycle_to_tight(G: LineGraph, seq: SigmaSequence) -> TightCycleWitness:
    """The tight cycle of ``to_hypergraph(G)`` spelled by a sigma-cycle."""
    if not seq.closed:
        raise ValueError("expected a closed sigma-sequence")
    check = validate_sigma_sequence(G, seq)
    if not check:
        raise ValueError(f"not a sigma-cycle: {check.reason}")
    index = {c: k for k, c in enumerate(coordinate_order(G))}
    return TightCycleWitness(tuple(index[c] for c in sigma_cycle_labels(seq)))
