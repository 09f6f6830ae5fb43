"""Brute-force reference implementations.

Nothing here calls into the search code it is used to check; each oracle
works from the definitions by plain enumeration.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from tightcycles.hypergraph import Hypergraph
from tightcycles.linegraph import LineGraph, make_label


def has_tight_cycle(r: int, n: int, edges) -> bool:
    es = {frozenset(e) for e in edges}
    for length in range(r + 1, n + 1):
        for support in itertools.combinations(range(n), length):
            for perm in itertools.permutations(support[1:]):
                seq = (support[0],) + perm
                if all(frozenset(seq[(i + j) % length] for j in range(r)) in es for i in range(length)):
                    return True
    return False


def incidence_is_forest(H: Hypergraph) -> bool:
    """A hypergraph has no Berge cycle iff its incidence graph is a forest."""
    parent = {}

    def find(a):
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, e in enumerate(sorted(tuple(sorted(e)) for e in H.edges)):
        for v in e:
            a, b = find(("e", i)), find(("v", v))
            if a == b:
                return False
            parent[a] = b
    return True


def has_loose_cycle(H: Hypergraph, max_length: int) -> bool:
    edges = [frozenset(e) for e in H.edges]
    for length in range(3, max_length + 1):
        for seq in itertools.permutations(edges, length):
            ok = True
            connectors = []
            for i in range(length):
                for j in range(i + 1, length):
                    common = seq[i] & seq[j]
                    consecutive = j == i + 1 or (i == 0 and j == length - 1)
                    if (consecutive and len(common) != 1) or (not consecutive and common):
                        ok = False
                        break
                if not ok:
                    break
                connectors.append(next(iter(seq[i] & seq[(i + 1) % length])))
            if ok and len(set(connectors)) == length:
                return True
    return False


def blocks_by_scan(G: LineGraph):
    """(direction, member set) pairs, found by comparing every pair of tuples."""
    vs = list(G.vertices)
    found = set()
    for i in range(G.r):
        for x in vs:
            members = frozenset(y for y in vs if all(y[j] == x[j] for j in range(G.r) if j != i))
            found.add((i, members))
    return found


def density_by_sorting(G: LineGraph) -> tuple[int, int, Fraction]:
    """(block count, block size sum, density) by sorting on the other coordinates."""
    count = total = 0
    for i in range(G.r):
        key = lambda x: x[:i] + x[i + 1:]
        for _, grp in itertools.groupby(sorted(G.vertices, key=key), key=key):
            count += 1
            total += sum(1 for _ in grp)
    return count, total, Fraction(total, count)


def has_violation(nodes, neighbours, lam: Fraction) -> bool:
    """All-subsets expansion check; ``neighbours`` maps a node to its neighbour set."""
    n = len(nodes)
    for k in range(1, n // 2 + 1):
        for X in itertools.combinations(nodes, k):
            Xs = set(X)
            N = set().union(*(neighbours[v] for v in X)) - Xs
            if len(N) < lam * k:
                return True
    return False


def random_linegraph(rng: np.random.Generator, r: int, sizes, keep: float) -> LineGraph:
    parts = tuple(frozenset(make_label(p + 1, k) for k in range(m)) for p, m in enumerate(sizes))
    labels = [[make_label(p + 1, k) for k in range(m)] for p, m in enumerate(sizes)]
    tuples = [x for x in itertools.product(*labels) if rng.random() < keep]
    if not tuples:
        tuples = [tuple(lab[0] for lab in labels)]
    return LineGraph(r, parts, frozenset(tuples))


def line_neighbours(G: LineGraph) -> dict:
    """Adjacency of a line graph from the definition: differ in exactly one coordinate."""
    vs = list(G.vertices)
    return {
        x: {y for y in vs if sum(a != b for a, b in zip(x, y)) == 1}
        for x in vs
    }


def interpolate(x, y, sigma):
    """Direct evaluation of the interpolation formula, sigma as a 1-based tuple."""
    r = len(x)
    inv = [0] * (r + 1)
    for i, s in enumerate(sigma, start=1):
        inv[s] = i
    out = []
    for i in range(r + 1):
        out.append(tuple(y[j - 1] if inv[j] <= i else x[j - 1] for j in range(1, r + 1)))
    return out


def random_sigma_cycle(rng: np.random.Generator, r: int, k: int, pool: int, extra: float):
    """A random sigma-cycle of order k and a line graph containing it.

    Returns (graph, sigma, tuples).  The graph holds every interpolation
    tuple of the cycle plus a random sprinkle of other product tuples.
    """
    perm = tuple(int(s) + 1 for s in rng.permutation(r))
    cols = [rng.permutation(pool)[:k] for _ in range(r)]
    tuples = [tuple(make_label(p + 1, int(cols[p][i])) for p in range(r)) for i in range(k)]
    present = set()
    for i in range(k):
        present.update(interpolate(tuples[i], tuples[(i + 1) % k], perm))
    labels = [[make_label(p + 1, j) for j in range(pool)] for p in range(r)]
    for x in itertools.product(*labels):
        if rng.random() < extra:
            present.add(x)
    parts = tuple(frozenset(lab) for lab in labels)
    return LineGraph(r, parts, frozenset(present)), perm, tuple(tuples)
