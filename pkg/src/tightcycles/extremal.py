"""Extremal numbers for tight cycles: the brute-force oracle and the
partition -> line graph -> expander -> sigma-cycle pipeline."""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb, factorial
from pathlib import Path
from typing import Optional

import numpy as np

from .expansion import extract_expander
from .hypergraph import (
    BudgetExceeded,
    Hypergraph,
    find_tight_cycle,
    is_tight_cycle,
    random_r_partition,
)
from .linegraph import density, from_partite, label_vertex, min_degree
from .parameters import ParameterSet, log2, parameter_set
from .sigma import DEFAULT_BUDGET, find_sigma_cycle, identity, sigma_cycle_labels

__all__ = [
    "ParameterSet",
    "parameter_set",
    "OracleResult",
    "brute_force_ex",
    "PipelineConfig",
    "SearchReport",
    "pipeline_run",
    "inequality_chain",
]

EXHAUSTIVE_SLOTS = 20
PREFIX_DEPTH = 4


@dataclass
class OracleResult:
    r: int
    n: int
    value: int
    witness: Hypergraph
    conclusive: bool
    strategy: str
    nodes: int = 0

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "n": self.n,
            "value": self.value,
            "witness": [list(e) for e in self.witness.sorted_edges()],
            "conclusive": self.conclusive,
            "strategy": self.strategy,
            "nodes": self.nodes,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OracleResult":
        w = Hypergraph.from_edges(obj["r"], obj["n"], obj["witness"])
        return cls(obj["r"], obj["n"], obj["value"], w, obj["conclusive"], obj["strategy"], obj["nodes"])


def _edge_slots(n: int, r: int) -> list[tuple[int, ...]]:
    """All r-subsets of range(n) in colex order."""
    return sorted(itertools.combinations(range(n), r), key=lambda e: e[::-1])


def _cycle_masks(n: int, r: int, slot: dict) -> list[int]:
    """Edge-slot bitmask of every tight cycle of the complete r-graph on n vertices."""
    masks = set()
    for length in range(r + 1, n + 1):
        for support in itertools.combinations(range(n), length):
            head, rest = support[0], support[1:]
            for perm in itertools.permutations(rest):
                seq = (head,) + perm
                m = 0
                for i in range(length):
                    window = tuple(sorted(seq[(i + j) % length] for j in range(r)))
                    m |= 1 << slot[window]
                masks.add(m)
    # supersets of another cycle's edge set are redundant
    ordered = sorted(masks, key=lambda m: (m.bit_count(), m))
    minimal: list[int] = []
    for m in ordered:
        if not any(m & k == k for k in minimal):
            minimal.append(m)
    return minimal


def _exhaustive(n: int, r: int) -> tuple[int, list[tuple[int, ...]], int]:
    slots = sorted(itertools.combinations(range(n), r))
    m = len(slots)
    if m > EXHAUSTIVE_SLOTS:
        raise ValueError(f"exhaustive strategy needs C(n, r) <= {EXHAUSTIVE_SLOTS}, got {m}")
    slot = {e: i for i, e in enumerate(slots)}
    subsets = np.arange(1 << m, dtype=np.uint32)
    bad = np.zeros(subsets.shape, dtype=bool)
    for c in _cycle_masks(n, r, slot):
        cm = np.uint32(c)
        bad |= (subsets & cm) == cm
    sizes = np.bitwise_count(subsets)
    sizes[bad] = 0
    best = int(sizes.max()) if m else 0
    candidates = np.flatnonzero(sizes == best) if m else [0]
    witness = min(
        [slots[i] for i in range(m) if int(s) >> i & 1]
        for s in candidates
    )
    return best, witness, 1 << m


def _branch(args) -> tuple[int, Optional[list], int, bool]:
    """Exact maximisation below one prefix of include/exclude decisions."""
    n, r, prefix_bits, depth, floor, budget = args
    slots = _edge_slots(n, r)
    m = len(slots)
    current = [slots[0]]
    for k in range(depth):
        if prefix_bits >> k & 1:
            e = slots[1 + k]
            H = Hypergraph.from_edges(r, n, current + [e])
            if find_tight_cycle(H, required_edge=e) is not None:
                return -1, None, 0, True
            current.append(e)
    best = [floor, None]
    nodes = 0

    def dfs(i: int):
        nonlocal nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded(nodes)
        if len(current) + (m - i) <= best[0]:
            return
        if i == m:
            best[0], best[1] = len(current), sorted(current)
            return
        e = slots[i]
        H = Hypergraph.from_edges(r, n, current + [e])
        if find_tight_cycle(H, required_edge=e) is None:
            current.append(e)
            dfs(i + 1)
            current.pop()
        dfs(i + 1)

    try:
        dfs(1 + depth)
        done = True
    except BudgetExceeded:
        done = False
    return best[0], best[1], nodes, done


def _backtracking(n: int, r: int, budget: Optional[int], workers: int) -> tuple[int, list, int, bool]:
    m = comb(n, r)
    if m == 0:
        return 0, [], 0, True
    # the star is always feasible, so only strictly better solutions matter
    floor = comb(n - 1, r - 1) - 1 if n >= r else 0
    depth = min(PREFIX_DEPTH, m - 1)
    per_task = None if budget is None else max(1, budget // (1 << depth))
    tasks = [(n, r, bits, depth, floor, per_task) for bits in range((1 << depth) - 1, -1, -1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_branch, tasks))
    else:
        results = [_branch(t) for t in tasks]
    nodes = sum(res[2] for res in results)
    done = all(res[3] for res in results)
    found = [(v, w) for v, w, _, _ in results if w is not None]
    if not found:
        # nothing beat the floor: the star is optimal
        star = [e for e in _edge_slots(n, r) if 0 in e]
        return len(star), sorted(star), nodes, done
    value = max(v for v, _ in found)
    witness = min(w for v, w in found if v == value)
    return value, witness, nodes, done


def _cache_path(cache_dir, key: dict) -> Path:
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()
    return Path(cache_dir) / f"{digest}.json"


def brute_force_ex(
    r: int,
    n: int,
    budget: Optional[int] = None,
    strategy: str = "auto",
    workers: int = 1,
    cache_dir=None,
) -> OracleResult:
    """Largest tight-cycle-free r-graph on n vertices, by exhaustive search.

    ``exhaustive`` tests every subset of the C(n, r) edge slots against the
    edge sets of all tight cycles (needs C(n, r) <= 20).  ``backtracking``
    decides edges in colex order with the first edge fixed and a cycle check
    through each newly added edge.  A tripped budget returns the best value
    found with ``conclusive=False``.
    """
    if r < 2 or n < 0:
        raise ValueError(f"need r >= 2 and n >= 0, got r={r}, n={n}")
    if strategy == "auto":
        strategy = "exhaustive" if comb(n, r) <= EXHAUSTIVE_SLOTS else "backtracking"
    if strategy not in ("exhaustive", "backtracking"):
        raise ValueError(f"unknown strategy {strategy!r}")
    key = {"r": r, "n": n, "strategy": strategy, "budget": budget}
    if cache_dir is not None:
        path = _cache_path(cache_dir, key)
        if path.exists():
            return OracleResult.from_json(json.loads(path.read_text()))
    if strategy == "exhaustive":
        value, witness, nodes = _exhaustive(n, r)
        done = True
    else:
        value, witness, nodes, done = _backtracking(n, r, budget, workers)
    result = OracleResult(r, n, value, Hypergraph.from_edges(r, n, witness), done, strategy, nodes)
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        path.write_text(json.dumps(result.to_json(), sort_keys=True))
    return result


# --------------------------------------------------------------------------
# pipeline

@dataclass
class PipelineConfig:
    max_attempts: int = 64
    budget: int = DEFAULT_BUDGET
    expansion_mode: str = "auto"
    expansion_budget: int = 2000
    t: int = 1  # used whenever the formula gives t < 1
    sigma: Optional[tuple] = None

    def to_json(self) -> dict:
        out = asdict(self)
        out["sigma"] = list(self.sigma) if self.sigma else None
        return out


@dataclass
class SearchReport:
    mode: str
    inputs_digest: str
    witness: Optional[list]
    certificates: dict
    counters: dict
    conclusive: bool

    @property
    def exit_code(self) -> int:
        if self.witness is not None:
            return 0
        return 1 if self.conclusive else 2

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def digest(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()


def _has_disjoint_edges(H: Hypergraph) -> bool:
    edges = [sum(1 << v for v in e) for e in H.edges]
    return any(a & b == 0 for a, b in itertools.combinations(edges, 2))


def inequality_chain(H: Hypergraph, partite_edges: int, expander_size: int) -> dict:
    """The final edge-count argument evaluated on one instance (floats)."""
    r, N = H.r, H.vertex_count
    n = partite_edges
    out: dict = {"N": N, "edges": H.edge_count, "partite_edges": n, "expander_size": expander_size}
    if n < 2 or expander_size < 2 or N < 2:
        out["applicable"] = False
        return out
    log_n, log_m, log_N = float(log2(n)), float(log2(expander_size)), float(log2(N))
    d = n / N ** (r - 1)
    lam, eps = 1 / (2 * log_n), 1 / 20
    expander_threshold = 4000 * r**5 * log_m**2 / (eps**3 * lam**3)
    polylog = 2**8 * 10**6 * r**5 * log_n**5
    edge_bound = 1e9 * r ** (r + 11) / factorial(r) * N ** (r - 1) * log_N**5
    out.update(
        applicable=True,
        d=d,
        d_over_2r=d / (2 * r),
        expander_threshold=expander_threshold,
        below_threshold=d / (2 * r) < expander_threshold,
        threshold_le_polylog=expander_threshold <= polylog * (1 + 1e-12),
        polylog_bound=polylog,
        d_bound=1e9 * r**6 * log_n**5,
        d_bound_in_N=1e9 * r**11 * log_N**5,
        edge_bound=edge_bound,
        edge_bound_holds=H.edge_count <= edge_bound,
        partition_factor=factorial(r) / r**r,
    )
    return out


def pipeline_run(H: Hypergraph, seed: int = 0, config: Optional[PipelineConfig] = None) -> SearchReport:
    """Look for a tight cycle of ``H`` along the route of the upper-bound proof.

    Each attempt draws a random r-partition (seed, seed+1, ...), keeps the
    transversal edges, forms the line graph, extracts an expander with
    lambda = 1/(2 log n) and searches it for a sigma-cycle.  A found cycle is
    mapped back to vertex ids and revalidated in ``H`` itself.  When ``H`` has
    no two disjoint edges no partition can produce a sigma-cycle and the run
    stops at once with a conclusive negative.
    """
    config = config or PipelineConfig()
    r = H.r
    sigma = tuple(config.sigma) if config.sigma else identity(r)
    report = SearchReport(
        mode="pipeline",
        inputs_digest=digest(H.dumps(), str(seed), json.dumps(config.to_json(), sort_keys=True)),
        witness=None,
        certificates={"attempts": []},
        counters={"attempts": 0, "sigma_nodes": 0},
        conclusive=False,
    )
    if not _has_disjoint_edges(H):
        # no partition admits a sigma-cycle; whether H itself is tight-cycle-free
        # is a separate question, settled here by the exact detector
        cert = {"reason": "no two disjoint edges; no partition admits a sigma-cycle"}
        report.certificates["structural"] = cert
        try:
            direct = find_tight_cycle(H, budget=config.budget)
        except BudgetExceeded as exc:
            cert["detector"] = "budget-exceeded"
            report.counters["detector_nodes"] = exc.nodes
            return report
        if direct is None:
            cert["detector"] = "no tight cycle"
            report.conclusive = True
        else:
            # a cycle exists but is out of reach of this route (sigma-cycles
            # of order k spell tight cycles of length rk >= 2r)
            cert["detector"] = f"tight cycle of length {direct.length} exists outside the sigma-cycle route"
        return report

    expected = math.ceil(Fraction(factorial(r), r**r) * H.edge_count)
    attempts = report.certificates["attempts"]
    for k in range(config.max_attempts):
        s = seed + k
        report.counters["attempts"] += 1
        P, Hp = random_r_partition(H, s)
        rec: dict = {"seed": s, "partite_edges": Hp.edge_count, "expected": expected}
        attempts.append(rec)
        if Hp.edge_count < expected:
            rec["status"] = "below-expectation"
            continue
        G = from_partite(Hp, P)
        if len(G) < 2:
            rec["status"] = "too-small"
            continue
        lam = min(Fraction(1), Fraction(1, 2) / log2(len(G)))
        ext = extract_expander(G, lam, config.expansion_mode, config.expansion_budget, seed=s)
        Gp = ext.graph
        rec["line_graph"] = {"vertices": len(G), "density": str(density(G)), "min_degree": min_degree(G)}
        rec["expander"] = ext.certificate()
        rec["inequalities"] = inequality_chain(H, Hp.edge_count, len(Gp))
        if len(Gp) < 2:
            rec["status"] = "expander-too-small"
            continue
        d = min_degree(Gp)
        formula = parameter_set(r, len(Gp), d=d, lam=lam)
        ell = min(formula.max_order, len(set().union(*Gp.parts)) // r)
        t = formula.t if formula.t_ok else config.t
        params = parameter_set(r, len(Gp), d=d, lam=lam, ell=max(ell, 1), t=t)
        rec["parameters"] = {"formula": formula.to_json(), "used": params.to_json()}
        search = find_sigma_cycle(Gp, sigma, params, config.budget)
        report.counters["sigma_nodes"] += search.checks.get("exhaustive_nodes", 0)
        rec["sigma_search"] = {"route": search.route, "conclusive": search.conclusive, "checks": search.checks}
        if not search.found:
            rec["status"] = "no-sigma-cycle"
            continue
        vertices = [label_vertex(c) for c in sigma_cycle_labels(search.cycle)]
        rec["sigma_cycle"] = search.cycle.to_json()
        if not is_tight_cycle(H, vertices):
            rec["status"] = "revalidation-failed"
            continue
        rec["status"] = "witness"
        report.witness = vertices
        report.conclusive = True
        return report
    return report
