"""Command-line frontend.

Exit codes: 0 answer found, 1 conclusively no witness, 2 inconclusive
(a budget tripped or a search could only fail to refute), 3 usage or parse
error.  ``--json`` prints a SearchReport; repeated runs with the same
arguments print the same bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import expansion, extremal, hypergraph, linegraph, sigma
from .extremal import PipelineConfig, SearchReport, digest
from .hypergraph import BudgetExceeded, HypergraphFormatError
from .parameters import log2, parameter_set

OK, NONE, INCONCLUSIVE, USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# argument helpers

def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _perm(text: str) -> tuple:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a permutation: {text!r}") from None


def _tuple(text: str) -> tuple:
    return tuple(s.strip() for s in text.split(","))


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_hg(path: str) -> hypergraph.Hypergraph:
    return hypergraph.load_hypergraph(_read(path))


def _load_lg(args) -> tuple[linegraph.LineGraph, str]:
    text = _read(args.hypergraph)
    H = hypergraph.load_hypergraph(text)
    ptext = _read(args.partition)
    P = hypergraph.load_partition(ptext, H.r, H.vertex_count)
    if args.transversal:
        H = hypergraph.transversal_subgraph(H, P)
    return linegraph.from_partite(H, P), digest(text, ptext)


def _write(path: Optional[str], text: str):
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _vertex(G: linegraph.LineGraph, x: tuple, name: str) -> tuple:
    if x not in G:
        raise UsageError(f"--{name} {','.join(x)} is not a vertex of the line graph")
    return x


# --------------------------------------------------------------------------
# commands; each returns a SearchReport

def _report(mode, inputs, witness=None, certificates=None, counters=None, conclusive=True) -> SearchReport:
    return SearchReport(mode, inputs, witness, certificates or {}, counters or {}, conclusive)


def cmd_hg_construct(args):
    H = hypergraph.construct(args.kind, args.n, args.r)
    text = H.dumps()
    _write(args.output, text)
    certs = {"kind": args.kind, "n": args.n, "r": args.r, "edges": H.edge_count}
    if not args.output:
        certs["hypergraph"] = text
    return _report("hg construct", digest(args.kind, str(args.n), str(args.r)), None, certs), OK


def _detector(mode, find, args, **kw):
    text = _read(args.file)
    H = hypergraph.load_hypergraph(text)
    try:
        w = find(H, **kw)
    except BudgetExceeded as exc:
        return _report(mode, digest(text), None, {"budget": args.budget}, {"nodes": exc.nodes}, False), INCONCLUSIVE
    if w is None:
        return _report(mode, digest(text), None, {"edges": H.edge_count}), NONE
    return w, H, digest(text)


def cmd_hg_find_tight(args):
    out = _detector("hg find-tight", hypergraph.find_tight_cycle, args, max_length=args.max_length, budget=args.budget)
    if len(out) == 2:
        return out
    w, H, dg = out
    return _report("hg find-tight", dg, list(w.vertices), {"length": w.length, "valid": hypergraph.is_tight_cycle(H, w.vertices)}), OK


def cmd_hg_find_berge(args):
    out = _detector("hg find-berge", lambda H: hypergraph.find_berge_cycle(H), args)
    if len(out) == 2:
        return out
    w, H, dg = out
    witness = {"vertices": list(w.vertices), "edges": [list(e) for e in w.edges]}
    return _report("hg find-berge", dg, witness, {"length": w.length, "valid": hypergraph.is_berge_cycle(H, w)}), OK


def cmd_hg_find_loose(args):
    out = _detector("hg find-loose", hypergraph.find_loose_cycle, args, budget=args.budget)
    if len(out) == 2:
        return out
    w, H, dg = out
    return _report("hg find-loose", dg, [list(e) for e in w.edges], {"length": w.length, "valid": hypergraph.is_loose_cycle(H, w)}), OK


def cmd_hg_partition(args):
    text = _read(args.file)
    H = hypergraph.load_hypergraph(text)
    P, Hp = hypergraph.random_r_partition(H, args.seed)
    _write(args.output, P.dumps())
    _write(args.transversal_output, Hp.dumps())
    certs = {"seed": args.seed, "edges": H.edge_count, "transversal_edges": Hp.edge_count,
             "expected_fraction": hypergraph.transversal_fraction(H.r)}
    if not args.output:
        certs["partition"] = P.dumps()
    return _report("hg partition", digest(text, str(args.seed)), None, certs), OK


def _lg_summary(G):
    sizes = [len(p) for p in G.parts]
    out = {"r": G.r, "vertices": len(G), "part_sizes": sizes, "blocks": linegraph.block_count(G)}
    if len(G):
        out.update(density=str(linegraph.density(G)), min_degree=linegraph.min_degree(G))
    return out


def cmd_lg_build(args):
    G, dg = _load_lg(args)
    return _report("lg build", dg, None, _lg_summary(G)), OK


def cmd_lg_density(args):
    G, dg = _load_lg(args)
    certs = {"density": str(linegraph.density(G)), "blocks": linegraph.block_count(G), "vertices": len(G)}
    return _report("lg density", dg, None, certs), OK


def cmd_lg_mindeg(args):
    G, dg = _load_lg(args)
    return _report("lg mindeg", dg, None, {"min_degree": linegraph.min_degree(G)}), OK


def cmd_lg_to_hg(args):
    G, dg = _load_lg(args)
    H = linegraph.to_hypergraph(G)
    _write(args.output, H.dumps())
    certs = {"vertices": H.vertex_count, "edges": H.edge_count, "labels": linegraph.coordinate_order(G)}
    if not args.output:
        certs["hypergraph"] = H.dumps()
    return _report("lg to-hg", dg, None, certs), OK


def cmd_xp_check(args):
    G, dg = _load_lg(args)
    check = expansion.ExpanderCheck(args.lam, args.mode, args.probes, args.seed)
    verdict = expansion.find_expansion_violation(G, check)
    certs = {"lambda": str(args.lam), "mode": verdict.mode, "level": verdict.level, "vertices": len(G)}
    if verdict.witness is not None:
        w = verdict.witness
        witness = {"X": [list(x) for x in sorted(w.X, key=linegraph.vertex_key)], "neighbourhood_size": w.neighbourhood_size}
        return _report("xp check", dg, witness, certs), OK
    if verdict.level == "proved":
        return _report("xp check", dg, None, certs), NONE
    return _report("xp check", dg, None, certs, conclusive=False), INCONCLUSIVE


def cmd_xp_extract(args):
    G, dg = _load_lg(args)
    lam = args.lam if args.lam is not None else min(Fraction(1), Fraction(1, 2) / log2(max(len(G), 2)))
    ext = expansion.extract_expander(G, lam, args.mode, args.probes, args.seed)
    certs = ext.certificate()
    certs["kept"] = [list(x) for x in ext.graph.order]
    return _report("xp extract", dg, None, certs, conclusive=ext.level == "proved"), OK


def cmd_xp_remove(args):
    G, dg = _load_lg(args)
    W = [c for c in args.coords.split(",") if c]
    try:
        Gr = expansion.remove_coordinates(G, W)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    H = _load_hg(args.hypergraph)
    remaining = {frozenset(linegraph.label_vertex(c) for c in x) for x in Gr.vertices}
    Hr = H.with_edges(e for e in H.edges if e in remaining)
    _write(args.output, Hr.dumps())
    certs = _lg_summary(Gr)
    certs["removed"] = sorted(W, key=linegraph.label_key)
    return _report("xp remove-coords", digest(dg, *sorted(W)), None, certs), OK


def cmd_sigma_neighbour(args):
    G, dg = _load_lg(args)
    x, y = _vertex(G, args.x, "x"), _vertex(G, args.y, "y")
    s = args.sigma or sigma.identity(G.r)
    check = sigma.is_sigma_neighbour(G, x, y, s)
    certs = {"sigma": list(s), "reason": check.reason,
             "missing": list(check.missing) if check.missing else None}
    if check:
        return _report("sigma neighbour", dg, [list(z) for z in check.tuples], certs), OK
    return _report("sigma neighbour", dg, None, certs), NONE


def _order_default(G, args):
    if args.max_order is not None:
        return args.max_order
    return max(1, len(G.coordinates()) // G.r)


def cmd_sigma_reach(args):
    G, dg = _load_lg(args)
    x = _vertex(G, args.x, "x")
    s = args.sigma or sigma.identity(G.r)
    res = sigma.sigma_reachable(G, x, s, _order_default(G, args), args.budget)
    paths = {",".join(y): [list(v) for v in p] for y, p in res.paths.items()}
    certs = {"reached": len(res.paths), "complete": res.complete, "paths": paths}
    code = OK if res.complete else INCONCLUSIVE
    return _report("sigma reach", dg, None, certs, {"nodes": res.nodes}, res.complete), code


def _desk_params(G, args):
    n = max(len(G), 2)
    return parameter_set(G.r, n, d=linegraph.min_degree(G), lam=args.lam, epsilon=args.epsilon,
                         ell=_order_default(G, args), t=args.t)


def cmd_sigma_robust(args):
    G, dg = _load_lg(args)
    x = _vertex(G, args.x, "x")
    s = args.sigma or sigma.identity(G.r)
    params = _desk_params(G, args)
    res = sigma.robust_reach(G, x, s, params, args.budget)
    paths = {",".join(y): [list(v) for v in p] for y, p in res.paths.items()}
    load = {w: c for w, c in sorted(res.load.items(), key=lambda kv: linegraph.label_key(kv[0]))}
    certs = {"reached": len(res.paths), "cap": res.cap, "load": load, "paths": paths,
             "saturated": sorted(res.saturated, key=linegraph.label_key), "checks": res.checks,
             "parameters": params.to_json()}
    code = OK if res.complete else INCONCLUSIVE
    return _report("sigma robust-reach", dg, None, certs, {"rounds": res.rounds}, res.complete), code


def cmd_sigma_find_cycle(args):
    G, dg = _load_lg(args)
    s = args.sigma or sigma.identity(G.r)
    params = _desk_params(G, args)
    res = sigma.find_sigma_cycle(G, s, params, args.budget)
    certs = {"route": res.route, "checks": res.checks, "parameters": params.to_json()}
    if res.found:
        tight = sigma.sigma_cycle_to_tight(G, res.cycle)
        certs["tight_cycle"] = list(tight.vertices)
        return _report("sigma find-cycle", dg, res.cycle.to_json(), certs), OK
    return _report("sigma find-cycle", dg, None, certs, conclusive=res.conclusive), NONE if res.conclusive else INCONCLUSIVE


def cmd_ex_brute(args):
    res = extremal.brute_force_ex(args.r, args.n, args.budget, args.strategy, args.workers,
                                  os.environ.get("HG_CACHE_DIR"))
    body = res.to_json()
    witness = body.pop("witness")
    nodes = body.pop("nodes")
    return (_report("ex brute", digest(str(args.r), str(args.n), str(args.strategy), str(args.budget)),
                    witness, body, {"nodes": nodes}, res.conclusive), OK if res.conclusive else INCONCLUSIVE)


def cmd_ex_params(args):
    p = parameter_set(args.r, args.n, d=args.d, lam=args.lam, epsilon=args.epsilon, ell=args.ell, t=args.t)
    return _report("ex params", digest(*map(str, (args.r, args.n, args.d, args.lam, args.epsilon, args.ell, args.t))),
                   None, p.to_json()), OK


def cmd_pipeline_run(args):
    text = _read(args.file)
    H = hypergraph.load_hypergraph(text)
    config = PipelineConfig(max_attempts=args.attempts, sigma=args.sigma)
    if args.budget is not None:
        config.budget = args.budget
    report = extremal.pipeline_run(H, args.seed, config)
    return report, report.exit_code


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=None)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--json", action="store_true")
    common.add_argument("-o", "--output")

    lg_inputs = _Parser(add_help=False)
    lg_inputs.add_argument("hypergraph")
    lg_inputs.add_argument("partition")
    lg_inputs.add_argument("--transversal", action="store_true", help="drop non-transversal edges first")

    sig = _Parser(add_help=False)
    sig.add_argument("--sigma", type=_perm)

    parser = _Parser(prog="tightcycles", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def add(group, name, func, parents=(), **kw):
        p = group.add_parser(name, parents=[common, *parents], **kw)
        p.set_defaults(func=func)
        return p

    hg = groups.add_parser("hg").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = add(hg, "construct", cmd_hg_construct)
    p.add_argument("kind", choices=["star", "berge_free"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p = add(hg, "find-tight", cmd_hg_find_tight)
    p.add_argument("file")
    p.add_argument("--max-length", type=int)
    add(hg, "find-berge", cmd_hg_find_berge).add_argument("file")
    add(hg, "find-loose", cmd_hg_find_loose).add_argument("file")
    p = add(hg, "partition", cmd_hg_partition)
    p.add_argument("file")
    p.add_argument("--transversal-output")

    lg = groups.add_parser("lg").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    add(lg, "build", cmd_lg_build, [lg_inputs])
    add(lg, "density", cmd_lg_density, [lg_inputs])
    add(lg, "mindeg", cmd_lg_mindeg, [lg_inputs])
    add(lg, "to-hg", cmd_lg_to_hg, [lg_inputs])

    xp = groups.add_parser("xp").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = add(xp, "check", cmd_xp_check, [lg_inputs])
    p.add_argument("--lambda", dest="lam", type=_fraction, required=True)
    p.add_argument("--mode", choices=["auto", "exhaustive", "sampled"], default="auto")
    p.add_argument("--probes", type=int, default=2000)
    p = add(xp, "extract", cmd_xp_extract, [lg_inputs])
    p.add_argument("--lambda", dest="lam", type=_fraction)
    p.add_argument("--mode", choices=["auto", "exhaustive", "sampled"], default="auto")
    p.add_argument("--probes", type=int, default=2000)
    p = add(xp, "remove-coords", cmd_xp_remove, [lg_inputs])
    p.add_argument("--coords", required=True, help="comma-separated labels such as 1:0,2:3")

    sg = groups.add_parser("sigma").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = add(sg, "neighbour", cmd_sigma_neighbour, [lg_inputs, sig])
    p.add_argument("--x", type=_tuple, required=True)
    p.add_argument("--y", type=_tuple, required=True)
    p = add(sg, "reach", cmd_sigma_reach, [lg_inputs, sig])
    p.add_argument("--x", type=_tuple, required=True)
    p.add_argument("--max-order", type=int)
    for name, func in (("robust-reach", cmd_sigma_robust), ("find-cycle", cmd_sigma_find_cycle)):
        p = add(sg, name, func, [lg_inputs, sig])
        if name == "robust-reach":
            p.add_argument("--x", type=_tuple, required=True)
        p.add_argument("--max-order", "--ell", dest="max_order", type=int)
        p.add_argument("--t", type=int, default=1)
        p.add_argument("--lambda", dest="lam", type=_fraction)
        p.add_argument("--epsilon", type=_fraction)

    ex = groups.add_parser("ex").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = add(ex, "brute", cmd_ex_brute)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--strategy", choices=["auto", "exhaustive", "backtracking"], default="auto")
    p = add(ex, "params", cmd_ex_params)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=_fraction, default=Fraction(0))
    p.add_argument("--lambda", dest="lam", type=_fraction)
    p.add_argument("--epsilon", type=_fraction)
    p.add_argument("--ell", type=_fraction)
    p.add_argument("--t", type=int)

    pl = groups.add_parser("pipeline").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = add(pl, "run", cmd_pipeline_run, [sig])
    p.add_argument("file")
    p.add_argument("--attempts", type=int, default=PipelineConfig.max_attempts)
    return parser


def _text(report: SearchReport, code: int) -> str:
    verdict = {OK: "answer", NONE: "none (conclusive)", INCONCLUSIVE: "inconclusive"}[code]
    lines = [f"{report.mode}: {verdict}"]
    if report.witness is not None:
        lines.append(f"witness: {json.dumps(report.witness, sort_keys=True)}")
    for key in sorted(report.certificates):
        value = report.certificates[key]
        if isinstance(value, str) and "\n" in value:
            lines.append(f"{key}:")
            lines.append(value.rstrip("\n"))
        else:
            lines.append(f"{key}: {json.dumps(value, sort_keys=True)}")
    for key in sorted(report.counters):
        lines.append(f"{key}: {report.counters[key]}")
    return "\n".join(lines) + "\n"


def run_command(argv: Sequence[str]) -> tuple[int, str, str]:
    """Run one invocation; returns (exit code, stdout text, stderr text)."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        report, code = args.func(args)
    except UsageError as exc:
        return USAGE, "", f"{exc}\n"
    except (HypergraphFormatError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        return USAGE, "", f"error: {msg}\n"
    except SystemExit as exc:  # --help
        return (OK if not exc.code else USAGE), "", ""
    text = report.to_json() if args.json else _text(report, code)
    return code, text, ""


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, out, err = run_command(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
