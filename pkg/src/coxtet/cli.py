"""Command-line front end.

Subcommands: realize, search, verify, poly, lattice. Every command prints
aligned text by default; `--format records` prints JSON lines instead, the
first line being the run manifest. Exit codes: 0 ok, 2 parse error,
3 not realizable, 4 mismatch or failed invariant, 5 development blow-up.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter

import numpy as np

from . import __version__, kernels
from .combi import (
    SMALLNESS_SCOPE,
    GraphParseError,
    NotValidated,
    collapse_truncations,
    from_json,
    is_small,
    turnover_circuits,
    validate,
)
from .develop import BlowUp, develop, edge_lines_disjoint, face_vs_opposite_truncation
from .develop import truncation_planes_disjoint
from .lattice import direct_inclusions, is_maximal, is_subgroup, parse_type
from .mink import EPS
from .suites import CONJECTURAL_SPECS, ITEM_SPECS, negative_specs, non_finite_specs
from .tetgen import (
    VERTICES,
    Degenerate,
    IllConditioned,
    NotRealizable,
    SpecParseError,
    exists_hyperbolic,
    gram_from_spec,
    nondegenerate,
    parse_spec,
    realize,
)
from .turnover import SearchConfig, TurnoverWitness, Verdict, classify_spec

SCHEMA = "coxtet.records/1"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOT_REALIZABLE = 3
EXIT_MISMATCH = 4
EXIT_BLOWUP = 5


def _num(x) -> float:
    """Float rounded to 9 significant digits, for stable records.

    Magnitudes below 1e-12 are rounding noise and are written as 0.
    """
    x = float(x)
    if abs(x) < 1e-12:
        return 0.0
    return float(f"{x:.9g}") + 0.0


def _vec(v) -> list[float]:
    return [_num(x) for x in np.asarray(v, dtype=float)]


def _type(t) -> list[int]:
    return [int(x) for x in t]


class Output:
    """Collects records or text lines; records are written after the manifest."""

    def __init__(self, args, command: str, inputs: dict):
        self.fmt = getattr(args, "format", "text")
        self.command = command
        self.inputs = inputs
        self.config = {}
        self.records: list[dict] = []
        self.lines: list[str] = []
        self.t0 = time.perf_counter()
        self.err = sys.stderr

    def text(self, line: str = "") -> None:
        self.lines.append(line)

    def record(self, rec: dict) -> None:
        self.records.append(rec)

    def manifest(self) -> dict:
        return {
            "record": "manifest",
            "schema": SCHEMA,
            "command": self.command,
            "inputs": self.inputs,
            "config": self.config,
            "version": __version__,
            "backend": kernels.BACKEND,
            "wall_time": round(time.perf_counter() - self.t0, 3),
        }

    def flush(self, stream) -> None:
        if self.fmt == "records":
            stream.write(json.dumps(self.manifest(), sort_keys=True) + "\n")
            for r in self.records:
                stream.write(json.dumps(r, sort_keys=True) + "\n")
        else:
            for line in self.lines:
                stream.write(line + "\n")


# ---------------------------------------------------------------------------
# record builders


def witness_record(spec, w: TurnoverWitness) -> dict:
    return {
        "record": "witness",
        "spec": str(spec),
        "type": _type(w.type),
        "angles": list(w.angles),
        "face": int(w.face),
        "pi_f": _vec(w.pi_f.normal),
        "pi_1": _vec(w.pi_1.normal),
        "pi_2": _vec(w.pi_2.normal),
        "invariant_plane": _vec(w.invariant_plane.normal),
        "e1": {"endpoints": list(w.e1.endpoints), "edge": w.e1.edge, "label": int(w.e1.label), "word": list(w.words["e1"])},
        "e2": {"endpoints": list(w.e2.endpoints), "edge": w.e2.edge, "label": int(w.e2.label), "word": list(w.words["e2"])},
        "pi_1_word": {"word": list(w.words["pi_1"][0]), "face": w.words["pi_1"][1]},
        "pi_2_word": {"word": list(w.words["pi_2"][0]), "face": w.words["pi_2"][1]},
        "oblique_crossings": int(w.oblique_crossings),
        "perpendicular_crossings": int(w.perpendicular_crossings),
        "maximal": bool(w.maximal),
        "supergroups": [_type(t) for t in w.supergroups],
    }


def report_record(rep) -> dict:
    exp = rep.expected
    return {
        "record": "classification",
        "spec": str(rep.spec),
        "expected": {
            "kind": exp.kind.value,
            "items": list(exp.items),
            "types": [_type(t) for t in sorted(exp.types)],
        },
        "verdict": rep.verdict.value,
        "depth": rep.depth,
        "found_types": [[_type(t), n] for t, n in sorted(Counter(rep.found_types).items())],
        "maximal_types": [_type(t) for t in sorted(rep.maximal_types)],
        "missing": [_type(t) for t in sorted(rep.missing)],
        "stats": dict(vars(rep.stats)),
    }


def _fmt_types(types) -> str:
    return " ".join(str(t) for t in types) or "-"


def _found_summary(rep) -> str:
    c = Counter(rep.found_types)
    return " ".join(f"{t}x{n}" for t, n in sorted(c.items())) or "none"


# ---------------------------------------------------------------------------
# commands


def _config(args) -> SearchConfig:
    return SearchConfig(depth=args.depth, eps=args.eps, cmax=args.cmax, tile_cap=args.tile_cap, threads=args.threads)


def _config_dict(cfg: SearchConfig) -> dict:
    return {"depth": cfg.depth, "eps": cfg.eps, "cmax": cfg.cmax, "tile_cap": cfg.tile_cap, "threads": cfg.threads}


def cmd_realize(args, out: Output) -> int:
    spec = parse_spec(args.spec)
    out.inputs = {"spec": str(spec)}
    g = gram_from_spec(spec)
    reason = realization_obstruction(g)
    exists = reason is None
    rec = {"record": "realization", "spec": str(spec), "gram": [_vec(r) for r in g], "exists": exists}
    out.text(f"spec      T[{spec}]")
    out.text("gram")
    for row in g:
        out.text("  " + "  ".join(f"{x:+.9f}" for x in row))
    if not exists:
        out.text(f"exists    no ({reason})")
        rec["reason"] = reason
        out.record(rec)
        return EXIT_NOT_REALIZABLE
    tet = realize(spec)
    rec["vertices"] = {v.name: v.cls.value for v in tet.vertices}
    rec["normals"] = [_vec(n) for n in tet.normals]
    rec["truncation_planes"] = {
        v.name: _vec(v.truncation_normal) for v in tet.vertices if v.truncation_normal is not None
    }
    rec["interior"] = _vec(tet.interior)
    rec["residual"] = _num(tet.residual())
    out.record(rec)
    out.text("exists    yes")
    out.text("vertices  " + "  ".join(f"{v.name}:{v.cls.value}" for v in tet.vertices))
    out.text("normals (face opposite each vertex)")
    for name, n in zip(VERTICES, tet.normals):
        out.text(f"  F_{name}  " + "  ".join(f"{x:+.9g}" for x in n))
    trunc = [v for v in tet.vertices if v.truncation_normal is not None]
    out.text("truncation planes" + ("" if trunc else "  none"))
    for v in trunc:
        out.text(f"  {v.name}    " + "  ".join(f"{x:+.9g}" for x in v.truncation_normal))
    out.text(f"residual  {tet.residual():.3g}")
    return EXIT_OK


def realization_obstruction(g) -> str | None:
    """Why g is not the Gram matrix of a generalized tetrahedron, or None."""
    try:
        if not exists_hyperbolic(g):
            return "Gram matrix is not of signature (3,1)"
    except Degenerate:
        return "Gram matrix is singular"
    if not nondegenerate(g):
        return "a truncation plane coincides with a face"
    return None


def _search_one(spec, cfg: SearchConfig, out: Output, witnesses: bool = True):
    rep = classify_spec(spec, cfg)
    if witnesses:
        for w in rep.found:
            out.record(witness_record(spec, w))
    out.record(report_record(rep))
    return rep


def cmd_search(args, out: Output) -> int:
    spec = parse_spec(args.spec)
    cfg = _config(args)
    out.inputs = {"spec": str(spec)}
    out.config = _config_dict(cfg)
    rep = _search_one(spec, cfg, out)
    out.text(f"spec      T[{spec}]")
    out.text(f"depth     {cfg.depth}   tiles {rep.stats.tiles}   walls {rep.stats.walls}   edges {rep.stats.edges}")
    out.text(f"expected  {rep.expected}")
    out.text(f"found     {len(rep.found)} witnesses")
    if rep.found:
        out.text(f"  {'type':<12} {'angles':<12} {'face':>4} {'max':>4} {'obl':>4} {'perp':>4}  invariant plane")
        for w in rep.found:
            ang = ",".join(str(a) for a in w.angles)
            plane = " ".join(f"{x:+.6f}" for x in w.invariant_plane.normal)
            out.text(
                f"  {str(w.type):<12} {ang:<12} {w.face:>4} {'yes' if w.maximal else 'no':>4} "
                f"{w.oblique_crossings:>4} {w.perpendicular_crossings:>4}  {plane}"
            )
    out.text(f"types     {_found_summary(rep)}")
    out.text(f"maximal   {_fmt_types(sorted(rep.maximal_types))}")
    if rep.missing:
        out.text(f"missing   {_fmt_types(sorted(rep.missing))}")
    out.text(f"verdict   {rep.verdict.value}")
    if rep.verdict is Verdict.MISMATCH:
        return EXIT_MISMATCH
    if rep.verdict is Verdict.INCONCLUSIVE:
        out.err.write(f"warning: result is depth-limited ({rep.expected.kind.value}); nothing is proved\n")
    return EXIT_OK


def _verify_specs(args, out: Output, specs, check) -> int:
    cfg = _config(args)
    out.config = _config_dict(cfg)
    failed = 0
    out.text(f"{'spec':<16} {'expected':<40} {'verdict':<28} found")
    for spec, extra in specs:
        t0 = time.perf_counter()
        rep = _search_one(spec, cfg, out, witnesses=False)
        ok = check(rep, extra)
        failed += not ok
        dt = time.perf_counter() - t0
        out.text(f"{str(spec):<16} {str(rep.expected):<40} {rep.verdict.value:<28} {_found_summary(rep)}  [{dt:.2f}s]")
    out.record({"record": "suite", "suite": args.suite, "specs": len(specs), "failed": failed})
    out.text(f"{len(specs)} specs, {failed} failed")
    return EXIT_MISMATCH if failed else EXIT_OK


def _check_item(rep, predicted) -> bool:
    return rep.verdict is Verdict.MATCH and rep.maximal_types == {predicted}


def _check_conjectural(rep, claimed) -> bool:
    return rep.verdict is Verdict.MATCH and set(claimed) <= rep.present_types


def _check_negative(rep, _) -> bool:
    return not rep.found


def cmd_verify(args, out: Output) -> int:
    out.inputs = {"suite": args.suite}
    if args.suite == "items":
        specs = [(parse_spec(s), t) for s, t in ITEM_SPECS]
        return _verify_specs(args, out, specs, _check_item)
    if args.suite == "conjectural":
        specs = [(parse_spec(s), ts) for s, ts in CONJECTURAL_SPECS]
        return _verify_specs(args, out, specs, _check_conjectural)
    if args.suite == "negative":
        specs = [(s, None) for s in negative_specs()]
        return _verify_specs(args, out, specs, _check_negative)
    return _verify_invariants(args, out)


def _verify_invariants(args, out: Output) -> int:
    depth = args.invariant_depth
    out.config = {"depth": depth, "threads": args.threads}
    checks = (
        ("truncations-disjoint", truncation_planes_disjoint),
        ("edges-disjoint", edge_lines_disjoint),
        ("face-opposite-truncation", face_vs_opposite_truncation),
    )
    totals = Counter()
    specs = non_finite_specs()
    for spec in specs:
        st = develop(realize(spec), depth)
        for name, fn in checks:
            viol = fn(st)
            totals[name] += len(viol)
            for v in viol:
                out.record({"record": "violation", "spec": str(spec), "rule": v.rule, "where": list(v.where), "detail": v.detail})
                out.text(f"{str(spec):<16} {v.rule:<26} {v.where} {v.detail}")
    for name, _ in checks:
        out.text(f"{name:<26} {totals[name]} violations over {len(specs)} specs at depth {depth}")
    failed = sum(totals.values())
    out.record({"record": "suite", "suite": "invariants", "specs": len(specs), "failed": failed, "violations": dict(totals)})
    return EXIT_MISMATCH if failed else EXIT_OK


def cmd_poly(args, out: Output) -> int:
    try:
        with open(args.path, encoding="utf-8") as fh:
            g = from_json(fh.read())
    except OSError as exc:
        raise GraphParseError(str(exc)) from exc
    out.inputs = {"path": os.path.basename(args.path), "action": args.action}
    out.text(f"polyhedron  V={g.n_vertices} E={g.n_edges} F={g.n_faces}")
    if args.action == "validate":
        errs = validate(g)
        for e in errs:
            out.record({"record": "violation", "rule": e.rule, "where": e.where, "detail": e.detail})
            out.text(f"  {e}")
        out.record({"record": "validation", "valid": not errs, "violations": len(errs)})
        out.text("valid" if not errs else f"invalid ({len(errs)} violations)")
        return EXIT_OK if not errs else EXIT_MISMATCH
    if args.action == "circuits":
        try:
            rep = turnover_circuits(g)
        except NotValidated as exc:
            out.text(f"invalid: {exc}")
            out.record({"record": "validation", "valid": False, "detail": str(exc)})
            return EXIT_MISMATCH
        for c in rep:
            out.record(
                {
                    "record": "circuit",
                    "faces": list(c.faces),
                    "edges": list(c.edges),
                    "labels": list(c.labels),
                    "kind": c.kind.value,
                    "vertex_parallel": c.vertex_parallel,
                }
            )
            flag = "vertex link" if c.vertex_parallel else "essential" if c.kind.value == "Hyperbolic" else ""
            out.text(f"  faces {c.faces}  edges {c.edges}  labels {c.labels}  {c.kind.value:<10} {flag}")
        out.text(f"{len(rep)} circuits, {len(rep.essential)} embedded hyperbolic turnovers")
        return EXIT_OK
    verdict = is_small(g)
    rec = {"record": "smallness", "verdict": verdict.value, "scope": SMALLNESS_SCOPE}
    if verdict.value != "Invalid":
        h = collapse_truncations(g)
        rec["collapsed"] = {"vertices": h.n_vertices, "edges": h.n_edges, "faces": h.n_faces}
        out.text(f"collapsed   V={h.n_vertices} E={h.n_edges} F={h.n_faces}")
    out.record(rec)
    out.text(f"verdict     {verdict.value}  ({SMALLNESS_SCOPE})")
    return EXIT_OK


def cmd_lattice(args, out: Output) -> int:
    words = " ".join(args.query).replace("(", " ").replace(")", " ").split()
    out.inputs = {"query": " ".join(words)}
    if len(words) == 4 and words[0] == "sub" and words[2] == "super":
        sub, sup = parse_type(words[1]), parse_type(words[3])
        chain = is_subgroup(sub, sup)
        rec = {"record": "inclusion", "sub": _type(sub), "super": _type(sup), "contained": chain is not None}
        if chain is None:
            out.text(f"{sub} is not a table subgroup of {sup}")
        else:
            normal = chain.normal
            rec.update(
                index=chain.index,
                normal=normal,
                chain=[[_type(s.sup), _type(s.sub), s.index] for s in chain.steps],
            )
            ntext = {True: "normal", False: "non-normal", None: "normality unknown"}[normal]
            out.text(f"{sub} < {sup}  index {chain.index}, {ntext}")
            for s in chain.steps:
                out.text(f"  {s.sup} > {s.sub}  index {s.index}  {'normal' if s.normal else 'non-normal'}")
        out.record(rec)
        return EXIT_OK
    if len(words) == 2 and words[0] == "maximal":
        t = parse_type(words[1])
        m = is_maximal(t)
        out.record({"record": "maximal", "type": _type(t), "maximal": m})
        out.text(f"{t} maximal: {'true' if m else 'false'}")
        return EXIT_OK
    if len(words) == 2 and words[0] == "supergroups":
        t = parse_type(words[1])
        incs = direct_inclusions(t)
        for inc in incs:
            out.record({"record": "inclusion", "sub": _type(t), "super": _type(inc.sup), "index": inc.index, "normal": inc.normal})
            out.text(f"{inc.sup} > {t}  index {inc.index}  {'normal' if inc.normal else 'non-normal'}")
        if not incs:
            out.text(f"{t} has no table supergroup")
        return EXIT_OK
    raise QueryError(f"cannot parse lattice query {' '.join(words)!r}; try 'sub a,b,c super x,y,z' or 'maximal a,b,c'")


class QueryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "records"), default="text", help="report format")
    fmt.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1, help="worker threads")
    cfg = SearchConfig()
    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--depth", type=int, default=cfg.depth, help="development depth (reflection word length)")
    search.add_argument("--cmax", type=int, default=cfg.cmax, help="largest angle denominator accepted")
    search.add_argument("--eps", type=float, default=EPS, help="numerical tolerance")
    search.add_argument("--tile-cap", type=int, default=cfg.tile_cap, help="abort when the development exceeds this many tiles")

    p = argparse.ArgumentParser(prog="coxtet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"coxtet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("realize", parents=[fmt], help="realize a tetrahedron from its six labels")
    r.add_argument("spec", help='labels "l,m,q;n,p,r"')
    s = sub.add_parser("search", parents=[fmt, search], help="search for immersed turnovers")
    s.add_argument("spec", help='labels "l,m,q;n,p,r"')
    v = sub.add_parser("verify", parents=[fmt, search], help="run a verification suite")
    v.add_argument("--suite", choices=("items", "conjectural", "negative", "invariants"), required=True)
    v.add_argument("--invariant-depth", type=int, default=5, help="development depth for the invariants suite")
    q = sub.add_parser("poly", parents=[fmt], help="combinatorial checks on a polyhedron file")
    q.add_argument("path")
    q.add_argument("action", choices=("validate", "circuits", "small"))
    lt = sub.add_parser("lattice", parents=[fmt], help="triangle group inclusion queries")
    lt.add_argument("query", nargs="+", help="'sub a,b,c super x,y,z' | 'maximal a,b,c' | 'supergroups a,b,c'")
    return p


COMMANDS = {
    "realize": cmd_realize,
    "search": cmd_search,
    "verify": cmd_verify,
    "poly": cmd_poly,
    "lattice": cmd_lattice,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    out = Output(args, args.command, {})
    out.err = stderr
    try:
        code = COMMANDS[args.command](args, out)
    except (SpecParseError, GraphParseError, QueryError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except ValueError as exc:
        if isinstance(exc, (NotRealizable, IllConditioned)):
            out.flush(stdout)
            stderr.write(f"error: not realizable: {exc}\n")
            return EXIT_NOT_REALIZABLE
        # remaining ValueErrors are rejected inputs (bad depth, labels, ...)
        stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except BlowUp as exc:
        out.flush(stdout)
        stderr.write(f"error: development blew up: {exc}\n")
        return EXIT_BLOWUP
    out.flush(stdout)
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
