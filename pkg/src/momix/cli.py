"""Command-line driver.

Subcommands: ``graph build``, ``bmp compute``, ``rouquier build``,
``delta build``, ``nabla build``, ``verify``, ``export``.

Exit codes: 0 success, 1 failed verification case, 2 validation error,
3 window stabilization failure, 4 internal invariant failure.
Logs go to stderr (MOMIX_LOG=debug for more), data to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .bmp import CLASSIFICATION, PERVERSE, bruhat_graph, build_bmp
from .coxeter import (CoxeterGroup, CoxeterSystem, geometric_realization,
                      named_system)
from .errors import (InvariantError, MomixError, NotFreeInWindow, ValidationError,
                     WindowNotStabilized)
from .jsonio import (complex_to_json, dumps, graph_from_json, graph_to_json,
                     hom_table_csv, pretty_sheaf, sheaf_from_json, sheaf_to_json,
                     stalk_character_csv)
from .recollement import costandard_complex, standard_complex
from .rouquier import LetterContext, rouquier_complex
from .scalars import Field
from .suites import SUITE_NAMES, Workspace, run_suite


def _log(msg):
    if os.environ.get("MOMIX_LOG"):
        print("[momix] %s" % msg, file=sys.stderr)


def _field_from_args(args) -> Field | None:
    if args.field:
        spec = json.loads(args.field)
        return Field.from_json(spec)
    if getattr(args, "d", None):
        return Field("quadratic", args.d)
    return None


def _group_from_args(args) -> CoxeterGroup:
    if args.matrix:
        spec = json.loads(args.matrix)
        system = CoxeterSystem(tuple(spec["gens"]),
                               tuple(tuple(r) for r in spec["m"]))
    elif args.type:
        system = named_system(args.type)
    else:
        raise ValidationError("need --type or --matrix")
    return CoxeterGroup(geometric_realization(system, _field_from_args(args)))


def _write(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _config_echo(args, extra=None):
    cfg = {"version": __version__}
    for key in ("type", "matrix", "field", "d", "top", "word", "kind",
                "normalization", "seed", "jobs", "suite"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if extra:
        cfg.update(extra)
    return cfg


def cmd_graph_build(args) -> int:
    bg = bruhat_graph(_group_from_args(args),
                      None if args.parabolic is None
                      else _group_from_args(args).system.gens.index(args.parabolic))
    _write(dumps(graph_to_json(bg.graph)), args.out)
    return 0


def cmd_bmp_compute(args) -> int:
    group = _group_from_args(args)
    bg = bruhat_graph(group)
    gr = bg.graph
    word = group.parse_word(args.top)
    top = bg.vertex_of(group.element_of_word(word))
    norm = args.normalization
    obj = build_bmp(gr, top, norm)
    obj.verify()
    _write(dumps(sheaf_to_json(obj.sheaf, norm)), args.out)
    if args.chars:
        offset = gr.d[top] if norm == PERVERSE else 0
        _write(stalk_character_csv(gr, obj.sheaf, offset), args.chars)
    _log("computed canonical sheaf at %s (%s normalization)" % (args.top, norm))
    return 0


def _letters_complex(args):
    group = _group_from_args(args)
    bg = bruhat_graph(group)
    ctx = LetterContext(bg)
    word = group.parse_word(args.word)
    return ctx, rouquier_complex(ctx, word, args.kind)


def cmd_rouquier_build(args) -> int:
    ctx, C = _letters_complex(args)
    _write(dumps(complex_to_json(C)), args.out)
    return 0


def cmd_delta_build(args) -> int:
    group = _group_from_args(args)
    bg = bruhat_graph(group)
    word = group.parse_word(args.top)
    v = bg.vertex_of(group.element_of_word(word))
    C = standard_complex(bg.graph, v)
    _write(dumps(complex_to_json(C)), args.out)
    return 0


def cmd_nabla_build(args) -> int:
    group = _group_from_args(args)
    bg = bruhat_graph(group)
    word = group.parse_word(args.top)
    v = bg.vertex_of(group.element_of_word(word))
    C = costandard_complex(bg.graph, v)
    _write(dumps(complex_to_json(C)), args.out)
    return 0


def cmd_verify(args) -> int:
    ws = Workspace()
    suites = [args.suite] if args.suite else list(SUITE_NAMES)
    types = (args.type,) if args.type else None
    report = {"config": _config_echo(args), "suites": {}}
    failed = 0
    for suite in suites:
        t0 = time.time()
        if args.jobs and args.jobs > 1:
            _log("jobs=%d requested; cases within a suite share immutable "
                 "caches, running sequentially for determinism" % args.jobs)
        cases = run_suite(ws, suite, types=types, seed=args.seed or 0)
        rows = []
        for c in cases:
            rows.append({"case": c.name, "ok": c.ok, "detail": c.detail,
                         "seconds": round(c.seconds, 3)})
            status = "pass" if c.ok else "FAIL"
            print("%-8s %-42s %6.2fs  %s" %
                  (status, c.name, c.seconds, "" if c.ok else c.detail),
                  file=sys.stderr)
            if not c.ok:
                failed += 1
        report["suites"][suite] = {"cases": rows,
                                   "seconds": round(time.time() - t0, 3)}
    if args.out:
        _write(dumps(report), args.out)
    print("%d case(s) failed" % failed if failed else "all cases passed",
          file=sys.stderr)
    return 1 if failed else 0


def cmd_export(args) -> int:
    with open(args.infile, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if "stalks" in obj:
        F = sheaf_from_json(obj)
        if args.format == "pretty":
            _write(pretty_sheaf(F), args.out)
        elif args.format == "csv":
            _write(stalk_character_csv(F.graph, F), args.out)
        else:
            raise ValidationError("unknown export format %r" % args.format)
    elif "vertices" in obj.get("graph", obj):
        if "terms" in obj:
            raise ValidationError("complex export supports only the raw JSON")
        g = graph_from_json(obj)
        _write(dumps(graph_to_json(g)), args.out)
    else:
        raise ValidationError("unrecognized artifact schema")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="momix",
                                description="exact sheaves on moment graphs")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--type", help="Coxeter type: A1, A2, B2, A3")
        sp.add_argument("--matrix", help='explicit system, e.g. '
                        '{"gens":["s","t"],"m":[[1,3],[3,1]]}')
        sp.add_argument("--field", help='{"kind":"rational"} or '
                        '{"kind":"quadratic","d":2}')
        sp.add_argument("--d", type=int, help="quadratic discriminant shortcut")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--max-degree", type=int, dest="max_degree",
                        help="override scan windows (advisory)")
        sp.add_argument("--out", default="-")

    g = sub.add_parser("graph", help="moment graph commands")
    gsub = g.add_subparsers(dest="sub", required=True)
    gb = gsub.add_parser("build")
    common(gb)
    gb.add_argument("--parabolic", help="generator name for W/W_s")
    gb.set_defaults(fn=cmd_graph_build)

    b = sub.add_parser("bmp", help="canonical sheaf commands")
    bsub = b.add_subparsers(dest="sub", required=True)
    bc = bsub.add_parser("compute")
    common(bc)
    bc.add_argument("--top", required=True)
    bc.add_argument("--normalization", default=PERVERSE,
                    choices=(PERVERSE, CLASSIFICATION))
    bc.add_argument("--chars", help="also write the stalk character CSV here")
    bc.set_defaults(fn=cmd_bmp_compute)

    r = sub.add_parser("rouquier", help="letter complex commands")
    rsub = r.add_subparsers(dest="sub", required=True)
    rb = rsub.add_parser("build")
    common(rb)
    rb.add_argument("--word", required=True, help="e.g. s,t,s")
    rb.add_argument("--kind", default="F", choices=("F", "E"))
    rb.set_defaults(fn=cmd_rouquier_build)

    d = sub.add_parser("delta", help="standard object commands")
    dsub = d.add_subparsers(dest="sub", required=True)
    db = dsub.add_parser("build")
    common(db)
    db.add_argument("--top", required=True)
    db.set_defaults(fn=cmd_delta_build)

    n = sub.add_parser("nabla", help="costandard object commands")
    nsub = n.add_subparsers(dest="sub", required=True)
    nb = nsub.add_parser("build")
    common(nb)
    nb.add_argument("--top", required=True)
    nb.set_defaults(fn=cmd_nabla_build)

    v = sub.add_parser("verify", help="run verification suites")
    common(v)
    v.add_argument("--suite", choices=SUITE_NAMES)
    v.set_defaults(fn=cmd_verify)

    e = sub.add_parser("export", help="convert artifacts")
    e.add_argument("--in", dest="infile", required=True)
    e.add_argument("--format", default="pretty", choices=("pretty", "csv"))
    e.add_argument("--out", default="-")
    e.set_defaults(fn=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (WindowNotStabilized, NotFreeInWindow) as exc:
        print("momix: window not stabilized: %s" % exc, file=sys.stderr)
        return 3
    except InvariantError as exc:
        print("momix: internal invariant failure: %s" % exc, file=sys.stderr)
        return 4
    except (ValidationError, MomixError) as exc:
        print("momix: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
