"""Command-line front end.

One subcommand per pipeline stage plus a benchmark sweep.  Human output
goes to stdout; machine output is JSON or CSV; diagnostics go to
stderr.  Exit status 0 on success, 1 on any reported failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import corpus
from .bench import bench
from .distilled import validate_distilled
from .encode import EncodeError, check_equivalence, encode_program
from .extract import ExtractError, extract_program
from .interp import (
    DEFAULT_FUEL,
    EvalError,
    FuelError,
    evaluate_expression,
    value_to_expr,
)
from .lift import lambda_lift
from .lts import LtsError, build_lts, function_lts, to_dot
from .matching import identify
from .parser import ParseError, parse_expression, parse_program
from .pretty import print_expr, print_program
from .runtime import (
    CHUNKINGS,
    MODES,
    ExecConfig,
    SkeletonError,
    run_with_stats,
)
from .templates import builtin_templates

_STAGE_ERRORS = (
    ParseError,
    EncodeError,
    ExtractError,
    LtsError,
    EvalError,
    FuelError,
    SkeletonError,
    ValueError,
)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text if text.endswith("\n") else text + "\n")


def _load(path: str):
    return lambda_lift(parse_program(_read(path)))


def _templates_named(names: Optional[str]):
    if names is None:
        return None
    wanted = [n.strip() for n in names.split(",") if n.strip()]
    byname = {t.name: t for t in builtin_templates()}
    unknown = [n for n in wanted if n not in byname]
    if unknown:
        raise ValueError(
            f"unknown skeleton template(s): {', '.join(unknown)}; "
            f"known: {', '.join(byname)}"
        )
    return tuple(byname[n] for n in wanted)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_parse(ns) -> int:
    prog = parse_program(_read(ns.file))
    _emit(print_program(prog), ns.output)
    return 0


def _cmd_validate(ns) -> int:
    report = validate_distilled(_load(ns.file))
    print(report.format())
    return 0 if report.ok else 1


def _cmd_encode(ns) -> int:
    res = encode_program(_load(ns.file))
    for note in res.notes:
        print(f"note: {note}", file=sys.stderr)
    _emit(print_program(res.program), ns.output)
    return 0


def _cmd_identify(ns) -> int:
    table = identify(_load(ns.file), _templates_named(ns.templates))
    for fname, skel in table:
        print(f"{fname} -> {skel or '-'}")
    return 0


def _cmd_lts(ns) -> int:
    prog = _load(ns.file)
    if ns.fn is not None:
        l = function_lts(prog, ns.fn)
        title = ns.fn
    else:
        l = build_lts(prog)
        title = "main"
    print(f"states: {len(l.states())}  transitions: {len(l.edges())}")
    if ns.dot is not None:
        _emit(to_dot(l, title), ns.dot)
    return 0


def _cmd_extract(ns) -> int:
    prog = _load(ns.file)
    out = extract_program(prog, _templates_named(ns.templates))
    _emit(print_program(out), ns.output)
    return 0


def _cmd_run(ns) -> int:
    prog = _load(ns.file)
    cfg = ExecConfig(
        mode=ns.mode,
        workers=ns.workers,
        chunking=ns.chunking,
        fuel=ns.fuel,
    )
    args = [
        evaluate_expression(prog, parse_expression(lit), {}, ns.fuel)
        for lit in ns.args or []
    ]
    value, stats = run_with_stats(prog, cfg, args)
    print(print_expr(value_to_expr(value)))
    if ns.stats:
        print(json.dumps(stats.to_json()), file=sys.stderr)
    return 0


def _cmd_check_equiv(ns) -> int:
    report = check_equivalence(
        _load(ns.original),
        _load(ns.candidate),
        seed=ns.seed,
        trials=ns.trials,
        size=ns.size,
        fuel=ns.fuel,
    )
    print(report.format())
    return 0 if report.ok else 1


def _csv_ints(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _cmd_bench(ns) -> int:
    entries = [p.strip() for p in ns.entries.split(",") if p.strip()]
    unknown = [e for e in entries if e not in corpus.FILES]
    if unknown:
        raise ValueError(
            f"unknown corpus entries: {', '.join(unknown)}; "
            f"known: {', '.join(corpus.corpus_names())}"
        )
    report = bench(
        entries=entries,
        sizes=_csv_ints(ns.sizes),
        workers=_csv_ints(ns.workers),
        reps=ns.reps,
        chunking=ns.chunking,
        seed=ns.seed,
        fuel=ns.fuel,
        timeout_s=ns.timeout,
    )
    if ns.json is not None:
        _emit(json.dumps(report.to_json(), indent=2), ns.json)
    if ns.csv is not None or ns.json is None:
        _emit(report.to_csv(), ns.csv)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--fuel",
        type=int,
        default=DEFAULT_FUEL,
        help="evaluation step budget (default %(default)s)",
    )
    common.add_argument(
        "--seed",
        type=int,
        default=0,
        help="seed for randomized inputs (default %(default)s)",
    )

    ap = argparse.ArgumentParser(
        prog="skelc",
        description="parallelize recursive programs via skeleton extraction",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common],
                       help="parse a program and pretty-print it")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=_cmd_parse)

    p = sub.add_parser("validate", parents=[common],
                       help="check the shape the encoder expects")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("encode", parents=[common],
                       help="rewrite recursion over a call-structure list")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(handler=_cmd_encode)

    p = sub.add_parser("identify", parents=[common],
                       help="match recursive functions against skeletons")
    p.add_argument("file")
    p.add_argument("--templates", default=None,
                   help="comma-separated skeleton names to try")
    p.set_defaults(handler=_cmd_identify)

    p = sub.add_parser("lts", parents=[common],
                       help="build the transition system of a program")
    p.add_argument("file")
    p.add_argument("--fn", default=None,
                   help="root at this definition instead of main")
    p.add_argument("--dot", default=None, metavar="OUT",
                   help="write Graphviz DOT here ('-' for stdout)")
    p.set_defaults(handler=_cmd_lts)

    p = sub.add_parser("extract", parents=[common],
                       help="rebuild a program with skeleton instances named")
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--templates", default=None,
                   help="comma-separated skeleton names to try")
    p.set_defaults(handler=_cmd_extract)

    p = sub.add_parser("run", parents=[common],
                       help="evaluate a program's main expression")
    p.add_argument("file")
    p.add_argument("--mode", choices=sorted(MODES | set(("seq", "par"))),
                   default="seq")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--chunking", choices=sorted(CHUNKINGS), default="rr")
    p.add_argument("--args", nargs="*", default=[], metavar="LITERAL",
                   help="argument expressions for main")
    p.add_argument("--stats", action="store_true",
                   help="emit run statistics as JSON on stderr")
    p.set_defaults(handler=_cmd_run)

    p = sub.add_parser("check-equiv", parents=[common],
                       help="randomized agreement test of two programs")
    p.add_argument("original")
    p.add_argument("candidate")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--size", type=int, default=6)
    p.set_defaults(handler=_cmd_check_equiv)

    p = sub.add_parser("bench", parents=[common],
                       help="time corpus variants across sizes and workers")
    p.add_argument("--entries", required=True,
                   help="comma-separated corpus entry ids")
    p.add_argument("--sizes", required=True,
                   help="comma-separated input sizes")
    p.add_argument("--workers", default="1,2,4",
                   help="comma-separated worker counts (default %(default)s)")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--chunking", choices=sorted(CHUNKINGS), default="rr")
    p.add_argument("--timeout", type=float, default=None, metavar="SECONDS",
                   help="per-cell budget, checked between repetitions")
    p.add_argument("--csv", default=None, metavar="OUT",
                   help="write CSV here ('-' for stdout, the default)")
    p.add_argument("--json", default=None, metavar="OUT",
                   help="write the full JSON report here")
    p.set_defaults(handler=_cmd_bench)

    return ap


def main(argv: Optional[list[str]] = None) -> int:
    ns = _build_parser().parse_args(argv)
    try:
        return ns.handler(ns)
    except _STAGE_ERRORS as exc:
        print(f"skelc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"skelc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
