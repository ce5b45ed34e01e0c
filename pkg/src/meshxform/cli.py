"""Command-line entry point: ``meshxform <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import mesh as M
from .bench import TOTAL_UPDATES, BenchConfig, bench_native
from .dsl import collect_signatures, parse, pretty_print
from .errors import (
    ComparisonError,
    DeclarationError,
    DslSyntaxError,
    FormatError,
    MeshXformError,
    TransformError,
    TypeCheckError,
)
from .interp import interpret
from .transform import generate_wrappers, transform_program
from .values import diff_values, format_value, parse_value

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_TRANSFORM = 3
EXIT_RUNTIME = 4
EXIT_MISMATCH = 5
EXIT_WARNINGS = 6


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Usage(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load(path: str, lenient: bool = False):
    # transformed programs contain reserved temporaries; accept them on request
    return parse(_read(path), allow_reserved=lenient)


def cmd_transform(args) -> int:
    program = _load(args.input)
    try:
        sigs = collect_signatures(program)
    except (DeclarationError, TypeCheckError) as exc:
        raise TransformError(str(exc)) from exc
    out, report = transform_program(program, sigs)
    _write(args.output, pretty_print(out))
    if args.report:
        text = report.to_json() if args.report.endswith(".json") else report.to_text()
        _write(args.report, text)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_WARNINGS if report.warnings else EXIT_OK


def cmd_wrappers(args) -> int:
    program = _load(args.input)
    try:
        sigs = collect_signatures(program)
    except (DeclarationError, TypeCheckError) as exc:
        raise TransformError(str(exc)) from exc
    _write(args.output, pretty_print(generate_wrappers(sigs)))
    return EXIT_OK


def _input_value(spec: str, dtype):
    name, sep, source = spec.partition("=")
    if not sep or not name:
        raise _Usage(f"--in expects name=path or name=number, got {spec!r}")
    path = Path(source)
    if path.is_file():
        return name, parse_value(path.read_text(), dtype)
    try:
        return name, int(source)
    except ValueError:
        pass
    try:
        return name, dtype(float(source))
    except ValueError:
        raise _Usage(f"--in {name}: {source!r} is neither a file nor a number") from None


def cmd_run(args) -> int:
    program = _load(args.program, lenient=True)
    dtype = M.default_dtype()
    inputs = dict(_input_value(s, dtype) for s in args.inputs)
    outputs, stats = interpret(program, args.entry, inputs)
    if args.out is None:
        for name, v in outputs.items():
            sys.stdout.write(f"# {name}\n{format_value(v)}")
        sys.stdout.write("# alloc_stats\n" + json.dumps(stats.as_dict()) + "\n")
        return EXIT_OK
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, v in outputs.items():
        (out / f"{name}.txt").write_text(format_value(v))
    (out / "alloc_stats.json").write_text(json.dumps(stats.as_dict(), indent=2) + "\n")
    return EXIT_OK


def _diff_files(a: Path, b: Path) -> tuple[bool, str]:
    dtype = M.default_dtype()
    r = diff_values(parse_value(a.read_text(), dtype), parse_value(b.read_text(), dtype))
    return r.equal, r.message


def cmd_diff(args) -> int:
    a, b = Path(args.a), Path(args.b)
    for p in (a, b):
        if not p.exists():
            raise _Usage(f"no such file or directory: {p}")
    if a.is_dir() != b.is_dir():
        raise _Usage("cannot compare a file with a directory")
    if a.is_file():
        ok, msg = _diff_files(a, b)
        print(msg)
        return EXIT_OK if ok else EXIT_MISMATCH
    names_a = {p.name for p in a.glob("*.txt")}
    names_b = {p.name for p in b.glob("*.txt")}
    ok = True
    for name in sorted(names_a ^ names_b):
        print(f"{name}: only in {'first' if name in names_a else 'second'}")
        ok = False
    for name in sorted(names_a & names_b):
        same, msg = _diff_files(a / name, b / name)
        print(f"{name}: {msg}")
        ok = ok and same
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_bench(args) -> int:
    try:
        sizes = tuple(int(s) for s in args.sizes.split(","))
        cfg = BenchConfig(sizes, args.total_updates, args.reps, args.precision, args.seed)
    except ValueError as exc:
        raise _Usage(str(exc)) from None
    report = bench_native(cfg)
    sys.stdout.write(report.to_text())
    if args.json:
        _write(args.json, report.to_json())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="meshxform", description="Rewrite and run mesh kernels.")
    p.add_argument("--precision", choices=sorted(M.PRECISIONS), help="element type for meshes read or created")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("transform", help="rewrite a kernel into self-mutating form")
    t.add_argument("input")
    t.add_argument("-o", "--output")
    t.add_argument("--report", help="write the rewrite report (JSON if the name ends in .json)")
    t.set_defaults(func=cmd_transform)

    w = sub.add_parser("wrappers", help="emit pure wrappers for the declared mutating ops")
    w.add_argument("input")
    w.add_argument("-o", "--output")
    w.set_defaults(func=cmd_wrappers)

    r = sub.add_parser("run", help="interpret a procedure")
    r.add_argument("program")
    r.add_argument("--entry", required=True)
    r.add_argument("--in", dest="inputs", action="append", default=[], metavar="NAME=PATH|NUMBER")
    r.add_argument("--out", help="directory for <output>.txt files and alloc_stats.json")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("diff", help="compare two value files or output directories bit for bit")
    d.add_argument("a")
    d.add_argument("b")
    d.set_defaults(func=cmd_diff)

    b = sub.add_parser("bench", help="time native kernels F and P")
    b.add_argument("--sizes", default="8,16,32,64")
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--total-updates", type=int, default=TOTAL_UPDATES)
    b.add_argument("--seed", type=int, default=BenchConfig.seed)
    b.add_argument("--json")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bench":
            args.precision = args.precision or "single"
        if args.precision and args.command != "bench":
            M.set_precision(args.precision)
        return args.func(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DslSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TransformError as exc:
        print(f"transform error: {exc}", file=sys.stderr)
        return EXIT_TRANSFORM
    except (ComparisonError, FormatError, MeshXformError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
