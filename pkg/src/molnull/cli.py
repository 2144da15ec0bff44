"""``molnull`` command line.

Exit status: 0 on success, 1 when error diagnostics were produced, 2 on
usage or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from molnull import checker, corpus, dynamic, reporting, static
from molnull.ir import MolError, parse_files, print_program

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_bytes(text.encode("utf-8"))
    else:
        sys.stdout.write(text)


def _load(paths: Sequence[str]):
    for p in paths:
        if not Path(p).is_file():
            raise _UsageError(f"cannot read {p}")
    return parse_files(paths)


def cmd_parse(args) -> int:
    program = _load(args.files)
    _emit(print_program(program), args.out)
    return EXIT_OK


def cmd_analyze_static(args) -> int:
    program = _load(args.files)
    result = static.fixpoint_analyze(program, args.loop_bound, args.max_paths)
    _emit(result.to_text() if args.format == "text" else result.to_csv(), args.out)
    for key in sorted(result.path_budget_exceeded, key=str):
        print(f"warning PathBudget {key}:0:0 path budget exceeded, coarse summary used", file=sys.stderr)
    return EXIT_OK


def cmd_run_dynamic(args) -> int:
    program = _load(args.files)
    entries = [args.entry] if args.entry else list(program.entry_points)
    if not entries:
        raise _UsageError("no --entry given and the program declares no entry points")
    for e in entries:
        program.index.resolve_entry(e)
    registry = checker.Registry.build(program)
    traces = []
    for k in range(args.runs):
        entry = entries[k % len(entries)]
        traces.append(dynamic.run_program(program, entry, args.seed + k, args.step_limit, registry))
    if args.trace_out:
        Path(args.trace_out).write_bytes("".join(t.serialize() for t in traces).encode("utf-8"))
    profile = dynamic.aggregate_trace(traces, program)
    _emit(profile.to_csv(), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    program = _load(args.files)
    diags = checker.check_program(program, args.mode)
    for d in diags:
        print(d)
    return EXIT_DIAGNOSTICS if checker.errors_only(diags) else EXIT_OK


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def cmd_report(args) -> int:
    if bool(args.static) == bool(args.dynamic):
        raise _UsageError("give exactly one of --static or --dynamic")
    sections = []
    if args.static:
        if args.table == "dynamic":
            raise _UsageError("--table dynamic needs --dynamic input")
        per_method = {
            name: [c for _, c in sorted(cls.items())]
            for name, cls in static.read_static_csv(_read(args.static)).items()
        }
        if args.table == "projects":
            sections.append(reporting.project_stats(reporting.static_project_values(per_method)))
        else:
            floor = static.DEFINITELY if args.table == "definite" else static.POSSIBLY
            level = reporting.Level.DEFINITE_ONLY if args.table == "definite" else reporting.Level.DEFINITE_OR_POSSIBLE
            sections.append(reporting.crosstab_from_classes(per_method, floor, level))
    else:
        try:
            profile = dynamic.DynamicProfile.from_csv(_read(args.dynamic))
        except (KeyError, ValueError) as exc:
            raise _UsageError(f"malformed profile {args.dynamic}: {exc}") from None
        if args.table == "projects":
            sections.append(reporting.project_stats(reporting.dynamic_project_values(profile)))
        elif args.table == "dynamic":
            sections.append((reporting.build_dynamic_crosstab(profile), "dynamic"))
        else:
            raise _UsageError(f"--table {args.table} needs --static input")
    _emit(reporting.emit_report(sections, args.format).decode("utf-8"), args.out)
    return EXIT_OK


def cmd_gen_corpus(args) -> int:
    spec = corpus.CorpusSpec(
        method_count=args.methods,
        max_ref_params=args.max_ref_params,
        loop_density=args.loop_density,
        seed=args.seed,
    )
    program, truth = corpus.generate_corpus(spec)
    for path in corpus.write_corpus(args.out, program, truth, spec):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="molnull", description="Nullability analysis for MOL programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse, validate and pretty-print")
    p.add_argument("files", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("analyze-static", help="classify every reference parameter")
    p.add_argument("files", nargs="+")
    p.add_argument("--loop-bound", type=int, default=static.DEFAULT_LOOP_BOUND)
    p.add_argument("--max-paths", type=int, default=static.DEFAULT_MAX_PATHS)
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze_static)

    p = sub.add_parser("run-dynamic", help="execute entries and aggregate a null profile")
    p.add_argument("files", nargs="+")
    p.add_argument("--entry", help="entry method; default cycles through the declared entries")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--step-limit", type=int, default=dynamic.DEFAULT_STEP_LIMIT)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--trace-out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run_dynamic)

    p = sub.add_parser("check", help="check call safety")
    p.add_argument("files", nargs="+")
    p.add_argument("--mode", choices=[m.value for m in checker.Mode], required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("report", help="render tables from analysis output")
    p.add_argument("--static")
    p.add_argument("--dynamic")
    p.add_argument("--table", choices=("definite", "possible", "dynamic", "projects"), required=True)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gen-corpus", help="generate a synthetic corpus with ground truth")
    p.add_argument("--methods", type=int, default=2000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-ref-params", type=int, default=7)
    p.add_argument("--loop-density", type=float, default=0.1)
    p.set_defaults(func=cmd_gen_corpus)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MolError as err:
        for d in err.diagnostics:
            print(d, file=sys.stderr)
        return EXIT_DIAGNOSTICS
    except (_UsageError, ValueError) as exc:
        print(f"molnull: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"molnull: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
