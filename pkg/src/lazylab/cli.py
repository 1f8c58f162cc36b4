"""Command-line front end.

Commands: run, trace, diff, pairs, gen.  Exit codes: 0 success, 1 program
error, 2 usage error, 3 diff divergence.  Diagnostics go to stderr as
`file:line:col: error: message`; set LAZYLAB_COLOR=0 to disable ANSI color.
"""

import argparse
import json
import os
import sys

from .errors import LazyLabError
from .evaluator import Strategy, format_value, run_program
from .lab import (
    DivergenceReport,
    PairName,
    Verdict,
    diff_outputs,
    generate_program,
    metrics_delta,
    paired_run,
    run_with_metrics,
    trace_jsonl,
)
from .maclang import run_session
from .syntax import parse_source

_EXPECTED_PAIR_VERDICTS = {
    PairName.PROGRAM1: Verdict.EQUAL,
    PairName.PROGRAM2: Verdict.DIVERGED,
    PairName.PROGRAM2_NAME: Verdict.EQUAL,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lazylab",
        description="Run and compare call-by-need and call-by-name evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_strategy=True):
        p.add_argument("--lang", choices=["func", "macro"], required=True)
        if with_strategy:
            p.add_argument("--strategy", choices=[s.value for s in Strategy],
                           help="argument-passing strategy (func only; default: need)")
        p.add_argument("--output", choices=["text", "json"], default="text")
        p.add_argument("input", help="program file, or '-' for stdin")

    add_common(sub.add_parser("run", help="run a program and print its output"))
    add_common(sub.add_parser("trace", help="run a program and emit a JSON-lines trace"))

    diff = sub.add_parser("diff", help="run one funclang program under two strategies")
    diff.add_argument("left", choices=[s.value for s in Strategy])
    diff.add_argument("right", choices=[s.value for s in Strategy])
    diff.add_argument("--output", choices=["text", "json"], default="text")
    diff.add_argument("input", help="program file, or '-' for stdin")

    pairs = sub.add_parser("pairs", help="run the bundled paired programs")
    pairs.add_argument("--output", choices=["text", "json"], default="text")

    gen = sub.add_parser("gen", help="generate a deterministic test program")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--size", type=int, default=12)
    return parser


def _color() -> bool:
    return sys.stderr.isatty() and os.environ.get("LAZYLAB_COLOR") != "0"


def _diagnose(input_name: str, err: LazyLabError) -> None:
    line = err.line if err.line is not None else 1
    col = err.col if err.col is not None else 1
    text = f"{input_name}:{line}:{col}: error: {err.message}"
    if _color():
        text = f"\x1b[31m{text}\x1b[0m"
    print(text, file=sys.stderr)


def _usage(message: str) -> int:
    print(f"lazylab: error: {message}", file=sys.stderr)
    return 2


def _read_input(path: str) -> tuple[str, str]:
    if path == "-":
        return sys.stdin.read(), "<stdin>"
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read(), path


def _check_strategy(args) -> Strategy | None:
    if args.lang == "macro":
        if getattr(args, "strategy", None) is not None:
            raise _UsageError("--strategy is only valid with --lang func")
        return None
    return Strategy(args.strategy or "need")


class _UsageError(Exception):
    pass


def _cmd_run(args) -> int:
    strategy = _check_strategy(args)
    source, name = _read_input(args.input)
    try:
        if args.lang == "func":
            out = run_program(parse_source(source), strategy)
            lines = list(out.lines)
            result = format_value(out.result) if out.result is not None else None
            if result is not None:
                lines.append(result)
        else:
            lines = run_session(source).log_lines
            result = None
    except LazyLabError as err:
        _diagnose(name, err)
        return 1
    if args.output == "json":
        print(json.dumps({"lines": lines, "result": result}))
    else:
        for line in lines:
            print(line)
    return 0


def _cmd_trace(args) -> int:
    strategy = _check_strategy(args)
    source, name = _read_input(args.input)
    try:
        _, metrics, events = run_with_metrics(source, args.lang, strategy)
    except LazyLabError as err:
        for line in trace_jsonl(getattr(err, "partial_trace", [])):
            print(line)
        _diagnose(name, err)
        return 1
    for line in trace_jsonl(events, metrics):
        print(line)
    return 0


def _format_report(name: str | None, report: DivergenceReport) -> list[str]:
    prefix = f"{name:<14}" if name else ""
    if report.verdict is Verdict.EQUAL:
        return [f"{prefix}EQUAL"]
    index, left, right = report.first_diff_line
    left_text = "<absent>" if left is None else repr(left)
    right_text = "<absent>" if right is None else repr(right)
    return [f"{prefix}DIVERGED at line {index + 1}: {left_text} vs {right_text}"]


def _cmd_diff(args) -> int:
    source, name = _read_input(args.input)
    try:
        left_lines, left_metrics, _ = run_with_metrics(source, "func", Strategy(args.left))
        right_lines, right_metrics, _ = run_with_metrics(source, "func", Strategy(args.right))
    except LazyLabError as err:
        _diagnose(name, err)
        return 1
    report = diff_outputs(left_lines, right_lines)
    report.metrics_delta = metrics_delta(left_metrics, right_metrics)
    if args.output == "json":
        print(json.dumps(report.to_dict()))
    else:
        for line in _format_report(None, report):
            print(line)
    return 0 if report.verdict is Verdict.EQUAL else 3


def _cmd_pairs(args) -> int:
    results = []
    for pair in PairName:
        try:
            results.append((pair, paired_run(pair)))
        except LazyLabError as err:
            _diagnose(f"<pair {pair.value}>", err)
            return 1
    ok = all(report.verdict is _EXPECTED_PAIR_VERDICTS[pair]
             for pair, report in results)
    if args.output == "json":
        print(json.dumps([
            {"pair": pair.value, **report.to_dict()} for pair, report in results
        ]))
    else:
        for pair, report in results:
            for line in _format_report(pair.value, report):
                print(line)
        print("verdict pattern:", "expected" if ok else "UNEXPECTED")
    return 0 if ok else 1


def _cmd_gen(args) -> int:
    sys.stdout.write(generate_program(args.seed, args.size))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as ex:
        return int(ex.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "trace":
            return _cmd_trace(args)
        if args.command == "diff":
            return _cmd_diff(args)
        if args.command == "pairs":
            return _cmd_pairs(args)
        if args.command == "gen":
            return _cmd_gen(args)
    except _UsageError as ex:
        return _usage(str(ex))
    except OSError as ex:
        print(f"lazylab: error: {ex}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
