"""Command-line front door: simulate, analyze, compare, validate.

Exit codes are frozen for scripting: 0 success, 1 validation violations
(validate only), 2 rejected input (kernel syntax, launch configuration,
malformed trace, schema mismatch), 3 simulation fault (barrier
divergence, out-of-bounds access), 4 resource cap exceeded (step limit,
memory cap).  Diagnostics go to stderr as `aiwc: <message>`.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import IO, Iterable, Iterator

from . import buffers, metrics, report, sim, trace
from .errors import (
    AiwcError,
    ConfigError,
    IncompatibleReports,
    InvalidStream,
    MalformedEvent,
    ParseError,
    SchemaError,
    SimulationError,
    StepLimitExceeded,
    TraceTooLarge,
)
from .ir import parse_kernel

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_BAD_INPUT = 2
EXIT_SIM_FAULT = 3
EXIT_CAP = 4


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def _fail(code: int, message: str) -> None:
    raise _CliFailure(code, message)


def _parse_size(text: str, flag: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) == 1:
        parts = [parts[0], "1", "1"]
    if len(parts) != 3:
        _fail(EXIT_BAD_INPUT, f"{flag} expects X or X,Y,Z")
    try:
        size = tuple(int(p) for p in parts)
    except ValueError:
        _fail(EXIT_BAD_INPUT, f"{flag} components must be integers")
    if any(x < 1 for x in size):
        _fail(EXIT_BAD_INPUT, f"{flag} components must be positive")
    return size  # type: ignore[return-value]


def _write_output(data: bytes, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(path).write_bytes(data)


def _report_bytes(acc: metrics.KernelAccumulator, fmt: str) -> bytes:
    rep = metrics.finalize(acc)
    return report.emit_report(rep, report.derive(rep), format=fmt)


def _writing_events(events: Iterable[trace.TraceEvent], fp: IO[str]) -> Iterator[trace.TraceEvent]:
    for event in events:
        fp.write(trace.encode_event(event))
        fp.write("\n")
        yield event


def cmd_simulate(args: argparse.Namespace) -> int:
    if not args.emit_trace and not args.analyze:
        _fail(EXIT_BAD_INPUT, "nothing to do: pass --emit-trace and/or --analyze")
    source = Path(args.kernel).read_text(encoding="utf-8")
    try:
        program = parse_kernel(source)
    except ParseError as exc:
        _fail(EXIT_BAD_INPUT, f"{args.kernel}: {exc}")

    global_size = _parse_size(args.global_size, "--global")
    local_size = _parse_size(args.local_size, "--local")
    volume = global_size[0] * global_size[1] * global_size[2]
    buf_values: dict[str, list[int]] = {}
    for item in args.buf or []:
        name, sep, spec = item.partition("=")
        if not sep or not name:
            _fail(EXIT_BAD_INPUT, f"--buf expects NAME=SPEC, got {item!r}")
        try:
            buf_values[name] = buffers.make_buffer(spec, volume, args.seed)
        except (buffers.BufferSpecError, ValueError, OSError) as exc:
            _fail(EXIT_BAD_INPUT, f"--buf {name}: {exc}")
    cfg = sim.NDRangeConfig(global_size, local_size, buf_values)

    try:
        events = sim.simulate_events(
            program, cfg, step_limit=args.step_limit, invocation=args.invocation
        )
        if args.emit_trace and not args.analyze:
            with open(args.emit_trace, "w", encoding="utf-8", newline="\n") as fp:
                trace.write_trace(events, fp)
            return EXIT_OK
        if args.emit_trace:
            with open(args.emit_trace, "w", encoding="utf-8", newline="\n") as fp:
                acc = metrics.consume(_writing_events(events, fp))
        else:
            acc = metrics.consume(events)
    except ConfigError as exc:
        _fail(EXIT_BAD_INPUT, f"{args.kernel}: {exc}")
    except (StepLimitExceeded, TraceTooLarge) as exc:
        _fail(EXIT_CAP, f"{args.kernel}: {exc}")
    except SimulationError as exc:
        _fail(EXIT_SIM_FAULT, f"{args.kernel}: {exc}")

    _write_output(_report_bytes(acc, args.format), args.output)
    return EXIT_OK


def _consume_file(path: str) -> metrics.KernelAccumulator:
    last_line = 0

    def tracked(fp) -> Iterator[trace.TraceEvent]:
        nonlocal last_line
        for line_no, raw in enumerate(fp, start=1):
            line = raw.rstrip("\n")
            if line.startswith("#"):
                continue
            last_line = line_no
            if not line.strip():
                raise MalformedEvent("blank line", line_no)
            yield trace.decode_event(line, line_no)

    try:
        with open(path, "r", encoding="utf-8") as fp:
            return metrics.consume(tracked(fp))
    except MalformedEvent as exc:
        _fail(EXIT_BAD_INPUT, f"{path}: {exc}")
    except InvalidStream as exc:
        _fail(EXIT_BAD_INPUT, f"{path}: line {last_line}: {exc}")
    except TraceTooLarge as exc:
        _fail(EXIT_CAP, f"{path}: {exc}")


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.output and not args.merge and len(args.traces) > 1:
        _fail(EXIT_BAD_INPUT, "-o with multiple traces requires --merge")
    accs = [_consume_file(path) for path in args.traces]
    if args.merge:
        try:
            merged = metrics.merge_accumulators(accs, allow_name_mismatch=args.allow_name_mismatch)
        except IncompatibleReports as exc:
            _fail(EXIT_BAD_INPUT, str(exc))
        _write_output(_report_bytes(merged, args.format), args.output)
        return EXIT_OK
    for path, acc in zip(args.traces, accs):
        out = args.output
        if out is None and len(args.traces) > 1:
            out = str(Path(path).with_suffix(".json" if args.format == "json" else ".csv"))
        _write_output(_report_bytes(acc, args.format), out)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    entries = []
    seen: dict[str, int] = {}
    for path in args.reports:
        try:
            with open(path, "r", encoding="utf-8") as fp:
                rep = report.load_report(fp)
        except SchemaError as exc:
            _fail(EXIT_BAD_INPUT, f"{path}: {exc}")
        stem = Path(path).stem
        seen[stem] = seen.get(stem, 0) + 1
        kernel_id = stem if seen[stem] == 1 else f"{stem}#{seen[stem]}"
        entries.append((kernel_id, rep, report.derive(rep)))
    table = report.normalize_suite(entries)
    _write_output(table.to_json(), args.output)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        with open(args.trace, "r", encoding="utf-8") as fp:
            events = trace.read_trace(fp)
    except MalformedEvent as exc:
        _fail(EXIT_BAD_INPUT, f"{args.trace}: {exc}")
    result = trace.validate_stream(events)
    for v in result.violations:
        print(f"{v.event_index}\t{v.rule}\t{v.detail}")
    if result.ok:
        print(f"{args.trace}: ok ({len(events)} events)")
        return EXIT_OK
    return EXIT_VIOLATIONS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aiwc",
        description="Architecture-independent workload characterization for parallel kernels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a kernel and emit its trace and/or report")
    p_sim.add_argument("kernel", help="kernel source file (.aiwck)")
    p_sim.add_argument("--global", dest="global_size", default="1,1,1", metavar="X,Y,Z")
    p_sim.add_argument("--local", dest="local_size", default="1,1,1", metavar="X,Y,Z")
    p_sim.add_argument(
        "--buf",
        action="append",
        metavar="NAME=SPEC",
        help="buffer initializer: zeros | iota | const:V | bernoulli:P[:seed=S] | file:PATH "
        "(append :len=N to override the default length of one element per work-item)",
    )
    p_sim.add_argument("--seed", type=int, default=0, help="seed for buffer generators")
    p_sim.add_argument("--invocation", type=int, default=0)
    p_sim.add_argument("--step-limit", type=int, default=sim.DEFAULT_STEP_LIMIT)
    p_sim.add_argument("--emit-trace", metavar="PATH", help="write the trace to PATH")
    p_sim.add_argument("--analyze", action="store_true", help="compute the metric report in-process")
    p_sim.add_argument("--format", choices=("json", "csv"), default="json")
    p_sim.add_argument("-o", "--output", help="report output path (default stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="compute metric reports from trace files")
    p_an.add_argument("traces", nargs="+", help="trace files (.aiwctrace)")
    p_an.add_argument("--merge", action="store_true", help="merge all traces into one report")
    p_an.add_argument(
        "--allow-name-mismatch",
        action="store_true",
        help="permit --merge across different kernel names (application rollup)",
    )
    p_an.add_argument("--format", choices=("json", "csv"), default="json")
    p_an.add_argument(
        "-o", "--output",
        help="output path (single trace or --merge; default stdout for one output, "
        "<trace>.json next to each input otherwise)",
    )
    p_an.set_defaults(func=cmd_analyze)

    p_cmp = sub.add_parser("compare", help="normalize reports into a comparison table")
    p_cmp.add_argument("reports", nargs="+", help="report JSON files")
    p_cmp.add_argument("-o", "--output", help="table output path (default stdout)")
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="check a trace against the stream invariants")
    p_val.add_argument("trace", help="trace file (.aiwctrace)")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as exc:
        print(f"aiwc: {exc.message}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"aiwc: {exc.filename}: no such file", file=sys.stderr)
        return EXIT_BAD_INPUT
    except AiwcError as exc:
        print(f"aiwc: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
