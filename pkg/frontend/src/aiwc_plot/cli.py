"""Command-line entry: `aiwc-plot kiviat` and `aiwc-plot lmae`.

Reads only the published JSON files (`-` for stdin), writes SVG (default,
byte-reproducible) or PNG.  Exit codes: 0 success, 2 schema or usage
error with the offending field path on stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import PlotSpec, group_overlays, render_kiviat, render_lmae, save_figure
from .schema import SchemaError, load_kiviat, load_lmae_profiles

EXIT_OK = 0
EXIT_BAD_INPUT = 2


def _spec_from_args(args, inputs) -> PlotSpec:
    size = tuple(float(x) for x in args.size.split(","))
    if len(size) != 2:
        raise SchemaError("--size", "expects W,H in inches")
    return PlotSpec(
        inputs=inputs,
        output=args.output,
        out_dir=getattr(args, "out_dir", None),
        image_format=args.format,
        split=getattr(args, "split", "@"),
        size=size,
        dpi=args.dpi,
    )


def cmd_kiviat(args) -> int:
    table = load_kiviat(args.table)
    spec = _spec_from_args(args, [args.table])
    figures = group_overlays(table, spec.split)
    if spec.out_dir is None:
        if len(figures) != 1:
            print(
                f"aiwc-plot: table splits into {len(figures)} figures; use --out-dir",
                file=sys.stderr,
            )
            return EXIT_BAD_INPUT
        key, entries = figures[0]
        out = spec.output or f"{key}.{spec.image_format}"
        save_figure(render_kiviat(table, entries, key, spec), out, spec)
        print(out)
        return EXIT_OK
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for key, entries in figures:
        out = out_dir / f"{key}.{spec.image_format}"
        save_figure(render_kiviat(table, entries, key, spec), str(out), spec)
        print(out)
    return EXIT_OK


def cmd_lmae(args) -> int:
    profiles = []
    for path in args.reports:
        profiles.extend(load_lmae_profiles(path))
    spec = _spec_from_args(args, list(args.reports))
    title = profiles[0].kernel if len({p.kernel for p in profiles}) == 1 else "locality entropy"
    out = spec.output or f"lmae.{spec.image_format}"
    save_figure(render_lmae(profiles, title, spec), out, spec)
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aiwc-plot",
        description="Render radar and locality-entropy figures from aiwc JSON outputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_k = sub.add_parser("kiviat", help="radar chart(s) from a comparison table")
    p_k.add_argument("table", help="kiviat table JSON ('-' for stdin)")
    p_k.add_argument("-o", "--output", help="output image path (single figure)")
    p_k.add_argument("--out-dir", help="directory for one image per figure group")
    p_k.add_argument("--split", default="@",
                     help="id delimiter separating figure key from overlay label (default '@')")
    p_k.add_argument("--format", choices=("svg", "png"), default="svg")
    p_k.add_argument("--size", default="7,6", help="figure size in inches, W,H")
    p_k.add_argument("--dpi", type=int, default=100)
    p_k.set_defaults(func=cmd_kiviat)

    p_l = sub.add_parser("lmae", help="locality-entropy descent lines from report(s)")
    p_l.add_argument("reports", nargs="+", help="report JSON files ('-' for stdin)")
    p_l.add_argument("-o", "--output", help="output image path")
    p_l.add_argument("--format", choices=("svg", "png"), default="svg")
    p_l.add_argument("--size", default="6,4", help="figure size in inches, W,H")
    p_l.add_argument("--dpi", type=int, default=100)
    p_l.set_defaults(func=cmd_lmae)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"aiwc-plot: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except FileNotFoundError as exc:
        print(f"aiwc-plot: {exc.filename}: no such file", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
