"""Command-line interface: ``cfkcable COMMAND [ARGS] [--format text|machine] ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import docformat
from .equivariant import CONVENTIONS, THM31
from .pipeline import (
    PIPELINES,
    PipelineError,
    PipelineReport,
    _Run,
    emit_report,
    run_pipeline,
    stage_load,
    stage_tensor,
)

log = logging.getLogger("cfkcable")

# command -> custom-pipeline operations applied to each FILE
FILE_COMMANDS = {
    "validate": ["load({})"],
    "double": ["double({})"],
    "a0": ["a0({})"],
    "homology": ["load({})", "homology"],
    "table": ["load({})", "table"],
    "obstruct": ["load({})", "obstruct{}"],
    "local-to-trivial": ["load({})", "local-to-trivial"],
    "dual": ["load({})", "dual"],
}
HELP = {
    "validate": "parse and validate complexes, checking the ι/τ relations",
    "double": "double an ι-complex to (C ⊗ C^r, τ, ι) and print it as a .cfk document",
    "a0": "extract the A₀ surgery complex of a (τ, ι)-complex",
    "homology": "F[U]-homology of the surgery complex",
    "table": "induced ι and τ actions on homology",
    "obstruct": "equivariant homology ball obstruction",
    "local-to-trivial": "search for a local map to the trivial complex",
    "dual": "dual complex with transposed maps",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "machine"), default="text", help="report format")
    p.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--convention", choices=CONVENTIONS, default=THM31,
                   help="doubling convention (default %(default)s)")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="process N input files at once")
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")
    p.add_argument("--verbose", "-v", action="store_true", help="log pipeline stages to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfkcable",
        description="Involutive knot Floer complexes: doubling, large surgery and local-map obstructions.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, text in HELP.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("files", nargs="+", metavar="FILE", help=".cfk file or builtin:NAME")
        if name == "obstruct":
            p.add_argument("--symmetries", default="iota,tau",
                           help="comma-separated subset of iota, tau, tau_iota (default %(default)s)")
        _common(p)
    p = sub.add_parser("tensor", help="tensor product of two complexes")
    p.add_argument("files", nargs=2, metavar="FILE")
    _common(p)
    p = sub.add_parser("cobordism", help="intersection form and grading shift of W_{1,n}")
    p.add_argument("n", type=int, nargs="+", metavar="N")
    _common(p)
    p = sub.add_parser("pipeline", help="run a built-in pipeline")
    p.add_argument("name", choices=PIPELINES)
    p.add_argument("args", nargs="*", metavar="ARG",
                   help="thin-knot: KNOT [TO_FIG8 FROM_FIG8]; custom: operations such as 'double(unknot)' obstruct")
    p.add_argument("--n", type=int, default=3, help="odd n for the cobordism W_{1,n} (default %(default)s)")
    _common(p)
    return parser


def _ops_for(command: str, target: str, args: argparse.Namespace) -> list[str]:
    ops = []
    for op in FILE_COMMANDS[command]:
        if op == "obstruct{}":
            ops.append(f"obstruct({args.symmetries})")
        else:
            ops.append(op.format(target))
    return ops


def _report_for(task: tuple) -> PipelineReport:
    kind, payload, convention, n = task
    if kind == "custom":
        return run_pipeline("custom", payload, convention, emit_documents=True)
    if kind == "pipeline":
        name, inputs = payload
        return run_pipeline(name, inputs, convention, n=n)
    if kind == "tensor":
        report = PipelineReport("custom", {"convention": convention, "operations": ["tensor"]})
        run = _Run(report)
        a = stage_load(run, payload[0])
        b = stage_load(run, payload[1])
        stage_tensor(run, a, b, emit_document=True)
        return report
    raise ValueError(kind)


def _work(task: tuple, fmt: str, figures: str | None) -> tuple[bytes, str | None]:
    try:
        report = _report_for(task)
    except (PipelineError, docformat.DocumentSyntaxError, docformat.DocumentSemanticError,
            OSError, KeyError, ValueError) as exc:
        return b"", str(exc)
    if figures:
        from .plotting import render_report_figures

        render_report_figures(report, figures)
    return emit_report(report, fmt), None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    conv = args.convention
    if args.command in FILE_COMMANDS:
        tasks = [("custom", _ops_for(args.command, f, args), conv, 3) for f in args.files]
    elif args.command == "tensor":
        tasks = [("tensor", tuple(args.files), conv, 3)]
    elif args.command == "cobordism":
        tasks = [("custom", [f"cobordism({n})"], conv, 3) for n in args.n]
    else:
        tasks = [("pipeline", (args.name, list(args.args)), conv, args.n)]

    figure_dirs: list[str | None] = [None] * len(tasks)
    if args.figures:
        base = Path(args.figures)
        figure_dirs = [str(base if len(tasks) == 1 else base / f"{k:02d}") for k in range(len(tasks))]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_work, tasks, [args.format] * len(tasks), figure_dirs))
    else:
        results = [_work(t, args.format, d) for t, d in zip(tasks, figure_dirs)]

    errors = [err for _, err in results if err]
    for err in errors:
        print(f"cfkcable: error: {err}", file=sys.stderr)
    if errors:
        return 1
    if args.format == "machine" and len(results) > 1:
        blob = [json.loads(out) for out, _ in results]
        data = (json.dumps(blob, sort_keys=True, indent=1, ensure_ascii=False) + "\n").encode()
    else:
        data = b"\n".join(out for out, _ in results)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
