"""Command-line entry point ``gsn-forge``.

Live endpoints read ``GSNFORGE_API_KEY`` (and optionally ``GSNFORGE_API_BASE``)
from the environment; no subcommand accepts credentials as arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from importlib import resources
from pathlib import Path

from .core import GsnError, GsnGraph, count_summary
from .dataset import DEFAULT_EXAMPLE, load_dataset
from .dot import render_dot
from .gateway import EchoBackend, Gateway, HttpBackend
from .instantiator import BindingPlan, instantiate
from .metrics import TEXT_METRICS, Metric, kendall_value, score_text
from .predicate import parse_document, serialize
from .prompts import experiment
from .prose import parse_prose, render_prose
from .runner import LOOCV, RunMatrix, emit_report, run_matrix
from .validator import errors, to_json, validate

log = logging.getLogger("gsn_forge")


def load_graph(path, lenient: bool = False) -> GsnGraph:
    """Read a ``.gsnp`` predicate file or dash prose (anything else)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".gsnp":
        return parse_document(text)
    return parse_prose(text, mode="lenient" if lenient else "strict")[0]


def write_graph(graph: GsnGraph, path) -> None:
    path = Path(path)
    text = serialize(graph) if path.suffix == ".gsnp" else render_prose(graph)
    path.write_text(text, encoding="utf-8")


def read_ratings(path) -> list[float]:
    """Ratings from a CSV: the last column of each row, header rows skipped."""
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            try:
                values.append(float(cells[-1]))
            except ValueError:
                continue
    return values


def cmd_validate(args) -> int:
    graph = load_graph(args.file)
    diagnostics = validate(graph, args.profile)
    if args.json:
        print(to_json(diagnostics))
    else:
        for d in diagnostics:
            print(f"{d.severity:7s} {d.rule:4s} {d.subject}: {d.message}")
        n_err = len(errors(diagnostics))
        print(f"{n_err} error(s), {len(diagnostics) - n_err} warning(s)")
    return 1 if errors(diagnostics) else 0


def cmd_instantiate(args) -> int:
    pattern = load_graph(args.pattern)
    plan = BindingPlan.load(args.plan)
    case = instantiate(pattern, plan)
    if args.out:
        write_graph(case, args.out)
    else:
        sys.stdout.write(render_prose(case))
    return 0


def cmd_prompt(args) -> int:
    from .prompts import prompts_for

    dataset = load_dataset(args.dataset)
    config = experiment(args.experiment)
    example = args.example or (DEFAULT_EXAMPLE if config.use_example else None)
    bundle = prompts_for(config, dataset, args.system, example if config.use_example else None)
    print("=== SYSTEM ===")
    print(bundle.system.rstrip())
    print("=== USER ===")
    print(bundle.user.rstrip())
    return 0


def cmd_score(args) -> int:
    if args.tau:
        value = kendall_value(read_ratings(args.tau[0]), read_ratings(args.tau[1]))
        print(json.dumps(value.to_dict(), indent=2))
        return 0
    if not (args.candidate and args.reference):
        print("score needs --candidate and --reference, or --tau A B", file=sys.stderr)
        return 2
    candidate = Path(args.candidate).read_text(encoding="utf-8")
    reference = Path(args.reference).read_text(encoding="utf-8")
    metrics = TEXT_METRICS if args.metric == "all" else (Metric(args.metric),)
    values = score_text(candidate, reference, metrics, per_element=args.per_element)
    print(json.dumps({m.value: v.to_dict() for m, v in values.items()}, indent=2))
    return 0


def _default_matrix(loocv: bool) -> Path:
    name = "matrix_loocv.json" if loocv else "matrix_default.json"
    return Path(str(resources.files("gsn_forge") / "data" / name))


def cmd_experiment(args) -> int:
    matrix = RunMatrix.load(args.matrix or _default_matrix(args.loocv))
    if args.loocv and not matrix.loocv:
        matrix = replace(
            matrix,
            example_system=LOOCV,
            systems=sorted(set(matrix.systems) | set(matrix.baseline_systems or [])),
        )
    if args.k:
        matrix = replace(matrix, k=args.k)
    if args.experiments:
        matrix = replace(matrix, experiments=[experiment(e) for e in args.experiments.split(",")])
    dataset = load_dataset(args.dataset)
    backend = EchoBackend(dataset) if args.mock else HttpBackend()
    gateway = Gateway(backend, retries=args.retries, parallelism=matrix.parallelism)
    report = run_matrix(matrix, dataset, gateway, args.out)
    for fmt in args.format.split(","):
        for path in emit_report(report, fmt, args.out):
            print(path)
    failed = sum(1 for c in report.cells for r in c.runs if r.error)
    if failed:
        print(f"{failed} generation(s) failed and were scored 0", file=sys.stderr)
    return 0


def cmd_dot(args) -> int:
    sys.stdout.write(render_dot(load_graph(args.file, args.lenient)))
    return 0


def cmd_count(args) -> int:
    summary = count_summary(load_graph(args.file, args.lenient))
    print(json.dumps(asdict(summary)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsn-forge", description="GSN pattern tooling and LLM experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check well-formedness rules R1..R11")
    p.add_argument("file")
    p.add_argument("--profile", choices=["case", "pattern", "either"], default="either")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("instantiate", help="apply a binding plan to a pattern")
    p.add_argument("pattern")
    p.add_argument("--plan", required=True)
    p.add_argument("--out", help=".gsnp for predicates, anything else for prose")
    p.set_defaults(func=cmd_instantiate)

    p = sub.add_parser("prompt", help="print the prompts of one experiment cell")
    p.add_argument("--experiment", required=True)
    p.add_argument("--system", required=True)
    p.add_argument("--example")
    p.add_argument("--dataset")
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("score", help="text similarity or rater agreement")
    p.add_argument("--candidate")
    p.add_argument("--reference")
    p.add_argument("--metric", default="all", choices=["all"] + [m.value for m in TEXT_METRICS])
    p.add_argument("--per-element", action="store_true")
    p.add_argument("--tau", nargs=2, metavar=("A_CSV", "B_CSV"))
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("experiment", help="run an experiment matrix")
    p.add_argument("--matrix")
    p.add_argument("--dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--mock", action="store_true", help="echo the ground truth instead of calling a model")
    p.add_argument("--loocv", action="store_true", help="rotate the one-shot example over all systems")
    p.add_argument("--k", type=int)
    p.add_argument("--experiments", help="comma-separated subset, e.g. E1,E2")
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--format", default="csv,json,markdown")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("dot", help="render Graphviz DOT")
    p.add_argument("file")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("count", help="element/relationship/decorator/placeholder counts")
    p.add_argument("file")
    p.add_argument("--lenient", action="store_true")
    p.set_defaults(func=cmd_count)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (GsnError, OSError, KeyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
