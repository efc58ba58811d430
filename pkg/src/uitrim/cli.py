"""Command-line entry point: ``uitrim <command> ...``."""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .dsl import ast as A
from .dsl.parser import ProgramSyntaxError, parse_library
from .evaluation import format_report, load_examples, score_program, score_views
from .interpreter import PredicateEvaluationError, apply_library, lift, serialize_views
from .representations import TREE_KINDS, render, render_tree
from .tokens import ExternalCounterFailure, TokenCounter
from .tree import TreeError, load_tree, serialize_canonical


def _programs(args) -> list[A.TransformProgram]:
    path = getattr(args, "library", None) or getattr(args, "program", None)
    if path is None:
        return []
    return parse_library(Path(path).read_text(encoding="utf-8"))


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _rows(rows, delimiter: str) -> str:
    import io

    buf = io.StringIO()
    csv.writer(buf, delimiter=delimiter, lineterminator="\n").writerows(rows)
    return buf.getvalue()


# -- commands ----------------------------------------------------------------


def cmd_apply(args) -> int:
    tree = load_tree(args.tree)
    views = apply_library(_programs(args), tree, args.retain_containers)
    if args.format == "canonical":
        _write(serialize_canonical(lift(views)), args.out)
    else:
        _write(serialize_views(views), args.out)
    return 0


def cmd_score(args) -> int:
    examples = load_examples(args.examples)
    counter = TokenCounter.from_spec(args.counter)
    programs = _programs(args)
    if len(programs) == 1:
        report = score_program(programs[0], examples, counter, args.renderer)
    else:
        report = score_views([apply_library(programs, ex.orig) for ex in examples], examples,
                             counter, args.renderer)
    _write(format_report(report), args.out)
    return 0


def cmd_synthesize(args) -> int:
    from .synthesis import SynthesisConfig, best_so_far, synthesize

    examples = load_examples(args.examples)
    config = SynthesisConfig.load(args.config) if args.config else SynthesisConfig()
    if args.generator:
        if args.generator == "enumerative":
            config = replace(config, generator="enumerative")
        elif args.generator.startswith("external:"):
            config = replace(config, generator="external",
                             endpoint=args.generator[len("external:"):])
        else:
            raise ValueError(f"unknown generator {args.generator!r}")
    counter = TokenCounter.from_spec(args.counter)
    library, ledger = synthesize(examples, config, counter)
    Path(args.out_library).write_text(library.to_text(), encoding="utf-8")
    Path(args.out_ledger).write_text(ledger.to_text(), encoding="utf-8")
    rows = [["iteration", "best_so_far", "accepted"]]
    accepted = {}
    for p, _ in library.entries:
        accepted[p.iteration] = accepted.get(p.iteration, 0) + 1
    for i in range(len(ledger.trajectory)):
        rows.append([i, f"{best_so_far(ledger, i):.6f}", accepted.get(i, 0)])
    final = score_views([apply_library(library.programs, ex.orig) for ex in examples],
                        examples, counter)
    rows.append(["library", f"{final.mean_efficiency:.6f}", len(library)])
    rows.append(["stop", ledger.stop_reason, len(ledger.records)])
    sys.stdout.write(_rows(rows, "\t"))
    if args.figure:
        from .plotting import plot_trajectory

        plot_trajectory(ledger, args.figure)
    return 0


def cmd_render(args) -> int:
    tree = load_tree(args.tree)
    counter = TokenCounter.from_spec(args.counter)
    if args.kind in TREE_KINDS:
        rep = render_tree(tree, args.kind, counter)
    else:
        rep = render(apply_library(_programs(args), tree), args.kind, args.seed, counter)
    _write(rep.text + "\n" if rep.lines else "", args.out)
    print(f"tokens\t{rep.token_count}", file=sys.stderr)
    return 0


def cmd_profile(args) -> int:
    from .profiler import format_rows, profile_file

    rows = profile_file(args.log, TokenCounter.from_spec(args.counter))
    _write(format_rows(rows, "," if args.csv else "\t"), args.out)
    if args.figure:
        from .plotting import plot_profile

        plot_profile(rows, args.figure)
    return 0


def cmd_serve(args) -> int:
    from .runtime.service import serve

    print(f"serving {args.library} on {args.bind}", file=sys.stderr)
    serve(args.library, args.bind, TokenCounter.from_spec(args.counter))
    return 0


def cmd_overhead(args) -> int:
    from .runtime.corpus import generate_corpus
    from .runtime.overhead import HEADER, OverheadStats, percentile, time_transforms

    if args.trees:
        paths = sorted(p for p in Path(args.trees).iterdir() if p.is_file())
        trees = [load_tree(p) for p in paths]
    else:
        trees = generate_corpus(args.corpus, args.seed)
    if len(trees) < 100:
        raise ValueError(f"need at least 100 trees, got {len(trees)}")
    samples = time_transforms(trees, _programs(args))
    stats = OverheadStats(len(samples), min(samples), sum(samples) / len(samples),
                          percentile(samples, 95), max(samples))
    sys.stdout.write(_rows([HEADER, stats.row()], "\t"))
    if args.figure:
        from .plotting import plot_overhead

        plot_overhead(samples, args.figure)
    return 0


def cmd_replay(args) -> int:
    from .runtime.corpus import load_workload
    from .runtime.replay import (
        REPORT_HEADER,
        LatencyModel,
        qos_curves,
        relative_change,
        replay,
        token_reduction,
    )

    records = load_workload(args.workload)
    model = LatencyModel(args.a, args.b)
    library = _programs(args) or None
    base = Path(args.workload).parent
    off = replay(records, model, args.concurrency, False)
    on = replay(records, model, args.concurrency, True, library, base_dir=base)
    rows = [REPORT_HEADER, off.row(), on.row()]
    rows.append(["token_reduction", f"{token_reduction(off, on) * 100:.1f}%"])
    rows.append(["latency_change",
                 f"{relative_change(off.mean_latency_ms, on.mean_latency_ms) * 100:.1f}%"])
    rows.append(["throughput_change",
                 f"{relative_change(off.throughput_qpm, on.throughput_qpm) * 100:.1f}%"])
    curves = []
    if args.levels:
        levels = [int(x) for x in args.levels.split(",")]
        curves = qos_curves(records, model, args.concurrency, levels, library, base_dir=base)
        rows.append(["# closed-loop curves"])
        rows.extend(r.row() for r in curves)
    sys.stdout.write(_rows(rows, ","))
    if args.figure:
        if not curves:
            raise ValueError("--figure needs --levels")
        from .plotting import plot_qos

        plot_qos(curves, args.figure)
    return 0


def cmd_corpus(args) -> int:
    from .runtime.corpus import generate_corpus, write_corpus

    paths = write_corpus(generate_corpus(args.count, args.seed, args.min_nodes, args.max_nodes),
                         args.out)
    print(f"wrote\t{len(paths)}\t{args.out}")
    return 0


def cmd_workload(args) -> int:
    from .runtime.corpus import format_workload, synthetic_workload

    records = synthetic_workload(args.n, args.seed, args.mean_before, args.mean_after,
                                 args.rate)
    _write(format_workload(records), args.out)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uitrim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"uitrim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def programs(p, required=False):
        group = p.add_mutually_exclusive_group(required=required)
        group.add_argument("--program", help="file with a single program")
        group.add_argument("--library", help="file with programs applied in order")

    def counter(p):
        p.add_argument("--counter", default="default",
                       help="default | external:<command reading stdin, printing an integer>")

    p = sub.add_parser("apply", help="apply a program or library to a tree")
    programs(p)
    p.add_argument("--tree", required=True)
    p.add_argument("--format", choices=("views", "canonical"), default="views")
    p.add_argument("--retain-containers", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("score", help="score a program (or library) on example files")
    programs(p, required=True)
    p.add_argument("--examples", required=True)
    p.add_argument("--renderer", default="hierarchical")
    counter(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synthesize", help="synthesize a program library")
    p.add_argument("--examples", required=True)
    p.add_argument("--config")
    p.add_argument("--generator", help="enumerative | external:<command or http url>")
    p.add_argument("--out-library", required=True)
    p.add_argument("--out-ledger", required=True)
    p.add_argument("--figure", help="write the efficiency trajectory as PNG")
    counter(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("render", help="render a tree or its transformed views")
    programs(p)
    p.add_argument("--tree", required=True)
    p.add_argument("--kind", default="hierarchical",
                   choices=("hierarchical", "dfs", "dfs_flat", "random") + TREE_KINDS)
    p.add_argument("--seed", type=int)
    counter(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("profile", help="per-component token breakdown of a prompt log")
    p.add_argument("--log", required=True)
    p.add_argument("--csv", action="store_true", help="comma-separated instead of tabs")
    p.add_argument("--figure")
    counter(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("serve", help="run the HTTP transformation service")
    p.add_argument("--library", required=True)
    p.add_argument("--bind", default="127.0.0.1:8080")
    counter(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("overhead", help="time library application over many trees")
    p.add_argument("--library", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--trees", help="directory of tree files")
    src.add_argument("--corpus", type=int, default=1000, help="generated corpus size")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--figure")
    p.set_defaults(func=cmd_overhead)

    p = sub.add_parser("replay", help="simulate serving QoS with and without the transform")
    p.add_argument("--workload", required=True)
    p.add_argument("--a", type=float, required=True, help="fixed latency per request (ms)")
    p.add_argument("--b", type=float, required=True, help="latency per token (ms)")
    p.add_argument("--concurrency", type=int, required=True, help="simulated workers")
    p.add_argument("--library")
    p.add_argument("--levels", help="comma-separated closed-loop concurrency levels")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("corpus", help="write a seeded synthetic tree corpus")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-nodes", type=int, default=5)
    p.add_argument("--max-nodes", type=int, default=300)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("workload", help="write a seeded synthetic replay workload")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mean-before", type=int, default=8685)
    p.add_argument("--mean-after", type=int, default=2010)
    p.add_argument("--rate", type=float, default=900.0, help="offered load, requests/minute")
    p.add_argument("--out")
    p.set_defaults(func=cmd_workload)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TreeError, ProgramSyntaxError, PredicateEvaluationError, ExternalCounterFailure,
            OSError, ValueError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
