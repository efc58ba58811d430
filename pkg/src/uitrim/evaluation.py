"""Scoring of transformation programs: token efficiency plus a completeness penalty."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .dsl import ast as A
from .interpreter import PredicateEvaluationError, ViewList, apply
from .representations import render
from .tokens import DEFAULT_COUNTER, TokenCounter
from .tree import TreeError, UITree, normalize_text, parse_canonical, quote, unquote

COMPLETENESS_PENALTY = -10.0


@dataclass(frozen=True)
class TargetView:
    text: str
    interactive: bool = False
    distinct_group: int = 0


@dataclass(frozen=True)
class TrainingExample:
    example_id: str
    orig: UITree
    target: tuple

    def __post_init__(self):
        for t in self.target:
            if not t.text:
                raise ValueError(f"{self.example_id}: target texts must be non-empty")


@dataclass(frozen=True)
class CompletenessViolation:
    kind: str  # LostInformation | LostInteractivity | OverMerge
    detail: str
    targets: tuple = ()
    example_id: str = ""

    def __str__(self) -> str:
        prefix = f"{self.example_id}: " if self.example_id else ""
        return f"{prefix}{self.kind}: {self.detail}"


@dataclass(frozen=True)
class ExampleScore:
    example_id: str
    completeness: float
    efficiency: float
    violations: tuple = ()

    @property
    def reward(self) -> float:
        return self.completeness + self.efficiency


@dataclass(frozen=True)
class RewardReport:
    per_example: tuple
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", sum(s.reward for s in self.per_example))

    @property
    def mean(self) -> float:
        return self.total / len(self.per_example) if self.per_example else 0.0

    @property
    def mean_efficiency(self) -> float:
        if not self.per_example:
            return 0.0
        return sum(s.efficiency for s in self.per_example) / len(self.per_example)

    @property
    def violations(self) -> list:
        return [v for s in self.per_example for v in s.violations]

    @property
    def violation_free(self) -> bool:
        return all(s.completeness == 0 for s in self.per_example)


class ExampleScoringError(RuntimeError):
    def __init__(self, example_id: str, cause: Exception):
        super().__init__(f"{example_id}: {cause}")
        self.example_id = example_id
        self.cause = cause


# -- rewards -----------------------------------------------------------------


def reduction(before: int, after: int) -> float:
    """Token reduction proportion clamped to [0, 1]; zero when there was nothing to reduce."""
    if before <= 0:
        return 0.0
    return min(1.0, max(0.0, (before - after) / before))


def baseline_views(tree: UITree) -> ViewList:
    """The unoptimized leaf-level representation every reduction is measured against."""
    return apply(A.identity_program(), tree)


_BASELINE_CACHE: dict = {}


def baseline_tokens(orig: UITree, counter: TokenCounter = DEFAULT_COUNTER,
                    renderer: str = "hierarchical") -> int:
    key = (id(orig), counter, renderer)
    hit = _BASELINE_CACHE.get(key)
    if hit is not None and hit[0] is orig:
        return hit[1]
    tokens = render(baseline_views(orig), renderer, seed=0, counter=counter).token_count
    if len(_BASELINE_CACHE) > 4096:
        _BASELINE_CACHE.clear()
    _BASELINE_CACHE[key] = (orig, tokens)
    return tokens


def efficiency_reward(orig: UITree, views: ViewList, counter: TokenCounter = DEFAULT_COUNTER,
                      renderer: str = "hierarchical") -> float:
    before = baseline_tokens(orig, counter, renderer)
    after = render(views, renderer, seed=0, counter=counter).token_count
    return reduction(before, after)


def _target_hits(texts: list[str], needles: list[str]) -> dict:
    """View indices where each needle occurs as a substring.

    Longer needles are matched first and their spans masked, so a short target
    that only appears inside a longer target's text (``Pay`` in ``Pay Bill``)
    does not count as present there.
    """
    hits: dict = {n: [] for n in needles}
    order = sorted(set(needles), key=lambda n: (-len(n), n))
    for i, text in enumerate(texts):
        masked = text
        for needle in order:
            if needle in masked:
                hits[needle].append(i)
                masked = masked.replace(needle, "\0" * len(needle))
    return hits


def completeness_reward(views: ViewList, target: Sequence[TargetView]
                        ) -> tuple[float, list[CompletenessViolation]]:
    texts = [normalize_text(v.text) for v in views.views]
    needles = [normalize_text(t.text) for t in target]
    found = _target_hits(texts, needles)
    violations: list[CompletenessViolation] = []
    matches = [found[n] for n in needles]
    for t, hits in zip(target, matches):
        if not hits:
            violations.append(CompletenessViolation(
                "LostInformation", f"target {t.text!r} is not present in any view", (t.text,)))
        elif t.interactive and not any(views.views[i].interactive for i in hits):
            violations.append(CompletenessViolation(
                "LostInteractivity", f"target {t.text!r} only appears in non-interactive views",
                (t.text,)))
    for i, v in enumerate(views.views):
        inside = [t for t, hits in zip(target, matches) if i in hits]
        groups = {}
        for t in inside:
            groups.setdefault(t.distinct_group, t)
        if len(groups) > 1:
            names = tuple(t.text for t in groups.values())
            violations.append(CompletenessViolation(
                "OverMerge", f"view {v.view_id} merges distinct elements "
                + ", ".join(repr(n) for n in names), names))
    return (COMPLETENESS_PENALTY if violations else 0.0), violations


def score_example(views: ViewList, example: TrainingExample,
                  counter: TokenCounter = DEFAULT_COUNTER,
                  renderer: str = "hierarchical") -> ExampleScore:
    completeness, violations = completeness_reward(views, example.target)
    tagged = tuple(
        CompletenessViolation(v.kind, v.detail, v.targets, example.example_id) for v in violations)
    return ExampleScore(example.example_id, completeness,
                        efficiency_reward(example.orig, views, counter, renderer), tagged)


def score_program(p: A.TransformProgram, examples: Sequence[TrainingExample],
                  counter: TokenCounter = DEFAULT_COUNTER,
                  renderer: str = "hierarchical") -> RewardReport:
    if not examples:
        raise ValueError("score_program needs at least one example")
    scores = []
    for ex in examples:
        try:
            views = apply(p, ex.orig)
        except PredicateEvaluationError as exc:
            raise ExampleScoringError(ex.example_id, exc) from exc
        scores.append(score_example(views, ex, counter, renderer))
    return RewardReport(tuple(scores))


def score_views(view_lists: Sequence[ViewList], examples: Sequence[TrainingExample],
                counter: TokenCounter = DEFAULT_COUNTER,
                renderer: str = "hierarchical") -> RewardReport:
    """Score precomputed view lists, e.g. the output of a whole library."""
    return RewardReport(tuple(score_example(v, ex, counter, renderer)
                              for v, ex in zip(view_lists, examples)))


# -- example files -----------------------------------------------------------

_TARGET_RE = re.compile(
    r'^group=(-?\d+)\s+interactive=(true|false)\s+text="((?:[^"\\]|\\.)*)"\s*$')


def parse_example(document: str, example_id: str) -> TrainingExample:
    lines = document.splitlines()
    try:
        split = next(i for i, line in enumerate(lines) if line.strip() == "targets")
    except StopIteration:
        raise TreeError(f"{example_id}: missing 'targets' section") from None
    tree = parse_canonical("\n".join(lines[:split]) + "\n")
    targets = []
    for lineno, line in enumerate(lines[split + 1:], start=split + 2):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _TARGET_RE.match(line.strip())
        if not m:
            raise TreeError(f"{example_id} line {lineno}: malformed target {line.strip()!r}")
        targets.append(TargetView(unquote(m.group(3)), m.group(2) == "true", int(m.group(1))))
    return TrainingExample(example_id, tree, tuple(targets))


def format_example(example: TrainingExample) -> str:
    from .tree import serialize_canonical

    lines = [serialize_canonical(example.orig).rstrip("\n"), "targets"]
    for t in example.target:
        lines.append(f"group={t.distinct_group} interactive={str(t.interactive).lower()} "
                     f"text={quote(t.text)}")
    return "\n".join(lines) + "\n"


def load_examples(directory: str | Path) -> list[TrainingExample]:
    """Every ``*.example`` file in a directory, ordered by file name."""
    paths = sorted(Path(directory).glob("*.example"))
    if not paths:
        raise FileNotFoundError(f"no .example files in {directory}")
    return [parse_example(p.read_text(encoding="utf-8"), p.stem) for p in paths]


def format_report(report: RewardReport) -> str:
    lines = ["example_id\tcompleteness\tefficiency"]
    for s in report.per_example:
        lines.append(f"{s.example_id}\t{s.completeness:g}\t{s.efficiency:.6f}")
    lines.append(f"total\t\t{report.total:.6f}")
    return "\n".join(lines) + "\n"


__all__ = [
    "COMPLETENESS_PENALTY",
    "CompletenessViolation",
    "ExampleScore",
    "RewardReport",
    "TargetView",
    "TrainingExample",
    "baseline_tokens",
    "baseline_views",
    "completeness_reward",
    "efficiency_reward",
    "format_example",
    "format_report",
    "load_examples",
    "parse_example",
    "reduction",
    "score_example",
    "score_program",
    "score_views",
]
