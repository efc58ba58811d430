"""Iterative, feedback-driven synthesis of a verified program library.

Each iteration draws a batch of candidates from a generator, scores every
candidate on the training examples, admits the ones that pass the acceptance
rule into the library, and records the rest as feedback for later iterations.
"""

from __future__ import annotations

import json
import re
import shlex
import subprocess
import urllib.error
import urllib.request
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .dsl import ast as A
from .dsl.enumerate import Vocabulary, enumerate_grammar
from .dsl.parser import ProgramSyntaxError, parse_program
from .dsl.validate import validate_program
from .evaluation import (
    CompletenessViolation,
    RewardReport,
    TrainingExample,
    score_program,
    score_views,
)
from .interpreter import apply_library
from .tokens import DEFAULT_COUNTER, TokenCounter
from .tree import quote

GENERATORS = ("enumerative", "external")
LABELS = ("positive", "neutral", "negative")


class ExternalGeneratorUnavailable(RuntimeError):
    pass


class IterationOutOfRange(IndexError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SynthesisConfig:
    threshold: float = 0.3
    max_iter: int = 20
    candidates_per_iter: int = 8
    library_cap: int = 8
    convergence_patience: int = 3
    generator: str = "enumerative"
    seed: int = 0
    # largest program size the enumerative generator will reach
    budget: int = 3
    # command line or http(s) URL for the external generator
    endpoint: str = ""

    def __post_init__(self):
        if not isinstance(self.threshold, (int, float)) or self.threshold != self.threshold \
                or self.threshold in (float("inf"), float("-inf")):
            raise ConfigError(f"threshold must be finite, got {self.threshold!r}")
        if self.max_iter < 0:
            raise ConfigError("max_iter must be >= 0")
        if self.candidates_per_iter < 1:
            raise ConfigError("candidates_per_iter must be >= 1")
        if self.library_cap < 1:
            raise ConfigError("library_cap must be >= 1")
        if self.convergence_patience < 1:
            raise ConfigError("convergence_patience must be >= 1")
        if self.budget < 0:
            raise ConfigError("budget must be >= 0")
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}")
        if self.generator == "external" and not self.endpoint:
            raise ConfigError("the external generator needs an endpoint")

    @classmethod
    def from_text(cls, text: str) -> "SynthesisConfig":
        """Parse ``key=value`` lines; ``#`` starts a comment, unknown keys are errors."""
        types = {f.name: f.type for f in fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in types:
                raise ConfigError(f"line {lineno}: expected a known key=value, got {raw.strip()!r}")
            try:
                if types[key] == "float":
                    values[key] = float(value)
                elif types[key] == "int":
                    values[key] = int(value)
                else:
                    values[key] = value
            except ValueError:
                raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from None
        return cls(**values)

    @classmethod
    def load(cls, path) -> "SynthesisConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))


@dataclass(frozen=True)
class FeedbackRecord:
    program: Optional[A.TransformProgram]
    label: str
    reward_total: float
    violations: tuple = ()
    iteration: int = 0
    mean_efficiency: float = 0.0
    # raw generator output, kept when the candidate could not be parsed
    source_text: str = ""

    @property
    def text(self) -> str:
        return A.format_program(self.program) if self.program is not None else self.source_text

    @property
    def violation_free(self) -> bool:
        return not self.violations


@dataclass
class ProgramLibrary:
    entries: list = field(default_factory=list)  # (TransformProgram, RewardReport)
    metadata: dict = field(default_factory=dict)

    @property
    def programs(self) -> list:
        return [p for p, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def bodies(self) -> set:
        return {p.body() for p, _ in self.entries}

    def to_text(self) -> str:
        head = "".join(f"# {k}: {v}\n" for k, v in self.metadata.items())
        if not self.entries:
            return head
        return head + ("\n" if head else "") + A.format_library(self.programs)


@dataclass
class FeedbackLedger:
    records: list = field(default_factory=list)
    # best violation-free mean efficiency seen in each iteration, None when there was none
    trajectory: list = field(default_factory=list)
    stop_reason: str = ""

    def positives(self) -> list:
        return [r for r in self.records if r.label == "positive"]

    def negatives(self) -> list:
        return [r for r in self.records if r.label == "negative"]

    def to_text(self) -> str:
        lines = ["# kind\titeration\tlabel\treward\tefficiency\tviolations\tprogram"]
        for r in self.records:
            viol = ";".join(f"{v.kind}@{v.example_id}" if v.example_id else v.kind
                            for v in r.violations) or "-"
            lines.append(f"record\t{r.iteration}\t{r.label}\t{r.reward_total:.6f}\t"
                         f"{r.mean_efficiency:.6f}\t{viol}\t{quote(r.text)}")
        for i in range(len(self.trajectory)):
            lines.append(f"best\t{i}\t\t\t{best_so_far(self, i):.6f}\t\t")
        lines.append(f"stop\t{self.stop_reason}")
        return "\n".join(lines) + "\n"


def best_so_far(ledger: FeedbackLedger, iteration: int) -> float:
    """Running maximum of violation-free mean efficiency through ``iteration``."""
    if iteration < 0 or iteration >= len(ledger.trajectory):
        raise IterationOutOfRange(
            f"iteration {iteration} outside 0..{len(ledger.trajectory) - 1}")
    seen = [v for v in ledger.trajectory[:iteration + 1] if v is not None]
    return max(seen, default=0.0)


def generate_feedback(p: A.TransformProgram, report: RewardReport, iteration: int,
                      iteration_best: Optional[float] = None) -> FeedbackRecord:
    """Label a scored candidate.

    Any completeness violation makes it negative.  A violation-free candidate
    is positive when it reaches ``iteration_best`` (or when no best is given),
    else neutral.
    """
    violations = tuple(report.violations)
    if violations:
        label = "negative"
    elif iteration_best is None or report.mean >= iteration_best:
        label = "positive"
    else:
        label = "neutral"
    return FeedbackRecord(p, label, report.total, violations, iteration, report.mean_efficiency)


# -- generators --------------------------------------------------------------


@dataclass(frozen=True)
class Candidate:
    program: Optional[A.TransformProgram]
    source_text: str = ""
    error: str = ""


class EnumerativeGenerator:
    """Walks the grammar in size order, skipping programs whose leaf filter uses
    an atom already shown to drop target text."""

    def __init__(self, vocab: Vocabulary, budget: int):
        self._programs: Iterator[A.TransformProgram] = enumerate_grammar(vocab, budget)
        self.blacklist: set = set()
        self.exhausted = False

    def _pruned(self, p: A.TransformProgram) -> bool:
        return any(A.format_expr(e) in self.blacklist for e in p.leaf_filter.walk())

    def propose(self, count: int, **_context) -> list:
        out = []
        while len(out) < count:
            p = next(self._programs, None)
            if p is None:
                self.exhausted = True
                break
            if not self._pruned(p):
                out.append(Candidate(p))
        return out

    def observe(self, record: FeedbackRecord, examples: Sequence[TrainingExample],
                counter: TokenCounter, renderer: str) -> None:
        p = record.program
        if p is None or not any(v.kind == "LostInformation" for v in record.violations):
            return
        atom = p.leaf_filter
        if isinstance(atom, (A.Const, A.Not, A.And, A.Or)):
            return
        # confirm the filter alone is to blame before pruning on it
        probe = A.TransformProgram("probe", atom, A.FALSE, A.FALSE, p.leaf_props)
        report = score_program(probe, examples, counter, renderer)
        if any(v.kind == "LostInformation" for v in report.violations):
            self.blacklist.add(A.format_expr(atom))


_PROGRAM_START = re.compile(r"(?m)^[ \t]*(?=program\b)")


def split_candidates(text: str) -> list[str]:
    """Split generator output into one chunk per ``program`` block."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            payload = json.loads(stripped)
        except ValueError:
            payload = None
        if isinstance(payload, dict) and isinstance(payload.get("candidates"), list):
            return [str(c) for c in payload["candidates"]]
    chunks = [c.strip() for c in _PROGRAM_START.split(text)]
    return [c for c in chunks if c]


def grammar_summary() -> str:
    return (
        "program <id> {\n"
        "  leaf-filter: <node condition>;\n"
        "  leaf-props: [text, bounds, <attr key>...];\n"
        "  node-filter: <node condition>;\n"
        "  merge-when: <merge condition>;\n"
        "  merge-props { text: concat|first|parent; type: parent|dominant-child; };\n"
        "}\n"
        "node atoms: true false tag = \"T\" | tag in (\"A\", ...) | attr(\"k\") exists | "
        "attr(\"k\") = \"v\" | attr(\"k\") matches /re/ | text empty | text nonempty | "
        "text = \"s\" | flag(name) | child-count <cmp> n | depth <cmp> n\n"
        "view atoms: text empty | text nonempty | interactive | type = \"T\"\n"
        "merge atoms: node atoms | view-count <cmp> n | all-views(<view cond>) | "
        "any-view(<view cond>)\n"
        "combinators: not, and, or, parentheses\n"
    )


def build_request(examples: Sequence[TrainingExample], ledger: FeedbackLedger, count: int,
                  iteration: int, seed: int) -> dict:
    def exemplar(r: FeedbackRecord) -> dict:
        return {"program": r.text, "reward": round(r.reward_total, 6),
                "violations": [str(v) for v in r.violations]}

    positives = sorted(ledger.positives(), key=lambda r: (-r.reward_total, r.text))
    return {
        "v": 1,
        "iteration": iteration,
        "count": count,
        "seed": seed,
        "grammar": grammar_summary(),
        "examples": [
            {"id": ex.example_id, "nodes": ex.orig.node_count,
             "targets": [t.text for t in ex.target]}
            for ex in examples
        ],
        "feedback": {
            "positive": [exemplar(r) for r in positives[:8]],
            "negative": [exemplar(r) for r in ledger.negatives()[-8:]],
        },
    }


class ExternalGenerator:
    """One text exchange per iteration with a command (stdin/stdout) or an HTTP endpoint."""

    def __init__(self, endpoint: str, timeout: float = 120.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self.exhausted = False

    def _exchange(self, body: str) -> str:
        if self.endpoint.startswith(("http://", "https://")):
            req = urllib.request.Request(self.endpoint, data=body.encode("utf-8"),
                                         headers={"Content-Type": "application/json"})
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    return resp.read().decode("utf-8")
            except (urllib.error.URLError, OSError) as exc:
                raise ExternalGeneratorUnavailable(f"{self.endpoint}: {exc}") from exc
        try:
            proc = subprocess.run(shlex.split(self.endpoint), input=body, capture_output=True,
                                  text=True, timeout=self.timeout, check=False)
        except (OSError, subprocess.SubprocessError) as exc:
            raise ExternalGeneratorUnavailable(f"{self.endpoint}: {exc}") from exc
        if proc.returncode != 0:
            raise ExternalGeneratorUnavailable(
                f"{self.endpoint} exited {proc.returncode}: {proc.stderr.strip()}")
        return proc.stdout

    def propose(self, count: int, *, examples, ledger, iteration, seed, **_context) -> list:
        request = build_request(examples, ledger, count, iteration, seed)
        chunks = split_candidates(self._exchange(json.dumps(request, sort_keys=True)))
        out = []
        for k, chunk in enumerate(chunks[:count]):
            try:
                p = parse_program(chunk)
            except ProgramSyntaxError as exc:
                out.append(Candidate(None, chunk, str(exc)))
                continue
            out.append(Candidate(p.with_id(f"x{iteration:03d}_{k}",
                                           provenance="external_generator"), chunk))
        return out

    def observe(self, *_args, **_kwargs) -> None:
        pass


def make_generator(config: SynthesisConfig, examples: Sequence[TrainingExample]):
    if config.generator == "external":
        return ExternalGenerator(config.endpoint)
    return EnumerativeGenerator(Vocabulary.from_trees(ex.orig for ex in examples), config.budget)


# -- main loop ---------------------------------------------------------------


def _library_report(programs: list, examples: Sequence[TrainingExample],
                    counter: TokenCounter, renderer: str) -> RewardReport:
    return score_views([apply_library(programs, ex.orig) for ex in examples], examples,
                       counter, renderer)


def _rejection(kind: str, detail: str) -> tuple:
    return (CompletenessViolation(kind, detail),)


def synthesize(examples: Sequence[TrainingExample], config: SynthesisConfig = SynthesisConfig(),
               counter: TokenCounter = DEFAULT_COUNTER, renderer: str = "hierarchical",
               generator=None) -> tuple[ProgramLibrary, FeedbackLedger]:
    """Run the refinement loop; returns the library and the feedback ledger.

    A candidate joins the library when its mean per-example reward reaches the
    threshold with no completeness violation, and appending it to the library
    keeps the library violation-free while raising its mean efficiency.
    """
    if not examples:
        raise ValueError("synthesis needs at least one training example")
    generator = generator or make_generator(config, examples)
    library = ProgramLibrary(metadata={
        "generator": config.generator,
        "threshold": config.threshold,
        "max_iter": config.max_iter,
        "candidates_per_iter": config.candidates_per_iter,
        "seed": config.seed,
        "examples": len(examples),
    })
    ledger = FeedbackLedger()
    library_eff = 0.0
    idle = 0
    stop = "max_iter"
    for iteration in range(config.max_iter):
        candidates = generator.propose(config.candidates_per_iter, examples=examples,
                                       ledger=ledger, iteration=iteration, seed=config.seed)
        if not candidates:
            stop = "exhausted"
            break
        grew = False
        pending: list = []  # (program or None, report or None, violations, source)
        best_eff: Optional[float] = None
        for cand in candidates:
            if cand.program is None:
                pending.append((None, None, _rejection("SyntaxError", cand.error),
                                cand.source_text))
                continue
            p = cand.program.with_id(cand.program.program_id, iteration=iteration)
            problems = validate_program(p)
            if problems:
                pending.append((p, None, tuple(CompletenessViolation(v.kind, str(v))
                                               for v in problems), ""))
                continue
            report = score_program(p, examples, counter, renderer)
            if report.violation_free:
                best_eff = max(best_eff or 0.0, report.mean_efficiency)
            accepted = False
            if (report.violation_free and report.mean >= config.threshold
                    and len(library) < config.library_cap and p.body() not in library.bodies()):
                composed = _library_report(library.programs + [p], examples, counter, renderer)
                if composed.violation_free and composed.mean_efficiency > library_eff:
                    library.entries.append((p, report))
                    library_eff = composed.mean_efficiency
                    accepted = grew = True
            if not accepted:
                pending.append((p, report, tuple(report.violations), ""))

        scored = [r for p, r, v, _ in pending if r is not None and not v]
        top = max((r.mean for r in scored), default=None)
        batch = []
        for p, report, violations, source in pending:
            if report is None:
                batch.append(FeedbackRecord(p, "negative", 0.0, violations, iteration, 0.0,
                                            source))
            else:
                batch.append(generate_feedback(p, report, iteration, top))
        batch.sort(key=lambda r: (LABELS.index(r.label), -r.reward_total, r.text))
        for record in batch:
            ledger.records.append(record)
            generator.observe(record, examples, counter, renderer)
        ledger.trajectory.append(best_eff)

        if grew:
            idle = 0
        elif len(library):
            idle += 1
        if len(library) >= config.library_cap:
            stop = "library_cap"
            break
        if idle >= config.convergence_patience:
            stop = "converged"
            break
        if generator.exhausted:
            stop = "exhausted"
            break
    ledger.stop_reason = stop
    library.metadata["stop"] = stop
    library.metadata["iterations"] = len(ledger.trajectory)
    library.metadata["mean_efficiency"] = f"{library_eff:.6f}"
    return library, ledger


__all__ = [
    "ConfigError",
    "EnumerativeGenerator",
    "ExternalGenerator",
    "ExternalGeneratorUnavailable",
    "FeedbackLedger",
    "FeedbackRecord",
    "IterationOutOfRange",
    "ProgramLibrary",
    "SynthesisConfig",
    "best_so_far",
    "build_request",
    "generate_feedback",
    "split_candidates",
    "synthesize",
]
