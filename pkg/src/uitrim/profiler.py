"""Per-component token accounting over logged agent prompts."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .representations import COMPONENTS, PromptBundle, assemble_prompt
from .tokens import DEFAULT_COUNTER, TokenCounter


class EmptyLog(ValueError):
    pass


class MalformedLogRecord(ValueError):
    pass


@dataclass(frozen=True)
class PromptLogRecord:
    record_id: str
    model_label: str
    benchmark_label: str
    agent_label: str
    components: PromptBundle

    def __post_init__(self):
        for name in ("model_label", "benchmark_label", "agent_label"):
            if not getattr(self, name):
                raise MalformedLogRecord(f"{self.record_id}: {name} must be non-empty")

    @property
    def key(self) -> tuple:
        return (self.model_label, self.benchmark_label, self.agent_label)


@dataclass(frozen=True)
class BreakdownRow:
    model: str
    benchmark: str
    agent: str
    records: int
    means: dict = field(hash=False)  # component -> mean token count
    pretokenized: bool = False

    @property
    def total(self) -> float:
        return sum(self.means.values())

    @property
    def ui_ratio(self) -> float:
        total = self.total
        return self.means["ui"] / total if total > 0 else 0.0

    def display(self) -> dict:
        """Rounded values as they appear in reports."""
        out = {name: round(self.means[name]) for name in COMPONENTS}
        out["total"] = round(self.total)
        out["ui_ratio"] = f"{self.ui_ratio * 100:.1f}%"
        return out


def parse_record(line: str, lineno: int = 0) -> PromptLogRecord:
    try:
        obj = json.loads(line)
    except ValueError as exc:
        raise MalformedLogRecord(f"line {lineno}: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedLogRecord(f"line {lineno}: expected an object")
    comps = obj.get("components", {})
    counts = obj.get("counts")
    unknown = set(comps) - set(COMPONENTS) | set(counts or {}) - set(COMPONENTS)
    if unknown:
        raise MalformedLogRecord(f"line {lineno}: unknown components {sorted(unknown)}")
    bundle = PromptBundle(**{name: str(comps.get(name, "")) for name in COMPONENTS},
                          counts=counts)
    return PromptLogRecord(str(obj.get("record_id", lineno)), str(obj.get("model", "")),
                           str(obj.get("benchmark", "")), str(obj.get("agent", "")), bundle)


def read_log(path) -> list[PromptLogRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                records.append(parse_record(line, lineno))
    return records


def profile(log: Iterable[PromptLogRecord],
            counter: TokenCounter = DEFAULT_COUNTER) -> list[BreakdownRow]:
    """Mean token count per component for each (model, benchmark, agent) group."""
    sums: dict = {}
    seen = False
    for record in log:
        seen = True
        assembled = assemble_prompt(record.components, counter)
        acc = sums.setdefault(record.key, {"n": 0, "pre": False,
                                           **{name: 0 for name in COMPONENTS}})
        acc["n"] += 1
        acc["pre"] = acc["pre"] or assembled.pretokenized
        for name in COMPONENTS:
            acc[name] += assembled.counts[name]
    if not seen:
        raise EmptyLog("prompt log has no records")
    rows = []
    for key in sorted(sums):
        acc = sums[key]
        means = {name: acc[name] / acc["n"] for name in COMPONENTS}
        rows.append(BreakdownRow(*key, acc["n"], means, acc["pre"]))
    return rows


HEADER = ("model", "benchmark", "agent", "records") + COMPONENTS + ("total", "ui_ratio",
                                                                    "pretokenized")


def format_rows(rows: list[BreakdownRow], delimiter: str = "\t") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        shown = row.display()
        writer.writerow([row.model, row.benchmark, row.agent, row.records]
                        + [shown[name] for name in COMPONENTS]
                        + [shown["total"], shown["ui_ratio"], str(row.pretokenized).lower()])
    return buf.getvalue()


def profile_file(path: str | Path, counter: TokenCounter = DEFAULT_COUNTER) -> list[BreakdownRow]:
    return profile(read_log(path), counter)
