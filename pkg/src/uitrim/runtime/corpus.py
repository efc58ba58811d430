"""Seeded generators for synthetic UI trees and replay workloads."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..tree import NodeSpec, UITree, build_tree, serialize_canonical

CONTAINER_TAGS = ("FrameLayout", "LinearLayout", "RelativeLayout", "ListView", "ScrollView")
LEAF_KINDS = (
    # tag, flags, has text, weight
    ("TextView", ("enabled", "visible"), True, 6),
    ("Button", ("clickable", "focusable", "enabled", "visible"), True, 2),
    ("EditText", ("clickable", "focusable", "enabled", "visible", "editable"), True, 1),
    ("CheckBox", ("checkable", "clickable", "enabled", "visible"), True, 1),
    ("ImageView", ("enabled", "visible"), False, 3),
    ("View", ("enabled", "visible"), False, 3),
)
WORDS = ("Home", "Search", "Settings", "Amount", "Total", "Send", "Cancel", "Next", "Profile",
         "Messages", "Balance", "Card", "Account", "Help", "Save", "Open", "Share", "Edit")


def random_spec(rng: random.Random, size: int) -> NodeSpec:
    """A random Android-like hierarchy with exactly ``size`` nodes."""
    root = NodeSpec(rng.choice(CONTAINER_TAGS), flags={"enabled", "visible"})
    containers = [root]
    weights = [k[3] for k in LEAF_KINDS]
    for _ in range(size - 1):
        parent = rng.choice(containers[-6:]) if rng.random() < 0.8 else rng.choice(containers)
        if rng.random() < 0.3:
            child = NodeSpec(rng.choice(CONTAINER_TAGS), flags={"enabled", "visible"})
            containers.append(child)
        else:
            tag, flags, has_text, _ = rng.choices(LEAF_KINDS, weights)[0]
            text = ""
            if has_text:
                text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))
                if rng.random() < 0.2:
                    text += f" {rng.randint(0, 9999)}"
            child = NodeSpec(tag, text, {}, set(flags))
        parent.children.append(child)
    return root


def random_tree(rng: random.Random, size: int) -> UITree:
    return build_tree(random_spec(rng, size))


def generate_corpus(count: int, seed: int = 0, min_nodes: int = 5,
                    max_nodes: int = 300) -> list[UITree]:
    rng = random.Random(seed)
    return [random_tree(rng, rng.randint(min_nodes, max_nodes)) for _ in range(count)]


def write_corpus(trees: list[UITree], directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, t in enumerate(trees):
        p = out / f"tree_{i:04d}.tree"
        p.write_text(serialize_canonical(t), encoding="utf-8")
        paths.append(p)
    return paths


# -- workloads ---------------------------------------------------------------


@dataclass(frozen=True)
class WorkloadRecord:
    offset_ms: float
    tokens: int
    tokens_after: Optional[int] = None
    tree_ref: Optional[str] = None


def _rescale(values: list[float], target_mean: int) -> list[int]:
    """Integers proportional to ``values`` whose mean is exactly ``target_mean``."""
    total = target_mean * len(values)
    scale = total / sum(values)
    out = [max(1, int(v * scale)) for v in values]
    residual = total - sum(out)
    step = 1 if residual > 0 else -1
    i = 0
    while residual:
        j = i % len(out)
        if out[j] + step >= 1:
            out[j] += step
            residual -= step
        i += 1
    return out


def synthetic_workload(n: int = 2000, seed: int = 0, mean_before: int = 8685,
                       mean_after: int = 2010, rate_qpm: float = 900.0) -> list[WorkloadRecord]:
    """Poisson arrivals with lognormal prompt sizes, rescaled to exact means."""
    rng = random.Random(seed)
    raw_before = [rng.lognormvariate(0.0, 0.45) for _ in range(n)]
    before = _rescale(raw_before, mean_before)
    target_keep = mean_after / mean_before
    raw_after = [b * min(0.95, max(0.05, rng.gauss(target_keep, 0.05))) for b in before]
    after = _rescale(raw_after, mean_after)
    t = 0.0
    records = []
    for b, a in zip(before, after):
        records.append(WorkloadRecord(round(t, 3), b, a))
        t += rng.expovariate(rate_qpm / 60000.0)
    return records


def format_workload(records: list[WorkloadRecord]) -> str:
    lines = ["# offset_ms,tokens[,tokens_after|tree_ref]"]
    for r in records:
        fields = [f"{r.offset_ms:.3f}", str(r.tokens)]
        if r.tokens_after is not None:
            fields.append(str(r.tokens_after))
        elif r.tree_ref:
            fields.append(r.tree_ref)
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


class MalformedWorkload(ValueError):
    pass


def parse_workload(text: str) -> list[WorkloadRecord]:
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            raise MalformedWorkload(f"line {lineno}: expected 2 or 3 fields")
        try:
            offset, tokens = float(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedWorkload(f"line {lineno}: bad number in {line!r}") from None
        if offset < 0 or tokens < 0:
            raise MalformedWorkload(f"line {lineno}: negative value")
        after, ref = None, None
        if len(parts) == 3:
            if parts[2].isdigit():
                after = int(parts[2])
            else:
                ref = parts[2]
        records.append(WorkloadRecord(offset, tokens, after, ref))
    return records


def load_workload(path) -> list[WorkloadRecord]:
    return parse_workload(Path(path).read_text(encoding="utf-8"))
