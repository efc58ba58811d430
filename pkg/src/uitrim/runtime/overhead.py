"""Wall-clock cost of running a program library over a corpus of trees."""

from __future__ import annotations

import gc
import math
import time
from dataclasses import dataclass
from typing import Sequence

from ..dsl import ast as A
from ..interpreter import apply_library
from ..tree import UITree

MIN_TREES = 100


@dataclass(frozen=True)
class OverheadStats:
    trees: int
    min_ms: float
    mean_ms: float
    p95_ms: float
    max_ms: float

    def row(self) -> list:
        return [self.trees] + [f"{v:.4f}" for v in (self.min_ms, self.mean_ms, self.p95_ms,
                                                     self.max_ms)]


HEADER = ["trees", "min_ms", "mean_ms", "p95_ms", "max_ms"]


def percentile(values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile."""
    ordered = sorted(values)
    rank = max(1, math.ceil(q / 100.0 * len(ordered)))
    return ordered[rank - 1]


def time_transforms(trees: Sequence[UITree], library: Sequence[A.TransformProgram]) -> list[float]:
    # like timeit, keep collector pauses out of the samples
    samples = []
    enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        for tree in trees:
            start = time.perf_counter_ns()
            apply_library(library, tree)
            samples.append((time.perf_counter_ns() - start) / 1e6)
    finally:
        if enabled:
            gc.enable()
    return samples


def measure_overhead(trees: Sequence[UITree], library: Sequence[A.TransformProgram],
                     min_trees: int = MIN_TREES) -> OverheadStats:
    """Per-tree transform latency; parsing and rendering are outside the timed region."""
    if len(trees) < min_trees:
        raise ValueError(f"need at least {min_trees} trees, got {len(trees)}")
    samples = time_transforms(trees, library)
    return OverheadStats(len(samples), min(samples), sum(samples) / len(samples),
                         percentile(samples, 95), max(samples))
