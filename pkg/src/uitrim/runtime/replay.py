"""Discrete-event replay of a request workload against a linear latency model."""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from ..dsl import ast as A
from ..interpreter import apply_library
from ..representations import render
from ..tokens import DEFAULT_COUNTER, TokenCounter
from ..tree import load_tree
from .corpus import WorkloadRecord


@dataclass(frozen=True)
class LatencyModel:
    a: float  # fixed cost per request, ms
    b: float  # cost per prompt token, ms

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("latency model parameters must be non-negative")

    def service_ms(self, tokens: int) -> float:
        return self.a + self.b * tokens


@dataclass(frozen=True)
class QoSReport:
    configuration: str
    concurrency: int
    requests: int
    mean_tokens: float
    min_latency_ms: float
    mean_latency_ms: float
    max_latency_ms: float
    throughput_qpm: float

    def row(self) -> list:
        return [self.configuration, self.concurrency, self.requests, f"{self.mean_tokens:.1f}",
                f"{self.min_latency_ms:.1f}", f"{self.mean_latency_ms:.1f}",
                f"{self.max_latency_ms:.1f}", f"{self.throughput_qpm:.1f}"]


REPORT_HEADER = ["configuration", "concurrency", "requests", "mean_tokens", "min_latency_ms",
                 "mean_latency_ms", "max_latency_ms", "throughput_qpm"]


class MissingTransformInput(ValueError):
    pass


def transformed_tokens(records: Sequence[WorkloadRecord],
                       library: Optional[Sequence[A.TransformProgram]] = None,
                       counter: TokenCounter = DEFAULT_COUNTER, kind: str = "hierarchical",
                       base_dir: str | Path = ".") -> list[int]:
    """Prompt size per request with the transform on.

    A precomputed ``tokens_after`` wins; otherwise the referenced tree is run
    through the library and rendered.
    """
    out = []
    for i, r in enumerate(records):
        if r.tokens_after is not None:
            out.append(r.tokens_after)
            continue
        if r.tree_ref is None or library is None:
            raise MissingTransformInput(
                f"record {i} has neither tokens_after nor a tree reference with a library")
        tree = load_tree(Path(base_dir) / r.tree_ref)
        out.append(render(apply_library(library, tree), kind, seed=0, counter=counter).token_count)
    return out


def _report(name: str, concurrency: int, tokens: Sequence[int], arrivals: Sequence[float],
            finishes: Sequence[float]) -> QoSReport:
    latencies = [f - s for s, f in zip(arrivals, finishes)]
    n = len(latencies)
    if n == 0:
        return QoSReport(name, concurrency, 0, 0.0, 0.0, 0.0, 0.0, 0.0)
    elapsed = max(finishes) - min(arrivals)
    qpm = n / (elapsed / 60000.0) if elapsed > 0 else 0.0
    return QoSReport(name, concurrency, n, sum(tokens) / n, min(latencies),
                     sum(latencies) / n, max(latencies), qpm)


def simulate_open(offsets: Sequence[float], tokens: Sequence[int], model: LatencyModel,
                  workers: int) -> list[float]:
    """Finish times for requests arriving at ``offsets``, served FIFO by ``workers`` servers."""
    if workers < 1:
        raise ValueError("need at least one worker")
    free = [0.0] * workers
    order = sorted(range(len(offsets)), key=lambda i: (offsets[i], i))
    finishes = [0.0] * len(offsets)
    for i in order:
        start = max(offsets[i], heapq.heappop(free))
        finishes[i] = start + model.service_ms(tokens[i])
        heapq.heappush(free, finishes[i])
    return finishes


def replay(records: Sequence[WorkloadRecord], model: LatencyModel, concurrency: int,
           transform: bool, library: Optional[Sequence[A.TransformProgram]] = None,
           counter: TokenCounter = DEFAULT_COUNTER, base_dir: str | Path = ".") -> QoSReport:
    """Open-loop replay: each request arrives at its recorded offset and queues for a worker."""
    if transform:
        tokens = transformed_tokens(records, library, counter, base_dir=base_dir)
    else:
        tokens = [r.tokens for r in records]
    offsets = [r.offset_ms for r in records]
    finishes = simulate_open(offsets, tokens, model, concurrency)
    return _report("transform" if transform else "baseline", concurrency, tokens, offsets,
                   finishes)


def simulate_closed(tokens: Sequence[int], model: LatencyModel, clients: int,
                    workers: int) -> tuple[list[float], list[float]]:
    """Closed loop: ``clients`` users each send their next request as soon as the
    previous one returns; requests are drawn from ``tokens`` in order."""
    if clients < 1 or workers < 1:
        raise ValueError("clients and workers must be positive")
    n = len(tokens)
    arrivals = [0.0] * n
    finishes = [0.0] * n
    free = [0.0] * workers
    ready = [(0.0, c) for c in range(min(clients, n))]  # (time client is ready, client)
    heapq.heapify(ready)
    for i in range(n):
        t, client = heapq.heappop(ready)
        start = max(t, heapq.heappop(free))
        arrivals[i] = t
        finishes[i] = start + model.service_ms(tokens[i])
        heapq.heappush(free, finishes[i])
        heapq.heappush(ready, (finishes[i], client))
    return arrivals, finishes


def qos_curves(records: Sequence[WorkloadRecord], model: LatencyModel, workers: int,
               levels: Sequence[int], library: Optional[Sequence[A.TransformProgram]] = None,
               counter: TokenCounter = DEFAULT_COUNTER, base_dir: str | Path = "."
               ) -> list[QoSReport]:
    """Baseline and transformed reports at each closed-loop concurrency level."""
    before = [r.tokens for r in records]
    after = transformed_tokens(records, library, counter, base_dir=base_dir)
    out = []
    for level in levels:
        for name, tokens in (("baseline", before), ("transform", after)):
            arrivals, finishes = simulate_closed(tokens, model, level, workers)
            out.append(_report(name, level, tokens, arrivals, finishes))
    return out


def token_reduction(baseline: QoSReport, transformed: QoSReport) -> float:
    if baseline.mean_tokens <= 0:
        return 0.0
    return (baseline.mean_tokens - transformed.mean_tokens) / baseline.mean_tokens


def relative_change(before: float, after: float) -> float:
    return (after - before) / before if before else 0.0
