"""Serving, overhead measurement, and QoS replay for program libraries."""

from .corpus import (
    WorkloadRecord,
    generate_corpus,
    load_workload,
    parse_workload,
    synthetic_workload,
)
from .overhead import OverheadStats, measure_overhead
from .replay import LatencyModel, QoSReport, qos_curves, replay
from .service import LibraryLoadFailure, TransformService, make_server, serve

__all__ = [
    "LatencyModel",
    "LibraryLoadFailure",
    "OverheadStats",
    "QoSReport",
    "TransformService",
    "WorkloadRecord",
    "generate_corpus",
    "load_workload",
    "make_server",
    "measure_overhead",
    "parse_workload",
    "qos_curves",
    "replay",
    "serve",
    "synthetic_workload",
]
