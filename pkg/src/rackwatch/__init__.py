"""rackwatch: real-time supercomputer monitoring stack.

Telemetry flows in as line protocol, lands in an in-memory time-series
store, is evaluated against per-node health rules on a fixed cadence, and
streams out as versioned snapshots plus deltas for operator consoles. A
built-in cluster simulator stands in for real hardware.
"""

from .assoc import AssociativeArray
from .alerts import NodeStatus, Thresholds, VisualDirective, cluster_rollup, evaluate_node, load_thresholds
from .lineproto import JobEvent, MetricSample, parse_batch, parse_job_event, parse_line, serialize_sample
from .query import eval_query, format_table, parse_query
from .service import MonitorCore, apply_events, canonical_json
from .sim import ClusterTopology, Scenario, Simulator, build_topology
from .store import TimeSeriesStore

__version__ = "0.1.0"

__all__ = [
    "AssociativeArray",
    "ClusterTopology",
    "JobEvent",
    "MetricSample",
    "MonitorCore",
    "NodeStatus",
    "Scenario",
    "Simulator",
    "Thresholds",
    "TimeSeriesStore",
    "VisualDirective",
    "apply_events",
    "build_topology",
    "canonical_json",
    "cluster_rollup",
    "eval_query",
    "evaluate_node",
    "format_table",
    "load_thresholds",
    "parse_batch",
    "parse_job_event",
    "parse_line",
    "parse_query",
    "serialize_sample",
]
