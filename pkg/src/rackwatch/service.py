"""Monitoring core: ingestion, cadenced evaluation, versioned snapshots and
the delta event stream that reconstructs them.

The core is transport-free; the HTTP layer (httpd) wraps it. Evaluation is
stateless with respect to previous snapshots: every tick recomputes all
node statuses from the latest stored values, so a snapshot can always be
re-derived from the raw store.
"""

from __future__ import annotations

import copy
import json
import threading
import time
from queue import Full, Queue
from typing import Optional

from . import alerts
from .lineproto import JobEventError, parse_batch, parse_job_event
from .sim import ClusterTopology
from .store import TimeSeriesStore

NS_PER_SEC = 1_000_000_000


def canonical_json(obj) -> str:
    """Stable serialization used for snapshot equality checks."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cluster_rollup_from_dicts(statuses: list[dict]) -> dict:
    """cluster_rollup over already-serialized node statuses."""
    states = {alerts.STATE_OK: 0, alerts.STATE_WARN: 0, alerts.STATE_CRIT: 0, alerts.STATE_OFFLINE: 0}
    alert_counts: dict[str, int] = {}
    alert_nodes: dict[str, list[str]] = {}
    for status in statuses:
        states[status["state"]] += 1
        for kind in status["alerts"]:
            alert_counts[kind] = alert_counts.get(kind, 0) + 1
            alert_nodes.setdefault(kind, []).append(status["node_id"])
    for nodes in alert_nodes.values():
        nodes.sort()
    return {"states": states, "alerts": alert_counts, "alert_nodes": alert_nodes}


class _Subscriber:
    __slots__ = ("queue", "dead")

    def __init__(self, maxsize: int):
        self.queue: Queue = Queue(maxsize=maxsize)
        self.dead = False


class MonitorCore:
    def __init__(
        self,
        topology: ClusterTopology,
        thresholds: alerts.Thresholds,
        retention_s: float = 24 * 3600.0,
    ):
        self.topology = topology
        self.thresholds = thresholds
        self.retention_ns = int(retention_s * NS_PER_SEC)
        self.store = TimeSeriesStore()
        self._lock = threading.RLock()
        self._latest: dict[str, dict[str, tuple[int, object]]] = {}
        self._hwevents: dict[str, dict[str, tuple[int, int]]] = {}
        self._last_seen: dict[str, int] = {}
        self._sensors: dict[str, dict] = {}
        self._jobs: dict[str, dict] = {}
        self._subscribers: list[_Subscriber] = []
        self._last_prune_ns = 0
        self.started_ns = time.time_ns()
        self.snapshot: dict = {
            "seq": 0,
            "generated_at": 0,
            "nodes": [],
            "rollup": {},
            "jobs": [],
            "sensors": {},
            "topology_digest": topology.digest(),
        }

    # -- ingestion ---------------------------------------------------------

    def apply_ingest(self, text: str, receipt_ns: Optional[int] = None) -> dict:
        """Parse a line-protocol body; good lines are stored, bad lines are
        counted and reported. Never raises on malformed input."""
        if receipt_ns is None:
            receipt_ns = time.time_ns()
        samples, errors = parse_batch(text, receipt_ns)
        self.store.insert_many(samples)
        with self._lock:
            for s in samples:
                tags = s.tags
                if s.measurement == "envsensor":
                    sid = tags.get("sensor")
                    if sid:
                        entry = self._sensors.get(sid)
                        if entry is None or s.timestamp >= entry["ts"]:
                            self._sensors[sid] = {
                                "location": tags.get("location", ""),
                                "readings": dict(s.fields),
                                "ts": s.timestamp,
                            }
                    continue
                host = tags.get("host")
                if not host:
                    continue
                seen = self._last_seen.get(host)
                if seen is None or receipt_ns > seen:
                    self._last_seen[host] = receipt_ns
                if s.measurement == "hwevent":
                    component = tags.get("component", "unknown")
                    events = self._hwevents.setdefault(host, {})
                    prev = events.get(component)
                    severity = s.fields.get("severity")
                    if isinstance(severity, (int, float)) and (prev is None or s.timestamp >= prev[0]):
                        events[component] = (s.timestamp, int(severity))
                    continue
                latest = self._latest.setdefault(host, {})
                for name, value in s.fields.items():
                    prev = latest.get(name)
                    if prev is None or s.timestamp >= prev[0]:
                        latest[name] = (s.timestamp, value)
        return {
            "accepted": len(samples),
            "rejected": len(errors),
            "first_errors": [f"line {n}: {e}" for n, e in errors[:5]],
        }

    def apply_job_text(self, text: str, receipt_ns: Optional[int] = None) -> dict:
        """One JSON job event per line; start registers, end removes."""
        accepted, rejected, errs = 0, 0, []
        for line in text.split("\n"):
            line = line.strip()
            if not line:
                continue
            try:
                ev = parse_job_event(line)
            except JobEventError as err:
                rejected += 1
                if len(errs) < 5:
                    errs.append(str(err))
                continue
            accepted += 1
            with self._lock:
                if ev.event == "start":
                    self._jobs[ev.job_id] = {
                        "job_id": ev.job_id,
                        "user": ev.user,
                        "nodes": sorted(ev.nodes),
                        "started_ns": ev.ts_ns,
                    }
                else:
                    self._jobs.pop(ev.job_id, None)
        return {"accepted": accepted, "rejected": rejected, "first_errors": errs}

    # -- evaluation ----------------------------------------------------------

    def evaluation_tick(self, now_ns: Optional[int] = None) -> tuple[dict, list[dict]]:
        """Recompute every node status, publish snapshot seq+1 atomically and
        emit one event per changed node, a job event on job-set changes, and
        the per-tick rollup event that carries sensors and generated_at."""
        if now_ns is None:
            now_ns = time.time_ns()
        with self._lock:
            th = self.thresholds
            jobs_by_node: dict[str, list[tuple[str, str]]] = {}
            for job in self._jobs.values():
                for node in job["nodes"]:
                    jobs_by_node.setdefault(node, []).append((job["job_id"], job["user"]))
            statuses = []
            for node_id in sorted(self.topology.monitored_nodes()):
                profile = self.topology.profile_of(node_id)
                latest = {name: v for name, (_, v) in self._latest.get(node_id, {}).items()}
                hw = {c: sev for c, (_, sev) in self._hwevents.get(node_id, {}).items()}
                status = alerts.evaluate_node(
                    node_id,
                    latest,
                    self._last_seen.get(node_id),
                    jobs_by_node.get(node_id, []),
                    th.for_profile(self.topology.node_profiles[node_id]),
                    now_ns,
                    cores=profile.cores,
                    gpus=profile.gpus,
                    hwevents=hw,
                )
                doc = status.to_dict()
                doc["rack"] = self.topology.node_racks[node_id]
                doc["profile"] = self.topology.node_profiles[node_id]
                statuses.append(doc)
            rollup = cluster_rollup_from_dicts(statuses)
            jobs_list = sorted(self._jobs.values(), key=lambda j: j["job_id"])
            sensors = copy.deepcopy(self._sensors)
            seq = self.snapshot["seq"] + 1

            prev_nodes = {n["node_id"]: n for n in self.snapshot["nodes"]}
            events: list[dict] = []
            for status in statuses:
                if prev_nodes.get(status["node_id"]) != status:
                    events.append({"seq": seq, "kind": "node_status", "payload": status})
            if jobs_list != self.snapshot["jobs"]:
                events.append({"seq": seq, "kind": "job", "payload": {"jobs": jobs_list}})
            events.append(
                {
                    "seq": seq,
                    "kind": "rollup",
                    "payload": {"rollup": rollup, "sensors": sensors, "generated_at": now_ns},
                }
            )
            snapshot = {
                "seq": seq,
                "generated_at": now_ns,
                "nodes": statuses,
                "rollup": rollup,
                "jobs": jobs_list,
                "sensors": sensors,
                "topology_digest": self.snapshot["topology_digest"],
            }
            self.snapshot = snapshot
            self._publish(events)
        if now_ns - self._last_prune_ns > 60 * NS_PER_SEC:
            self._last_prune_ns = now_ns
            self.store.prune(now_ns - self.retention_ns)
        return snapshot, events

    def swap_thresholds(self, th: alerts.Thresholds) -> None:
        """Atomic swap; the next tick evaluates with the new set."""
        with self._lock:
            self.thresholds = th

    # -- streaming -----------------------------------------------------------

    def subscribe(self, maxsize: int = 512) -> tuple[_Subscriber, dict]:
        """Register a subscriber and return it with the snapshot it should
        start from; no event between the two can be missed."""
        with self._lock:
            sub = _Subscriber(maxsize)
            self._subscribers.append(sub)
            return sub, self.snapshot

    def unsubscribe(self, sub: _Subscriber) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    def _publish(self, events: list[dict]) -> None:
        for sub in list(self._subscribers):
            if sub.dead:
                continue
            try:
                for ev in events:
                    sub.queue.put_nowait(ev)
            except Full:
                sub.dead = True  # slow subscriber: drop, never backpressure


def apply_events(snapshot: dict, events: list[dict]) -> dict:
    """Replay delta events over a snapshot; replaying seq k..m over
    snapshot k-1 reproduces snapshot m exactly."""
    snap = copy.deepcopy(snapshot)
    nodes = {n["node_id"]: n for n in snap["nodes"]}
    for ev in events:
        kind = ev["kind"]
        if kind == "snapshot":
            snap = copy.deepcopy(ev["payload"])
            nodes = {n["node_id"]: n for n in snap["nodes"]}
            continue
        if kind == "heartbeat":
            continue
        snap["seq"] = ev["seq"]
        if kind == "node_status":
            nodes[ev["payload"]["node_id"]] = ev["payload"]
        elif kind == "job":
            snap["jobs"] = copy.deepcopy(ev["payload"]["jobs"])
        elif kind == "rollup":
            snap["rollup"] = copy.deepcopy(ev["payload"]["rollup"])
            snap["sensors"] = copy.deepcopy(ev["payload"]["sensors"])
            snap["generated_at"] = ev["payload"]["generated_at"]
    snap["nodes"] = [nodes[k] for k in sorted(nodes)]
    return snap
