"""Health rules: latest telemetry per node in, status/alerts/directives out.

One rule per alert kind, evaluated against a hot-swappable threshold set.
Evaluation is pure; the caller supplies the clock and the latest values.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field, fields as dc_fields, replace
from typing import Mapping, Optional

NS_PER_SEC = 1_000_000_000

DEFAULT_STACK_VERSION = "2021.06"
DEFAULT_EXPECTED_MOUNTS = ("/home", "/scratch")

# Alert kinds, one per monitored failure class.
OFFLINE = "offline"
HARDWARE_PROBLEM = "hardware_problem"
VERSION_OUT_OF_SYNC = "version_out_of_sync"
LOW_MEMORY = "low_memory"
CPU_LOAD = "cpu_load"
GPU_LOAD = "gpu_load"
STORAGE_LOW = "storage_low"
TEMPERATURE = "temperature"
POWER_USAGE = "power_usage"
MOUNT_MISSING = "mount_missing"
JOB_OCCUPANCY = "job_occupancy"  # informational

ALERT_KINDS = (
    OFFLINE,
    HARDWARE_PROBLEM,
    VERSION_OUT_OF_SYNC,
    LOW_MEMORY,
    CPU_LOAD,
    GPU_LOAD,
    STORAGE_LOW,
    TEMPERATURE,
    POWER_USAGE,
    MOUNT_MISSING,
    JOB_OCCUPANCY,
)

STATE_OK = "ok"
STATE_WARN = "warn"
STATE_CRIT = "crit"
STATE_OFFLINE = "offline"

_SEVERITY_RANK = {STATE_OK: 0, STATE_WARN: 1, STATE_CRIT: 2, STATE_OFFLINE: 3}


class ThresholdError(ValueError):
    """Carries every violation found in a threshold document."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class Thresholds:
    heartbeat_timeout_s: float = 60.0
    mem_free_warn_pct: float = 10.0
    cpu_load_per_core_warn: float = 1.5
    gpu_util_warn_pct: float = 95.0
    disk_free_warn_pct: float = 10.0
    temp_warn_c: float = 70.0
    temp_crit_c: float = 80.0
    power_warn_w: float = 1000.0
    open_rate_warn_per_10m: float = 100000.0
    reference_stack_version: str = DEFAULT_STACK_VERSION
    expected_mounts: tuple[str, ...] = DEFAULT_EXPECTED_MOUNTS
    profiles: dict = field(default_factory=dict)

    def for_profile(self, profile: Optional[str]) -> "Thresholds":
        overrides = self.profiles.get(profile) if profile else None
        if not overrides:
            return self
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return {
            "heartbeat_timeout_s": self.heartbeat_timeout_s,
            "mem_free_warn_pct": self.mem_free_warn_pct,
            "cpu_load_per_core_warn": self.cpu_load_per_core_warn,
            "gpu_util_warn_pct": self.gpu_util_warn_pct,
            "disk_free_warn_pct": self.disk_free_warn_pct,
            "temp_warn_c": self.temp_warn_c,
            "temp_crit_c": self.temp_crit_c,
            "power_warn_w": self.power_warn_w,
            "open_rate_warn_per_10m": self.open_rate_warn_per_10m,
            "reference_stack_version": self.reference_stack_version,
            "expected_mounts": list(self.expected_mounts),
            "profiles": self.profiles,
        }


_NUMERIC_KEYS = {
    "heartbeat_timeout_s",
    "mem_free_warn_pct",
    "cpu_load_per_core_warn",
    "gpu_util_warn_pct",
    "disk_free_warn_pct",
    "temp_warn_c",
    "temp_crit_c",
    "power_warn_w",
    "open_rate_warn_per_10m",
}
_PCT_KEYS = ("mem_free_warn_pct", "gpu_util_warn_pct", "disk_free_warn_pct")


def _validate(th: Thresholds, violations: list[str], context: str = "") -> None:
    prefix = f"{context}: " if context else ""
    if th.temp_warn_c >= th.temp_crit_c:
        violations.append(f"{prefix}warn < crit required: temp_warn_c {th.temp_warn_c} >= temp_crit_c {th.temp_crit_c}")
    for key in _PCT_KEYS:
        v = getattr(th, key)
        if not 0.0 <= v <= 100.0:
            violations.append(f"{prefix}{key} {v} outside [0, 100]")
    if th.heartbeat_timeout_s <= 0:
        violations.append(f"{prefix}heartbeat_timeout_s must be > 0, got {th.heartbeat_timeout_s}")


def load_thresholds(config_text: str) -> Thresholds:
    """Parse a JSON threshold document; absent keys keep their defaults.
    Per-profile overrides live under `profiles`. All violations are
    reported together."""
    violations: list[str] = []
    try:
        doc = json.loads(config_text) if config_text.strip() else {}
    except json.JSONDecodeError as err:
        raise ThresholdError([f"invalid JSON: {err}"]) from None
    if not isinstance(doc, dict):
        raise ThresholdError(["threshold config must be a JSON object"])

    known = {f.name for f in dc_fields(Thresholds)}
    kwargs = {}
    for key, value in doc.items():
        if key not in known:
            violations.append(f"unknown threshold key {key!r}")
            continue
        if key == "expected_mounts":
            value = tuple(value)
        elif key in _NUMERIC_KEYS:
            try:
                value = float(value)
            except (TypeError, ValueError):
                violations.append(f"{key} must be numeric, got {value!r}")
                continue
        kwargs[key] = value
    th = Thresholds(**kwargs)
    _validate(th, violations)
    for name, overrides in th.profiles.items():
        if not isinstance(overrides, dict) or not set(overrides) <= known - {"profiles"}:
            violations.append(f"profile {name!r} has unknown override keys")
            continue
        _validate(th.for_profile(name), violations, context=f"profile {name}")
    if violations:
        raise ThresholdError(violations)
    return th


@dataclass(slots=True)
class VisualDirective:
    kind: str  # whole-node-color | component-highlight | fan-speed | fill-level | beacon | texture
    target: str  # component name or "node"
    value: object  # color/texture name, or scalar clamped to [0, 1]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "target": self.target, "value": self.value}


@dataclass(slots=True)
class NodeStatus:
    node_id: str
    state: str
    alerts: list[str]
    directives: list[VisualDirective]
    component_loads: dict[str, float]
    last_seen: Optional[int]
    jobs: list[tuple[str, str]]
    missing_fields: list[str]
    readings: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "state": self.state,
            "alerts": self.alerts,
            "directives": [d.to_dict() for d in self.directives],
            "component_loads": self.component_loads,
            "last_seen": self.last_seen,
            "jobs": [list(j) for j in self.jobs],
            "missing_fields": self.missing_fields,
            "readings": self.readings,
        }


def _clamp(v: float) -> float:
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def job_texture(job_id: str) -> str:
    """Deterministic texture name for a job (stable across processes)."""
    return f"weave-{zlib.crc32(job_id.encode()) % 6}"


def _as_float(latest: Mapping[str, object], key: str) -> Optional[float]:
    v = latest.get(key)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        return None
    return float(v)


_CORE_FIELDS = ("load1", "mem_free_pct", "disk_free_pct", "temp_c", "power_w", "stack_version", "mounts")
_READING_FIELDS = ("temp_c", "power_w", "clock_mhz", "fan_rpm")


def evaluate_node(
    node_id: str,
    latest: Mapping[str, object],
    last_seen_ns: Optional[int],
    jobs: list[tuple[str, str]],
    th: Thresholds,
    now_ns: int,
    cores: int = 1,
    gpus: int = 0,
    hwevents: Optional[Mapping[str, int]] = None,
) -> NodeStatus:
    """Apply every rule to one node's latest values. Missing fields leave
    their rules untriggered and are reported in missing_fields."""
    alerts: list[str] = []
    severities: list[str] = []
    directives: list[VisualDirective] = []

    def fire(kind: str, severity: str, directive: Optional[VisualDirective]) -> None:
        alerts.append(kind)
        severities.append(severity)
        if directive is not None:
            directives.append(directive)

    if last_seen_ns is None or now_ns - last_seen_ns > th.heartbeat_timeout_s * NS_PER_SEC:
        fire(OFFLINE, STATE_OFFLINE, VisualDirective("whole-node-color", "node", "red"))

    for component in sorted(hwevents or {}):
        severity = hwevents[component]
        if severity >= 1:
            fire(
                HARDWARE_PROBLEM,
                STATE_CRIT if severity >= 2 else STATE_WARN,
                VisualDirective("component-highlight", component, "orange"),
            )

    version = latest.get("stack_version")
    if isinstance(version, str) and version != th.reference_stack_version:
        fire(VERSION_OUT_OF_SYNC, STATE_WARN, VisualDirective("beacon", "node", "yellow"))

    mem_free = _as_float(latest, "mem_free_pct")
    if mem_free is not None and mem_free < th.mem_free_warn_pct:
        fire(LOW_MEMORY, STATE_WARN, VisualDirective("fill-level", "memory", _clamp(mem_free / 100.0)))

    load1 = _as_float(latest, "load1")
    if load1 is not None and load1 / cores > th.cpu_load_per_core_warn:
        fire(CPU_LOAD, STATE_WARN, VisualDirective("fan-speed", "cpu", _clamp(load1 / (2.0 * cores))))

    gpu_util = _as_float(latest, "gpu_util")
    if gpu_util is not None and gpu_util > th.gpu_util_warn_pct:
        fire(GPU_LOAD, STATE_WARN, VisualDirective("fan-speed", "gpu", _clamp(gpu_util / 100.0)))

    disk_free = _as_float(latest, "disk_free_pct")
    if disk_free is not None and disk_free < th.disk_free_warn_pct:
        fire(STORAGE_LOW, STATE_WARN, VisualDirective("fill-level", "disk", _clamp(disk_free / 100.0)))

    temp = _as_float(latest, "temp_c")
    if temp is not None and temp >= th.temp_warn_c:
        crit = temp >= th.temp_crit_c
        fire(TEMPERATURE, STATE_CRIT if crit else STATE_WARN,
             VisualDirective("beacon", "node", "red" if crit else "orange"))

    power = _as_float(latest, "power_w")
    if power is not None and power > th.power_warn_w:
        fire(POWER_USAGE, STATE_WARN, VisualDirective("fan-speed", "node", _clamp(power / (2.0 * th.power_warn_w))))

    mounts = latest.get("mounts")
    if mounts is not None:
        present = set(mounts.split(",")) if isinstance(mounts, str) else set(mounts)
        if any(m not in present for m in th.expected_mounts):
            fire(MOUNT_MISSING, STATE_CRIT, VisualDirective("beacon", "node", "red"))

    for job_id, _user in sorted(jobs):
        fire(JOB_OCCUPANCY, STATE_OK, VisualDirective("texture", "node", job_texture(job_id)))

    loads: dict[str, float] = {}
    if load1 is not None:
        loads["cpu"] = _clamp(load1 / cores)
    if gpu_util is not None and gpus > 0:
        loads["gpu"] = _clamp(gpu_util / 100.0)
    if mem_free is not None:
        loads["memory"] = _clamp(1.0 - mem_free / 100.0)
    if disk_free is not None:
        loads["disk"] = _clamp(1.0 - disk_free / 100.0)

    expected = list(_CORE_FIELDS) + (["gpu_util"] if gpus > 0 else [])
    missing = sorted(f for f in expected if f not in latest)

    readings = {}
    for key in _READING_FIELDS:
        v = _as_float(latest, key)
        if v is not None:
            readings[key] = v

    state = STATE_OK
    for sev in severities:
        if _SEVERITY_RANK[sev] > _SEVERITY_RANK[state]:
            state = sev

    return NodeStatus(
        node_id=node_id,
        state=state,
        alerts=sorted(set(alerts)),
        directives=directives,
        component_loads=loads,
        last_seen=last_seen_ns,
        jobs=sorted(jobs),
        missing_fields=missing,
        readings=readings,
    )


def cluster_rollup(statuses: list[NodeStatus]) -> dict:
    """Counts per state and per alert kind, plus node ids per active alert."""
    states = {STATE_OK: 0, STATE_WARN: 0, STATE_CRIT: 0, STATE_OFFLINE: 0}
    alert_counts = {kind: 0 for kind in ALERT_KINDS}
    alert_nodes: dict[str, list[str]] = {kind: [] for kind in ALERT_KINDS}
    for status in statuses:
        states[status.state] += 1
        for kind in status.alerts:
            alert_counts[kind] += 1
            alert_nodes[kind].append(status.node_id)
    for nodes in alert_nodes.values():
        nodes.sort()
    return {
        "states": states,
        "alerts": {k: v for k, v in alert_counts.items() if v},
        "alert_nodes": {k: v for k, v in alert_nodes.items() if v},
    }
