"""Synthetic supercomputer: topology, smooth per-node telemetry walks, a job
mix, and injectable fault scenarios, emitted as line-protocol batches.

Every node owns an independent PRNG substream seeded from (seed, node id),
so adding or removing one node never perturbs the others and a fixed
(seed, topology, scenario script) reproduces byte-identical output.
"""

from __future__ import annotations

import json
import random
import zlib
from dataclasses import dataclass
from hashlib import sha256
from typing import Optional

from .alerts import DEFAULT_EXPECTED_MOUNTS, DEFAULT_STACK_VERSION

NS_PER_SEC = 1_000_000_000
BUCKET_10M_NS = 600 * NS_PER_SEC

# Default simulated epoch; live runs pass the wall clock instead.
DEFAULT_BASE_TIME_NS = 1_623_337_200 * NS_PER_SEC  # 2021-06-10T15:00:00Z

DRIFT_STACK_VERSION = "2020.12"
NOMINAL_MOUNTS = ",".join(DEFAULT_EXPECTED_MOUNTS)


@dataclass(frozen=True)
class NodeProfile:
    name: str
    cores: int
    ram_gb: int
    gpus: int
    gpu_model: str
    local_disk_gb: int


PROFILES = {
    "xeon-p8260": NodeProfile("xeon-p8260", cores=48, ram_gb=192, gpus=0, gpu_model="", local_disk_gb=960),
    "gaia-v100": NodeProfile("gaia-v100", cores=40, ram_gb=384, gpus=2, gpu_model="V100", local_disk_gb=1920),
    "storage": NodeProfile("storage", cores=16, ram_gb=96, gpus=0, gpu_model="", local_disk_gb=8000),
}


class TopologyError(ValueError):
    pass


class ScenarioError(ValueError):
    pass


@dataclass
class ClusterTopology:
    racks: list[tuple[str, list[str]]]
    node_profiles: dict[str, str]
    node_racks: dict[str, str]
    storage_servers: list[str]
    env_sensors: list[tuple[str, str]]
    seed: int

    def monitored_nodes(self) -> list[str]:
        """Rack nodes plus storage servers, the full alert-evaluated set."""
        out = [n for _, nodes in self.racks for n in nodes]
        out.extend(self.storage_servers)
        return out

    def profile_of(self, node_id: str) -> NodeProfile:
        return PROFILES[self.node_profiles[node_id]]

    def total_cores(self) -> int:
        return sum(self.profile_of(n).cores for _, nodes in self.racks for n in nodes)

    def digest(self) -> str:
        doc = {
            "racks": self.racks,
            "profiles": self.node_profiles,
            "storage": self.storage_servers,
            "sensors": self.env_sensors,
        }
        return sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def build_topology(
    racks: int,
    nodes_per_rack: int,
    profile_mix: list[str] | str = "xeon-p8260",
    seed: int = 0,
) -> ClusterTopology:
    """Deterministic topology: node ids are globally unique, each node sits
    in exactly one rack, racks cycle through the profile mix."""
    if racks < 1 or nodes_per_rack < 1:
        raise TopologyError("racks and nodes-per-rack must be >= 1")
    mix = [profile_mix] if isinstance(profile_mix, str) else list(profile_mix)
    for name in mix:
        if name not in PROFILES:
            raise TopologyError(f"unknown profile name {name!r}")
    rack_list: list[tuple[str, list[str]]] = []
    node_profiles: dict[str, str] = {}
    node_racks: dict[str, str] = {}
    sensors: list[tuple[str, str]] = []
    idx = 0
    for r in range(racks):
        rack_id = f"r{r + 1:02d}"
        profile = mix[r % len(mix)]
        nodes = []
        for _ in range(nodes_per_rack):
            idx += 1
            node_id = f"n{idx:04d}"
            nodes.append(node_id)
            node_profiles[node_id] = profile
            node_racks[node_id] = rack_id
        rack_list.append((rack_id, nodes))
        sensors.append((f"e{2 * r + 1:04d}", f"rack-{rack_id}-inlet"))
        sensors.append((f"e{2 * r + 2:04d}", f"rack-{rack_id}-outlet"))
    storage = ["mds01", "oss01", "oss02"]
    for s in storage:
        node_profiles[s] = "storage"
        node_racks[s] = "storage"
    return ClusterTopology(rack_list, node_profiles, node_racks, storage, sensors, seed)


SCENARIO_KINDS = {
    "metadata-storm": 200_000.0,
    "node-down": 0.0,
    "overheat": 85.0,
    "oom": 5.0,
    "mount-loss": 0.0,
    "version-drift": 0.0,
    "hw-fault": 2.0,
    "power-spike": 1300.0,
    "cpu-hog": 2.0,
    "gpu-hog": 100.0,
    "disk-fill": 5.0,
}


@dataclass
class Scenario:
    kind: str
    targets: list[str]
    start_tick: int
    stop_tick: int
    magnitude: Optional[float] = None
    job_id: Optional[str] = None

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")
        if self.magnitude is None:
            self.magnitude = SCENARIO_KINDS[self.kind]
        if self.kind == "metadata-storm" and not self.job_id:
            self.job_id = f"storm-{self.start_tick}"

    def active(self, tick: int) -> bool:
        return self.start_tick <= tick < self.stop_tick

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "targets": self.targets,
            "start_tick": self.start_tick,
            "stop_tick": self.stop_tick,
            "magnitude": self.magnitude,
            "job_id": self.job_id,
        }


def load_scenarios(text: str) -> list[Scenario]:
    doc = json.loads(text)
    if not isinstance(doc, list):
        raise ScenarioError("scenario file must be a JSON list")
    out = []
    for obj in doc:
        out.append(
            Scenario(
                kind=obj["kind"],
                targets=list(obj.get("targets", [])),
                start_tick=int(obj.get("start_tick", 0)),
                stop_tick=int(obj.get("stop_tick", 2**62)),
                magnitude=obj.get("magnitude"),
                job_id=obj.get("job_id"),
            )
        )
    return out


class _Walk:
    """Bounded random walk; one per node field."""

    __slots__ = ("value", "lo", "hi", "step")

    def __init__(self, rng: random.Random, lo: float, hi: float):
        self.lo = lo
        self.hi = hi
        self.step = (hi - lo) * 0.04
        self.value = rng.uniform(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo))

    def advance(self, rng: random.Random) -> float:
        v = self.value + rng.uniform(-self.step, self.step)
        if v < self.lo:
            v = self.lo
        elif v > self.hi:
            v = self.hi
        self.value = v
        return v


class _NodeState:
    __slots__ = ("rng", "walks", "prefixes", "gpus", "cores")

    def __init__(self, node_id: str, rack_id: str, profile: NodeProfile, seed: int):
        self.rng = random.Random(f"{seed}/{node_id}")
        self.gpus = profile.gpus
        self.cores = profile.cores
        rng = self.rng
        c = profile.cores
        power_band = {
            "xeon-p8260": (320.0, 520.0),
            "gaia-v100": (600.0, 850.0),
            "storage": (200.0, 350.0),
        }[profile.name]
        self.walks = {
            "load1": _Walk(rng, 0.05 * c, 0.85 * c),
            "clock_mhz": _Walk(rng, 1200.0, 3600.0),
            "mem_free_pct": _Walk(rng, 30.0, 70.0),
            "disk_free_pct": _Walk(rng, 40.0, 80.0),
            "temp_c": _Walk(rng, 35.0, 55.0),
            "power_w": _Walk(rng, *power_band),
            "fan_rpm": _Walk(rng, 4000.0, 9000.0),
            "gpu_util": _Walk(rng, 5.0, 80.0),
        }
        tagset = f",host={node_id},rack={rack_id} "
        self.prefixes = {m: m + tagset for m in ("cpu", "mem", "disk", "env", "sys", "gpu", "hwevent")}


@dataclass
class TickBatch:
    lines: list[str]
    field_count: int
    job_events: list[str]

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass
class _Job:
    job_id: str
    user: str
    nodes: list[str]
    counter: float = 0.0  # cumulative opens for baseline jobs
    storm: Optional[Scenario] = None
    offset: float = 0.0  # subtracted after a storage-server restart


class Simulator:
    def __init__(
        self,
        topology: ClusterTopology,
        seed: int = 0,
        tick_seconds: float = 30.0,
        base_time_ns: int = DEFAULT_BASE_TIME_NS,
        jobs: int = 0,
    ):
        self.topology = topology
        self.seed = seed
        self.tick_ns = int(tick_seconds * NS_PER_SEC)
        self.base_time_ns = base_time_ns
        self.scenarios: list[Scenario] = []
        self._nodes: dict[str, _NodeState] = {}
        for node_id in topology.monitored_nodes():
            profile = topology.profile_of(node_id)
            self._nodes[node_id] = _NodeState(node_id, topology.node_racks[node_id], profile, seed)
        self._sensor_rng = {
            sid: random.Random(f"{seed}/sensor/{sid}") for sid, _ in topology.env_sensors
        }
        self._sensor_walks = {
            sid: (_Walk(rng, 18.0, 27.0), _Walk(rng, 35.0, 55.0))
            for sid, rng in self._sensor_rng.items()
        }
        self._jobs: list[_Job] = []
        self._baseline_started = False
        if jobs:
            jrng = random.Random(f"{seed}/jobs")
            rack_nodes = [n for _, nodes in topology.racks for n in nodes]
            for i in range(jobs):
                width = jrng.randint(1, min(4, len(rack_nodes)))
                start = jrng.randrange(len(rack_nodes))
                picked = [rack_nodes[(start + k) % len(rack_nodes)] for k in range(width)]
                self._jobs.append(_Job(f"sim-{i + 1:04d}", f"u{i % 37:02d}", picked))
        self._mds_was_down = False

    # -- scenario control --------------------------------------------------

    def inject(self, scenario: Scenario) -> Scenario:
        known = set(self._nodes)
        for target in scenario.targets:
            if target not in known:
                raise ScenarioError(f"unknown target id {target!r}")
        self.scenarios.append(scenario)
        return scenario

    def cancel(self, scenario: Scenario) -> None:
        self.scenarios.remove(scenario)

    # -- emission ------------------------------------------------------------

    def tick_time_ns(self, tick: int) -> int:
        return self.base_time_ns + tick * self.tick_ns

    def step(self, tick: int) -> TickBatch:
        ts = self.tick_time_ns(tick)
        ts_str = str(ts)
        lines: list[str] = []
        append = lines.append
        nfields = 0
        job_events: list[str] = []

        down: set[str] = set()
        overrides: dict[str, dict[str, float]] = {}
        version_drift: set[str] = set()
        mount_loss: set[str] = set()
        hw_lines: list[tuple[str, str, int]] = []
        for sc in self.scenarios:
            active = sc.active(tick)
            if sc.kind == "node-down":
                if active:
                    down.update(sc.targets)
            elif sc.kind == "metadata-storm":
                if tick == sc.start_tick:
                    job = _Job(sc.job_id, f"u{zlib.crc32(sc.job_id.encode()) % 100:02d}", list(sc.targets), storm=sc)
                    self._jobs.append(job)
                    job_events.append(self._job_event_json(job, "start", ts))
                if tick == sc.stop_tick:
                    for job in list(self._jobs):
                        if job.storm is sc:
                            job_events.append(self._job_event_json(job, "end", ts))
                            self._jobs.remove(job)
            elif active:
                if sc.kind == "version-drift":
                    version_drift.update(sc.targets)
                elif sc.kind == "mount-loss":
                    mount_loss.update(sc.targets)
                elif sc.kind == "hw-fault":
                    for t in sc.targets:
                        hw_lines.append((t, "dimm2", int(sc.magnitude)))
                else:
                    fieldname = {
                        "overheat": "temp_c",
                        "oom": "mem_free_pct",
                        "power-spike": "power_w",
                        "gpu-hog": "gpu_util",
                        "disk-fill": "disk_free_pct",
                        "cpu-hog": "load1",
                    }[sc.kind]
                    for t in sc.targets:
                        mag = sc.magnitude
                        if sc.kind == "cpu-hog":
                            mag = mag * self._nodes[t].cores
                        overrides.setdefault(t, {})[fieldname] = mag
            elif sc.kind == "hw-fault" and tick == sc.stop_tick:
                for t in sc.targets:
                    hw_lines.append((t, "dimm2", 0))

        if not self._baseline_started and self._jobs:
            for job in self._jobs:
                if job.storm is None:
                    job_events.append(self._job_event_json(job, "start", ts))
            self._baseline_started = True

        mds = self.topology.storage_servers[0] if self.topology.storage_servers else None
        mds_down = mds in down
        if self._mds_was_down and not mds_down:
            # storage server restart: cumulative counters start over
            for job in self._jobs:
                if job.storm is None:
                    job.counter = 0.0
                else:
                    job.offset = self._storm_counter(job.storm, ts)
        self._mds_was_down = mds_down

        for node_id, st in self._nodes.items():
            if node_id in down:
                continue
            rng = st.rng
            walks = st.walks
            over = overrides.get(node_id)
            load1 = walks["load1"].advance(rng)
            clock = walks["clock_mhz"].advance(rng)
            mem = walks["mem_free_pct"].advance(rng)
            disk = walks["disk_free_pct"].advance(rng)
            temp = walks["temp_c"].advance(rng)
            power = walks["power_w"].advance(rng)
            fan = walks["fan_rpm"].advance(rng)
            if over:
                load1 = over.get("load1", load1)
                mem = over.get("mem_free_pct", mem)
                disk = over.get("disk_free_pct", disk)
                temp = over.get("temp_c", temp)
                power = over.get("power_w", power)
            p = st.prefixes
            append(f"{p['cpu']}load1={load1:.2f},clock_mhz={clock:.0f} {ts_str}")
            append(f"{p['mem']}mem_free_pct={mem:.2f} {ts_str}")
            append(f"{p['disk']}disk_free_pct={disk:.2f} {ts_str}")
            append(f"{p['env']}temp_c={temp:.2f},power_w={power:.1f},fan_rpm={fan:.0f} {ts_str}")
            version = DRIFT_STACK_VERSION if node_id in version_drift else DEFAULT_STACK_VERSION
            mounts = DEFAULT_EXPECTED_MOUNTS[0] if node_id in mount_loss else NOMINAL_MOUNTS
            append(f"{p['sys']}stack_version=\"{version}\",mounts=\"{mounts}\",heartbeat={tick}i {ts_str}")
            nfields += 10
            if st.gpus:
                gpu = walks["gpu_util"].advance(rng)
                if over:
                    gpu = over.get("gpu_util", gpu)
                append(f"{p['gpu']}gpu_util={gpu:.2f} {ts_str}")
                nfields += 1

        for node_id, component, severity in hw_lines:
            if node_id in down:
                continue
            st = self._nodes[node_id]
            append(f"hwevent,host={node_id},rack={self.topology.node_racks[node_id]},component={component} severity={severity}i {ts_str}")
            nfields += 1

        if mds is not None and not mds_down:
            for job in self._jobs:
                if job.storm is not None:
                    value = self._storm_counter(job.storm, ts) - job.offset
                    if value < 0:
                        value = 0.0
                else:
                    job.counter += job_rng_increment(self.seed, job.job_id, tick)
                    value = job.counter
                append(f"lustre,host={mds},jobid={job.job_id} jobstats_open={int(value)}i {ts_str}")
                nfields += 1

        for sid, location in self.topology.env_sensors:
            rng = self._sensor_rng[sid]
            tw, hw = self._sensor_walks[sid]
            append(f"envsensor,sensor={sid},location={location} temp_c={tw.advance(rng):.2f},humidity_pct={hw.advance(rng):.2f} {ts_str}")
            nfields += 2

        return TickBatch(lines, nfields, job_events)

    def _storm_counter(self, sc: Scenario, ts: int) -> float:
        onset = self.tick_time_ns(sc.start_tick)
        buckets = ts // BUCKET_10M_NS - onset // BUCKET_10M_NS
        return sc.magnitude * (buckets + 1)

    def _job_event_json(self, job: _Job, event: str, ts: int) -> str:
        return json.dumps(
            {"job_id": job.job_id, "user": job.user, "nodes": job.nodes, "event": event, "ts_ns": ts},
            separators=(",", ":"),
        )


def job_rng_increment(seed: int, job_id: str, tick: int) -> float:
    """Small monotone increment for a baseline job's open counter."""
    h = zlib.crc32(f"{seed}/{job_id}/{tick}".encode())
    return 1.0 + (h % 1000) / 100.0


def inject_scenario(sim: Simulator, scenario: Scenario) -> Scenario:
    return sim.inject(scenario)
