from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# The six jobs and open rates from the storage-slowdown investigation the
# query engine must reproduce, highest rate first.
STORM_JOBS = [
    ("23159087", 893817),
    ("23159084", 496977),
    ("23184225", 202221),
    ("23184272", 201494),
    ("23184274", 200337),
    ("23184271", 199973),
]

STORM_QUERY = (
    'SELECT "jobid", ROUND(TOP("opens", 10)) AS "opens_last_10m"\n'
    'FROM (SELECT NON_NEGATIVE_DERIVATIVE(MEAN("jobstats_open"), 10m) AS "opens"\n'
    'FROM "lustre" WHERE time >= now() - 10m AND time <= now()) GROUP BY jobid, time(10m))'
)

BASE_NS = 1_623_339_000 * 10**9  # 2021-06-10T15:30:00Z
NOW_NS = BASE_NS + 15 * 60 * 10**9  # 2021-06-10T15:45:00Z


def storm_simulator(seed: int = 5):
    """1-rack simulator with all six investigation jobs storming."""
    from rackwatch.sim import Scenario, Simulator, build_topology

    topo = build_topology(1, 2, "xeon-p8260", seed=seed)
    sim = Simulator(topo, seed=seed, tick_seconds=30.0, base_time_ns=BASE_NS)
    for job_id, magnitude in STORM_JOBS:
        sim.inject(
            Scenario(
                "metadata-storm",
                ["n0001"],
                start_tick=0,
                stop_tick=10_000,
                magnitude=float(magnitude),
                job_id=job_id,
            )
        )
    return sim


def storm_store(seed: int = 5):
    """Store seeded with the metadata-storm scenario covering 15:30-15:45."""
    from rackwatch.lineproto import parse_batch
    from rackwatch.store import TimeSeriesStore

    sim = storm_simulator(seed)
    store = TimeSeriesStore()
    for tick in range(31):
        samples, errors = parse_batch(sim.step(tick).text, BASE_NS)
        assert not errors
        store.insert_many(samples)
    return store


def drive(core, sim, ticks, start_tick: int = 0):
    """Feed simulator output into a core tick by tick, evaluating after each
    batch with the simulated clock; returns [(tick, snapshot, events)]."""
    out = []
    for tick in range(start_tick, start_tick + ticks):
        now = sim.tick_time_ns(tick)
        batch = sim.step(tick)
        core.apply_ingest(batch.text, receipt_ns=now)
        if batch.job_events:
            core.apply_job_text("\n".join(batch.job_events))
        snapshot, events = core.evaluation_tick(now)
        out.append((tick, snapshot, events))
    return out


def core_for(topology, **kwargs):
    from rackwatch.alerts import Thresholds
    from rackwatch.service import MonitorCore

    return MonitorCore(topology, Thresholds(), **kwargs)
